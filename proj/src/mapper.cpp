#include "taskmap/mapper.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("mapper", msg); }

} // namespace

Mapper::Mapper(const ApplicationGraph& g, const Topology& topo) : g_(g), topo_(topo) {
    n_types_ = static_cast<uint32_t>(topo.processor_types().size());

    // Per-subtask execution time indexed by the topology's type order, so a
    // core lookup is one multiply-add away.
    std::vector<uint32_t> type_map(n_types_);
    for (uint32_t ti = 0; ti < n_types_; ++ti) {
        auto gi = g.exec_type_index(topo.processor_types()[ti]);
        if (!gi)
            fail("graph carries no execution times for processor type \"" +
                 topo.processor_types()[ti] + "\"");
        type_map[ti] = *gi;
    }

    const size_t n = g.subtask_count();
    exec_by_type_.resize(n * n_types_);
    w_avg_.resize(n);
    for (uint32_t s = 0; s < n; ++s) {
        const Subtask& st = g.subtask(s);
        double sum = 0.0;
        for (uint32_t ti = 0; ti < n_types_; ++ti) {
            double secs = st.exec_time[type_map[ti]];
            exec_by_type_[s * n_types_ + ti] = secs;
            sum += secs * topo.cores_of_type(ti);
        }
        w_avg_[s] = sum / static_cast<double>(topo.core_count());
    }

    t_avg_.resize(g.task_count());
    for (uint32_t t = 0; t < g.task_count(); ++t) {
        double sum = 0.0;
        for (uint32_t s : g.task(t).subtasks) sum += w_avg_[s];
        t_avg_[t] = sum;
    }
}

Schedule Mapper::empty_schedule() const {
    Schedule s;
    s.timelines.resize(topo_.core_count());
    for (uint32_t c = 0; c < topo_.core_count(); ++c) s.timelines[c].core = c;
    s.task_core.assign(g_.task_count(), -1);
    s.by_subtask.resize(g_.subtask_count());
    s.placed_mask.assign(g_.subtask_count(), 0);
    return s;
}

RankTable Mapper::initial_ranks() const {
    RankTable rt;
    rt.rank.assign(g_.task_count(), 0.0);
    rt.ready.resize(g_.task_count());
    rt.in_ready.assign(g_.subtask_count(), 0);
    for (uint32_t s = 0; s < g_.subtask_count(); ++s) {
        if (g_.chain_predecessor(s) || !g_.in_edges(s).empty()) continue;
        uint32_t t = g_.subtask(s).task;
        rt.in_ready[s] = 1;
        rt.ready[t].push_back(s);
        rt.rank[t] += w_avg_[s];
    }
    return rt;
}

uint32_t Mapper::select_task(const RankTable& rt) const {
    int64_t best = -1;
    for (uint32_t t = 0; t < g_.task_count(); ++t) {
        if (rt.rank[t] < 0.0) continue;
        if (best < 0) {
            best = t;
            continue;
        }
        uint32_t b = static_cast<uint32_t>(best);
        if (rt.rank[t] > rt.rank[b] ||
            (rt.rank[t] == rt.rank[b] &&
             (t_avg_[t] < t_avg_[b] ||
              (t_avg_[t] == t_avg_[b] && g_.task(t).id < g_.task(b).id))))
            best = t;
    }
    if (best < 0) fail("select_task called with every task assigned");
    return static_cast<uint32_t>(best);
}

bool Mapper::ready_now(const Schedule& sched, uint32_t subtask) const {
    if (auto chain = g_.chain_predecessor(subtask))
        if (!sched.placed_mask[*chain]) return false;
    for (uint32_t e : g_.in_edges(subtask))
        if (!sched.placed_mask[g_.edge(e).src]) return false;
    return true;
}

double Mapper::earliest_start(const Schedule& sched, uint32_t subtask, uint32_t core) const {
    double earliest = 0.0;
    if (auto chain = g_.chain_predecessor(subtask))
        earliest = sched.by_subtask[*chain].finish;
    for (uint32_t e : g_.in_edges(subtask)) {
        const CommEdge& edge = g_.edge(e);
        const Placement& src = sched.by_subtask[edge.src];
        double arrival = src.finish + topo_.comm_cost(src.core, core, edge.volume_bytes);
        earliest = std::max(earliest, arrival);
    }
    return earliest;
}

Mapper::Slot Mapper::find_slot(const CoreTimeline& line, double earliest,
                               double duration) const {
    double prev_finish = 0.0;
    for (size_t i = 0; i < line.placed.size(); ++i) {
        double cand = std::max(earliest, prev_finish);
        if (cand + duration <= line.placed[i].start + kTimeTolerance) return {i, cand};
        prev_finish = line.placed[i].finish;
    }
    return {line.placed.size(), std::max(earliest, prev_finish)};
}

void Mapper::place_one(Schedule& sched, uint32_t subtask, uint32_t core,
                       std::vector<uint32_t>& newly_placed) const {
    CoreTimeline& line = sched.timelines[core];
    const double duration = exec_on(subtask, core);
    Slot slot = find_slot(line, earliest_start(sched, subtask, core), duration);

    Placement p{subtask, core, slot.start, slot.start + duration};
    if (slot.position > 0 &&
        p.start < line.placed[slot.position - 1].finish - kTimeTolerance)
        fail("internal: placement overlaps its left neighbor");
    if (slot.position < line.placed.size() &&
        p.finish > line.placed[slot.position].start + kTimeTolerance)
        fail("internal: placement overlaps its right neighbor");

    line.placed.insert(line.placed.begin() + static_cast<ptrdiff_t>(slot.position), p);
    sched.by_subtask[subtask] = p;
    sched.placed_mask[subtask] = 1;
    ++sched.placed_count;
    sched.t_est = std::max(sched.t_est, p.finish);
    newly_placed.push_back(subtask);
}

void Mapper::cascade(Schedule& sched, std::vector<uint32_t>& newly_placed) const {
    bool progress = true;
    while (progress) {
        progress = false;
        for (CoreTimeline& line : sched.timelines) {
            for (size_t k = 0; k < line.pending.size(); ++k) {
                uint32_t s = line.pending[k];
                if (!ready_now(sched, s)) continue;
                line.pending.erase(line.pending.begin() + static_cast<ptrdiff_t>(k));
                --sched.pending_count;
                place_one(sched, s, line.core, newly_placed);
                progress = true;
                break;
            }
            if (progress) break;
        }
    }
}

void Mapper::place_task(Schedule& sched, uint32_t task, uint32_t core,
                        std::vector<uint32_t>& newly_placed) const {
    CoreTimeline& line = sched.timelines[core];
    bool blocked = false;
    for (uint32_t s : g_.task(task).subtasks) {
        if (!blocked && ready_now(sched, s)) {
            place_one(sched, s, core, newly_placed);
            cascade(sched, newly_placed);
        } else {
            blocked = true;
            line.pending.push_back(s);
            ++sched.pending_count;
        }
    }
}

Mapper::CoreScore Mapper::score_core(const Schedule& sched, uint32_t task,
                                     uint32_t core) const {
    scratch_ = sched;
    std::vector<uint32_t> newly;
    scratch_.task_core[task] = static_cast<int32_t>(core);
    place_task(scratch_, task, core, newly);

    CoreScore out;
    uint32_t last = g_.task(task).subtasks.back();
    if (scratch_.placed_mask[last]) {
        out.tp = scratch_.by_subtask[last].finish;
        out.blocked_case = false;
    } else {
        const CoreTimeline& line = scratch_.timelines[core];
        double end = line.placed.empty() ? 0.0 : line.placed.back().finish;
        double backlog = 0.0;
        for (uint32_t s : line.pending) backlog += exec_on(s, core);
        out.tp = end + backlog;
        out.blocked_case = true;
    }
    return out;
}

uint32_t Mapper::choose_core(const Schedule& sched, uint32_t task,
                             CoreScore* score_out) const {
    uint32_t best = 0;
    CoreScore best_score = score_core(sched, task, 0);
    for (uint32_t c = 1; c < topo_.core_count(); ++c) {
        CoreScore cs = score_core(sched, task, c);
        if (cs.tp < best_score.tp ||
            (cs.tp == best_score.tp && topo_.core(c).id < topo_.core(best).id)) {
            best = c;
            best_score = cs;
        }
    }
    if (score_out) *score_out = best_score;
    return best;
}

void Mapper::assign_task(Schedule& sched, RankTable& rt, uint32_t task, uint32_t core,
                         std::vector<uint32_t>* newly_placed) const {
    std::vector<uint32_t> local;
    std::vector<uint32_t>& newly = newly_placed ? *newly_placed : local;
    const size_t first = newly.size();
    sched.task_core[task] = static_cast<int32_t>(core);
    place_task(sched, task, core, newly);
    update_ranks(rt, sched, {newly.data() + first, newly.size() - first}, task);
}

void Mapper::update_ranks(RankTable& rt, const Schedule& sched,
                          std::span<const uint32_t> newly_placed,
                          uint32_t assigned_task) const {
    rt.rank[assigned_task] = -1.0;
    for (uint32_t placed : newly_placed) {
        for (uint32_t succ : g_.successors(placed)) {
            uint32_t t = g_.subtask(succ).task;
            if (rt.rank[t] < 0.0 || rt.in_ready[succ]) continue;
            if (!ready_now(sched, succ)) continue;
            rt.in_ready[succ] = 1;
            rt.ready[t].push_back(succ);
            rt.rank[t] += w_avg_[succ];
        }
    }
}

Schedule Mapper::run(const MapHook& hook) const {
    Schedule sched = empty_schedule();
    RankTable rt = initial_ranks();
    for (uint32_t iter = 0; iter < g_.task_count(); ++iter) {
        uint32_t task = select_task(rt);
        CoreScore score;
        uint32_t core = choose_core(sched, task, &score);
        MapStep step;
        step.iteration = iter;
        step.task = task;
        step.core = core;
        step.tp = score.tp;
        step.blocked_case = score.blocked_case;
        assign_task(sched, rt, task, core, &step.newly_placed);
        if (hook) hook(step, sched, rt);
    }
    if (!sched.complete(g_)) fail("internal: mapping finished with unplaced subtasks");
    return sched;
}

Schedule map_tasks(const ApplicationGraph& g, const Topology& topo, const MapHook& hook) {
    return Mapper(g, topo).run(hook);
}

jdoc schedule_to_json(const Schedule& s, const ApplicationGraph& g, const Topology& topo) {
    jdoc doc;
    doc["t_est_s"] = s.t_est;
    jdoc assign;
    for (uint32_t t = 0; t < g.task_count(); ++t) {
        if (s.task_core[t] < 0) fail("cannot serialize a schedule with unassigned tasks");
        assign[g.task(t).id] = topo.core(static_cast<uint32_t>(s.task_core[t])).id;
    }
    doc["task_assignment"] = std::move(assign);
    jdoc timelines = jdoc::array();
    for (const CoreTimeline& line : s.timelines) {
        jdoc lnode;
        lnode["core"] = topo.core(line.core).id;
        jdoc placements = jdoc::array();
        for (const Placement& p : line.placed) {
            jdoc pnode;
            pnode["subtask"] = g.subtask(p.subtask).id;
            pnode["start_s"] = p.start;
            pnode["finish_s"] = p.finish;
            placements.push_back(std::move(pnode));
        }
        lnode["placements"] = std::move(placements);
        timelines.push_back(std::move(lnode));
    }
    doc["timelines"] = std::move(timelines);
    return doc;
}

Schedule schedule_from_json(const jdoc& doc, const ApplicationGraph& g,
                            const Topology& topo) {
    if (!doc.is_object() || !doc.contains("t_est_s") || !doc.contains("task_assignment") ||
        !doc.contains("timelines"))
        fail("schedule document needs t_est_s, task_assignment and timelines");

    Schedule s;
    s.timelines.resize(topo.core_count());
    for (uint32_t c = 0; c < topo.core_count(); ++c) s.timelines[c].core = c;
    s.task_core.assign(g.task_count(), -1);
    s.by_subtask.resize(g.subtask_count());
    s.placed_mask.assign(g.subtask_count(), 0);
    s.t_est = doc["t_est_s"].get<double>();

    for (auto it = doc["task_assignment"].begin(); it != doc["task_assignment"].end(); ++it) {
        auto t = g.task_index(it.key());
        if (!t) fail("task_assignment names unknown task \"" + it.key() + "\"");
        auto c = topo.core_index(it.value().get<std::string>());
        if (!c)
            fail("task_assignment names unknown core \"" + it.value().get<std::string>() +
                 "\"");
        s.task_core[*t] = static_cast<int32_t>(*c);
    }
    for (uint32_t t = 0; t < g.task_count(); ++t)
        if (s.task_core[t] < 0) fail("task \"" + g.task(t).id + "\" has no assignment");

    for (const jdoc& lnode : doc["timelines"]) {
        auto c = topo.core_index(lnode["core"].get<std::string>());
        if (!c) fail("timeline names unknown core \"" + lnode["core"].get<std::string>() + "\"");
        CoreTimeline& line = s.timelines[*c];
        for (const jdoc& pnode : lnode["placements"]) {
            uint32_t sub = g.require_subtask(pnode["subtask"].get<std::string>());
            if (s.placed_mask[sub])
                fail("subtask \"" + g.subtask(sub).id + "\" placed twice");
            if (s.task_core[g.subtask(sub).task] != static_cast<int32_t>(*c))
                fail("subtask \"" + g.subtask(sub).id +
                     "\" placed off its task's assigned core");
            Placement p{sub, *c, pnode["start_s"].get<double>(),
                        pnode["finish_s"].get<double>()};
            line.placed.push_back(p);
            s.by_subtask[sub] = p;
            s.placed_mask[sub] = 1;
            ++s.placed_count;
        }
    }
    if (!s.complete(g)) fail("schedule document leaves subtasks unplaced");
    return s;
}

} // namespace taskmap
