#include "taskmap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("simulator", msg); }

// Queue entry kinds; finishes drain before same-time arrivals so that every
// transfer requested at time t is visible before the level hands out its
// next slot at t.
enum EventKind : uint32_t { kFinish = 0, kArrive = 1 };

struct Event {
    double time;
    uint32_t kind;
    uint32_t payload; // subtask for kFinish, edge for kArrive
    bool operator>(const Event& other) const {
        if (time != other.time) return time > other.time;
        if (kind != other.kind) return kind > other.kind;
        return payload > other.payload;
    }
};

struct LevelQueue {
    double busy_until = 0.0;
    // (request time, edge index); served one at a time in this order.
    std::priority_queue<std::pair<double, uint32_t>, std::vector<std::pair<double, uint32_t>>,
                        std::greater<>>
        waiting;
};

} // namespace

const char* to_string(Contention c) {
    return c == Contention::None ? "none" : "serialize-per-level";
}

Contention contention_from_string(const std::string& name) {
    if (name == "none") return Contention::None;
    if (name == "serialize-per-level") return Contention::SerializePerLevel;
    fail("unknown contention mode \"" + name + "\" (expected none or serialize-per-level)");
}

double dif_rel_pct(double t_exec, double t_est) {
    if (!(t_exec > 0.0)) fail("dif_rel needs a positive t_exec");
    return (t_exec - t_est) / t_exec * 100.0;
}

SimulationResult simulate(const Schedule& s, const ApplicationGraph& g,
                          const Topology& topo, Contention contention) {
    if (!s.complete(g)) fail("schedule is incomplete");

    const size_t n_sub = g.subtask_count();
    const size_t n_cores = topo.core_count();

    // Dispatch order per core comes from the schedule's timelines.
    std::vector<std::vector<uint32_t>> order(n_cores);
    std::vector<uint32_t> core_of(n_sub);
    for (size_t c = 0; c < n_cores; ++c) {
        order[c].reserve(s.timelines[c].placed.size());
        for (const Placement& p : s.timelines[c].placed) {
            order[c].push_back(p.subtask);
            core_of[p.subtask] = static_cast<uint32_t>(c);
        }
    }

    std::vector<uint32_t> deps_left(n_sub, 0);
    std::vector<double> dep_time(n_sub, 0.0); // latest dependency satisfaction
    for (uint32_t st = 0; st < n_sub; ++st) {
        if (g.chain_predecessor(st)) ++deps_left[st];
        deps_left[st] += static_cast<uint32_t>(g.in_edges(st).size());
    }

    // Per-topology-type graph time index, resolved once.
    std::vector<uint32_t> type_map(topo.processor_types().size());
    for (size_t ti = 0; ti < type_map.size(); ++ti) {
        auto gi = g.exec_type_index(topo.processor_types()[ti]);
        if (!gi)
            fail("graph carries no execution times for processor type \"" +
                 topo.processor_types()[ti] + "\"");
        type_map[ti] = *gi;
    }

    SimulationResult result;
    result.contention = contention;
    result.by_subtask.resize(n_sub);
    result.transfers.resize(g.edge_count());
    for (uint32_t ei = 0; ei < g.edge_count(); ++ei) result.transfers[ei].edge = ei;

    std::vector<uint8_t> started(n_sub, 0);
    std::vector<uint8_t> finished(n_sub, 0);
    std::vector<size_t> cursor(n_cores, 0);
    std::vector<double> core_free(n_cores, 0.0);
    std::vector<LevelQueue> levels(topo.level_count());

    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    uint32_t started_count = 0;

    auto try_advance = [&](uint32_t c) {
        while (cursor[c] < order[c].size()) {
            uint32_t st = order[c][cursor[c]];
            if (deps_left[st] != 0) return;
            double exec = g.subtask(st).exec_time[type_map[topo.core(c).type_index]];
            double start = std::max(core_free[c], dep_time[st]);
            result.by_subtask[st] = {st, c, start, start + exec};
            started[st] = 1;
            ++started_count;
            core_free[c] = start + exec;
            events.push({start + exec, kFinish, st});
            ++cursor[c];
        }
    };

    auto kick_level = [&](uint32_t li, double now) {
        LevelQueue& lq = levels[li];
        if (lq.busy_until > now || lq.waiting.empty()) return;
        auto [req_time, edge] = lq.waiting.top();
        lq.waiting.pop();
        const CommEdge& e = g.edge(edge);
        double cost = topo.comm_cost(core_of[e.src], core_of[e.dst], e.volume_bytes);
        double begin = std::max(lq.busy_until, req_time);
        lq.busy_until = begin + cost;
        result.transfers[edge].begin = begin;
        result.transfers[edge].arrive = begin + cost;
        events.push({begin + cost, kArrive, edge});
    };

    auto satisfy = [&](uint32_t st, double when) {
        dep_time[st] = std::max(dep_time[st], when);
        if (--deps_left[st] == 0) try_advance(core_of[st]);
    };

    for (uint32_t c = 0; c < n_cores; ++c) try_advance(c);

    while (!events.empty()) {
        Event ev = events.top();
        events.pop();
        if (ev.kind == kFinish) {
            uint32_t st = ev.payload;
            finished[st] = 1;
            if (auto chain = g.chain_successor(st)) satisfy(*chain, ev.time);
            for (uint32_t ei : g.out_edges(st)) {
                const CommEdge& e = g.edge(ei);
                result.transfers[ei].depart = ev.time;
                if (core_of[e.src] == core_of[e.dst]) {
                    result.transfers[ei].begin = ev.time;
                    result.transfers[ei].arrive = ev.time;
                    satisfy(e.dst, ev.time);
                } else if (contention == Contention::None) {
                    double cost = topo.comm_cost(core_of[e.src], core_of[e.dst], e.volume_bytes);
                    result.transfers[ei].begin = ev.time;
                    result.transfers[ei].arrive = ev.time + cost;
                    events.push({ev.time + cost, kArrive, ei});
                } else {
                    uint32_t li =
                        static_cast<uint32_t>(topo.common_level(core_of[e.src], core_of[e.dst]));
                    levels[li].waiting.push({ev.time, ei});
                    kick_level(li, ev.time);
                }
            }
        } else {
            uint32_t ei = ev.payload;
            const CommEdge& e = g.edge(ei);
            satisfy(e.dst, ev.time);
            if (contention == Contention::SerializePerLevel) {
                uint32_t li =
                    static_cast<uint32_t>(topo.common_level(core_of[e.src], core_of[e.dst]));
                kick_level(li, ev.time);
            }
        }
    }

    if (started_count != n_sub) {
        // Every stuck subtask waits on another unstarted one (an unfinished
        // predecessor, or the subtask queued before it on its core); follow
        // that relation until it revisits a node and report the loop.
        std::vector<int32_t> waits(n_sub, -1);
        for (uint32_t c = 0; c < n_cores; ++c) {
            if (cursor[c] >= order[c].size()) continue;
            for (size_t k = cursor[c]; k < order[c].size(); ++k) {
                uint32_t st = order[c][k];
                if (k > cursor[c]) {
                    waits[st] = static_cast<int32_t>(order[c][k - 1]);
                    continue;
                }
                if (auto chain = g.chain_predecessor(st); chain && !finished[*chain])
                    waits[st] = static_cast<int32_t>(*chain);
                else
                    for (uint32_t ei : g.in_edges(st))
                        if (!started[g.edge(ei).src]) {
                            waits[st] = static_cast<int32_t>(g.edge(ei).src);
                            break;
                        }
            }
        }
        uint32_t cur = 0;
        while (started[cur]) ++cur;
        std::vector<uint8_t> seen(n_sub, 0);
        while (!seen[cur] && waits[cur] >= 0) {
            seen[cur] = 1;
            cur = static_cast<uint32_t>(waits[cur]);
        }
        std::vector<std::string> loop{g.subtask(cur).id};
        for (uint32_t st = static_cast<uint32_t>(waits[cur]); st != cur && waits[st] >= 0;
             st = static_cast<uint32_t>(waits[st]))
            loop.push_back(g.subtask(st).id);
        std::ostringstream os;
        os << "replay deadlock through:";
        for (auto it = loop.rbegin(); it != loop.rend(); ++it) os << ' ' << *it;
        fail(os.str());
    }

    double t_exec = 0.0;
    for (const SimPlacement& p : result.by_subtask) t_exec = std::max(t_exec, p.finish);
    result.t_exec = t_exec;
    return result;
}

jdoc result_to_json(const SimulationResult& r, const Schedule& s,
                    const ApplicationGraph& g, const Topology& topo) {
    jdoc doc;
    doc["contention"] = to_string(r.contention);
    doc["t_est_s"] = s.t_est;
    doc["t_exec_s"] = r.t_exec;
    doc["dif_rel_pct"] = dif_rel_pct(r.t_exec, s.t_est);
    jdoc placements = jdoc::array();
    for (const SimPlacement& p : r.by_subtask) {
        jdoc pnode;
        pnode["subtask"] = g.subtask(p.subtask).id;
        pnode["core"] = topo.core(p.core).id;
        pnode["start_s"] = p.start;
        pnode["finish_s"] = p.finish;
        placements.push_back(std::move(pnode));
    }
    doc["placements"] = std::move(placements);
    jdoc transfers = jdoc::array();
    for (const SimTransfer& t : r.transfers) {
        const CommEdge& e = g.edge(t.edge);
        jdoc tnode;
        tnode["src"] = g.subtask(e.src).id;
        tnode["dst"] = g.subtask(e.dst).id;
        tnode["depart_s"] = t.depart;
        tnode["begin_s"] = t.begin;
        tnode["arrive_s"] = t.arrive;
        transfers.push_back(std::move(tnode));
    }
    doc["transfers"] = std::move(transfers);
    return doc;
}

} // namespace taskmap
