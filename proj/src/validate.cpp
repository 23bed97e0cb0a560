#include "taskmap/validate.hpp"

#include <cmath>
#include <sstream>

namespace taskmap {

namespace {

std::string time_pair(double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << a << " vs " << b;
    return os.str();
}

} // namespace

std::string ValidationReport::joined() const {
    std::ostringstream os;
    for (size_t i = 0; i < problems.size(); ++i) {
        if (i) os << "; ";
        os << problems[i];
    }
    return os.str();
}

ValidationReport validate_schedule(const Schedule& s, const ApplicationGraph& g,
                                   const Topology& topo) {
    ValidationReport rep;
    auto note = [&](const std::string& p) { rep.problems.push_back(p); };

    if (s.task_core.size() != g.task_count() || s.by_subtask.size() != g.subtask_count() ||
        s.timelines.size() != topo.core_count()) {
        note("schedule dimensions do not match graph/topology");
        return rep;
    }
    for (const std::string& type : topo.processor_types())
        if (!g.exec_type_index(type)) {
            note("graph carries no execution times for processor type \"" + type + "\"");
            return rep;
        }

    for (uint32_t t = 0; t < g.task_count(); ++t)
        if (s.task_core[t] < 0 ||
            s.task_core[t] >= static_cast<int32_t>(topo.core_count()))
            note("task \"" + g.task(t).id + "\" has no valid core assignment");
    if (!rep.ok()) return rep;

    std::vector<uint32_t> seen(g.subtask_count(), 0);
    for (const CoreTimeline& line : s.timelines) {
        if (!line.pending.empty())
            note("core \"" + topo.core(line.core).id + "\" still has pending subtasks");
        const Placement* prev = nullptr;
        for (const Placement& p : line.placed) {
            const Subtask& st = g.subtask(p.subtask);
            ++seen[p.subtask];
            if (p.core != line.core)
                note("subtask \"" + st.id + "\" recorded on the wrong timeline");
            if (s.task_core[st.task] != static_cast<int32_t>(line.core))
                note("subtask \"" + st.id + "\" placed off its task's core");
            if (p.start < -kTimeTolerance)
                note("subtask \"" + st.id + "\" starts before time zero");
            double exec = st.exec_time[*g.exec_type_index(
                topo.processor_types()[topo.core(line.core).type_index])];
            if (std::abs(p.finish - p.start - exec) > kTimeTolerance)
                note("subtask \"" + st.id + "\" interval length differs from its execution time (" +
                     time_pair(p.finish - p.start, exec) + ")");
            if (prev && p.start < prev->finish - kTimeTolerance)
                note("subtasks \"" + g.subtask(prev->subtask).id + "\" and \"" + st.id +
                     "\" overlap on core \"" + topo.core(line.core).id + "\"");
            prev = &p;
        }
    }
    for (uint32_t st = 0; st < g.subtask_count(); ++st) {
        if (seen[st] == 0) note("subtask \"" + g.subtask(st).id + "\" never placed");
        if (seen[st] > 1) note("subtask \"" + g.subtask(st).id + "\" placed more than once");
    }
    if (!rep.ok()) return rep;

    double latest = 0.0;
    for (uint32_t st = 0; st < g.subtask_count(); ++st) {
        const Placement& p = s.by_subtask[st];
        latest = std::max(latest, p.finish);
        if (auto chain = g.chain_predecessor(st)) {
            if (p.start < s.by_subtask[*chain].finish - kTimeTolerance)
                note("subtask \"" + g.subtask(st).id + "\" starts before its in-task predecessor ends (" +
                     time_pair(p.start, s.by_subtask[*chain].finish) + ")");
        }
        for (uint32_t ei : g.in_edges(st)) {
            const CommEdge& e = g.edge(ei);
            const Placement& src = s.by_subtask[e.src];
            double arrival = src.finish + topo.comm_cost(src.core, p.core, e.volume_bytes);
            if (p.start < arrival - kTimeTolerance)
                note("subtask \"" + g.subtask(st).id + "\" starts before data from \"" +
                     g.subtask(e.src).id + "\" can arrive (" + time_pair(p.start, arrival) + ")");
        }
    }
    if (std::abs(s.t_est - latest) > kTimeTolerance)
        note("t_est differs from the latest finish (" + time_pair(s.t_est, latest) + ")");

    return rep;
}

} // namespace taskmap
