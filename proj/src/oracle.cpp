#include "taskmap/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("oracle", msg); }

struct Pred {
    uint32_t subtask;
    uint64_t volume; // 0 for the in-task chain link
};

// Exhaustive search over one fixed task->core assignment: depth-first over
// dependency-respecting dispatch orders, each dispatched subtask starting as
// early as its core and predecessors allow. Earlier starts never hurt (every
// constraint is a lower bound), so the minimum over these orders is the
// assignment's true optimal makespan.
struct AssignmentSearch {
    const ApplicationGraph& g;
    const Topology& topo;
    const std::vector<std::vector<Pred>>& preds;
    const std::vector<uint64_t>& pred_mask;
    const std::vector<double>& exec; // subtask x core
    const std::vector<uint32_t>& core_of;
    size_t n_sub;
    size_t n_cores;

    std::atomic<uint64_t>& nodes;
    uint64_t node_cap;
    bool cut = false;

    double best; // per-assignment incumbent; pruning is strict so ties survive
    double found = std::numeric_limits<double>::infinity();

    std::vector<double> finish;
    std::vector<double> frontier;
    std::vector<double> remaining; // per core, exec sum of undispatched subtasks
    std::unordered_map<uint64_t, std::vector<std::vector<double>>> fronts;

    AssignmentSearch(const ApplicationGraph& g_, const Topology& topo_,
                     const std::vector<std::vector<Pred>>& preds_,
                     const std::vector<uint64_t>& pred_mask_, const std::vector<double>& exec_,
                     const std::vector<uint32_t>& core_of_, std::atomic<uint64_t>& nodes_,
                     uint64_t cap, double best_so_far)
        : g(g_), topo(topo_), preds(preds_), pred_mask(pred_mask_), exec(exec_),
          core_of(core_of_), n_sub(g_.subtask_count()), n_cores(topo_.core_count()),
          nodes(nodes_), node_cap(cap), best(best_so_far) {
        finish.assign(n_sub, 0.0);
        frontier.assign(n_cores, 0.0);
        remaining.assign(n_cores, 0.0);
        for (uint32_t s = 0; s < n_sub; ++s) remaining[core_of[s]] += exec_at(s);
    }

    double exec_at(uint32_t s) const { return exec[s * n_cores + core_of[s]]; }

    bool dominated(uint64_t mask) {
        auto& front = fronts[mask];
        for (const std::vector<double>& entry : front) {
            bool covers = true;
            for (size_t i = 0; i < n_sub; ++i)
                if (entry[i] > finish[i]) {
                    covers = false;
                    break;
                }
            if (covers) return true;
        }
        front.erase(std::remove_if(front.begin(), front.end(),
                                   [&](const std::vector<double>& entry) {
                                       for (size_t i = 0; i < n_sub; ++i)
                                           if (finish[i] > entry[i]) return false;
                                       return true;
                                   }),
                    front.end());
        front.push_back(finish);
        return false;
    }

    void dfs(uint64_t mask, size_t count, double span) {
        if (cut) return;
        if (nodes.fetch_add(1, std::memory_order_relaxed) + 1 > node_cap) {
            cut = true;
            return;
        }
        if (count == n_sub) {
            if (span < found) found = span;
            if (span < best) best = span;
            return;
        }
        if (span > best) return;
        for (size_t c = 0; c < n_cores; ++c)
            if (frontier[c] + remaining[c] > best) return;
        if (dominated(mask)) return;

        for (uint32_t s = 0; s < n_sub; ++s) {
            if (mask & (1ULL << s)) continue;
            if ((pred_mask[s] & mask) != pred_mask[s]) continue;
            uint32_t c = core_of[s];
            double start = frontier[c];
            for (const Pred& p : preds[s]) {
                double ready =
                    finish[p.subtask] + topo.comm_cost(core_of[p.subtask], c, p.volume);
                start = std::max(start, ready);
            }
            double end = start + exec_at(s);

            double saved_frontier = frontier[c];
            frontier[c] = end;
            finish[s] = end;
            remaining[c] -= exec_at(s);
            dfs(mask | (1ULL << s), count + 1, std::max(span, end));
            remaining[c] += exec_at(s);
            finish[s] = 0.0;
            frontier[c] = saved_frontier;
            if (cut) return;
        }
    }
};

OracleResult search(const ApplicationGraph& g, const Topology& topo,
                    const OracleLimits& limits, bool parallel) {
    if (g.task_count() > limits.max_tasks)
        fail("instance exceeds the oracle task cap (" + std::to_string(g.task_count()) +
             " > " + std::to_string(limits.max_tasks) + ")");
    if (topo.core_count() > limits.max_cores)
        fail("instance exceeds the oracle core cap (" + std::to_string(topo.core_count()) +
             " > " + std::to_string(limits.max_cores) + ")");
    if (g.subtask_count() > limits.max_subtasks || g.subtask_count() > 63)
        fail("instance exceeds the oracle subtask cap (" +
             std::to_string(g.subtask_count()) + " > " + std::to_string(limits.max_subtasks) +
             ")");

    const size_t n_sub = g.subtask_count();
    const size_t n_cores = topo.core_count();
    const size_t n_tasks = g.task_count();

    std::vector<std::vector<Pred>> preds(n_sub);
    std::vector<uint64_t> pred_mask(n_sub, 0);
    for (uint32_t s = 0; s < n_sub; ++s) {
        if (auto chain = g.chain_predecessor(s)) {
            preds[s].push_back({*chain, 0});
            pred_mask[s] |= 1ULL << *chain;
        }
        for (uint32_t ei : g.in_edges(s)) {
            preds[s].push_back({g.edge(ei).src, g.edge(ei).volume_bytes});
            pred_mask[s] |= 1ULL << g.edge(ei).src;
        }
    }

    std::vector<double> exec(n_sub * n_cores);
    for (uint32_t s = 0; s < n_sub; ++s) {
        const Subtask& st = g.subtask(s);
        for (uint32_t c = 0; c < n_cores; ++c) {
            auto gi = g.exec_type_index(topo.processor_types()[topo.core(c).type_index]);
            if (!gi)
                fail("graph carries no execution times for processor type \"" +
                     topo.processor_types()[topo.core(c).type_index] + "\"");
            exec[s * n_cores + c] = st.exec_time[*gi];
        }
    }

    uint64_t n_assign = 1;
    for (size_t t = 0; t < n_tasks; ++t) n_assign *= n_cores;

    std::vector<double> per_assignment(n_assign, std::numeric_limits<double>::infinity());
    std::atomic<uint64_t> nodes{0};
    std::atomic<uint64_t> searched{0};
    std::atomic<bool> cut{false};

    auto run_one = [&](uint64_t a) {
        if (cut.load(std::memory_order_relaxed)) return;
        std::vector<uint32_t> task_core(n_tasks);
        std::vector<uint32_t> core_of(n_sub);
        uint64_t rest = a;
        for (size_t t = 0; t < n_tasks; ++t) {
            task_core[t] = static_cast<uint32_t>(rest % n_cores);
            rest /= n_cores;
        }
        for (uint32_t s = 0; s < n_sub; ++s) core_of[s] = task_core[g.subtask(s).task];

        AssignmentSearch as(g, topo, preds, pred_mask, exec, core_of, nodes, limits.max_nodes,
                            std::numeric_limits<double>::infinity());
        as.dfs(0, 0, 0.0);
        if (as.cut)
            cut.store(true, std::memory_order_relaxed);
        else
            searched.fetch_add(1, std::memory_order_relaxed);
        per_assignment[a] = as.found;
    };

    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (int64_t a = 0; a < static_cast<int64_t>(n_assign); ++a)
            run_one(static_cast<uint64_t>(a));
#else
        for (uint64_t a = 0; a < n_assign; ++a) run_one(a);
#endif
    } else {
        for (uint64_t a = 0; a < n_assign; ++a) run_one(a);
    }

    OracleResult result;
    result.nodes_explored = nodes.load();
    result.assignments_explored = searched.load();
    result.exhaustive = !cut.load();

    uint64_t best_index = 0;
    for (uint64_t a = 1; a < n_assign; ++a)
        if (per_assignment[a] < per_assignment[best_index]) best_index = a;
    if (!std::isfinite(per_assignment[best_index]))
        fail("search found no complete schedule (node budget too small)");

    result.optimal_makespan = per_assignment[best_index];
    result.task_core.resize(n_tasks);
    uint64_t rest = best_index;
    for (size_t t = 0; t < n_tasks; ++t) {
        result.task_core[t] = static_cast<uint32_t>(rest % n_cores);
        rest /= n_cores;
    }
    return result;
}

} // namespace

OracleResult optimal_schedule(const ApplicationGraph& g, const Topology& topo,
                              const OracleLimits& limits) {
    return search(g, topo, limits, true);
}

OracleResult optimal_schedule_serial(const ApplicationGraph& g, const Topology& topo,
                                     const OracleLimits& limits) {
    return search(g, topo, limits, false);
}

} // namespace taskmap
