#pragma once

#include <cstdint>
#include <vector>

#include "taskmap/graph.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// Size guards for exhaustive search. Exceeding a structural cap throws;
// exceeding max_nodes stops the search and marks the result inexact.
struct OracleLimits {
    uint32_t max_tasks = 5;
    uint32_t max_cores = 3;
    uint32_t max_subtasks = 12;
    uint64_t max_nodes = 5'000'000;
};

struct OracleResult {
    double optimal_makespan = 0.0;
    std::vector<uint32_t> task_core;   // best assignment found
    uint64_t assignments_explored = 0; // task->core combinations fully searched
    uint64_t nodes_explored = 0;       // dispatch states visited
    bool exhaustive = true;            // false when max_nodes cut the search
};

// Minimum makespan over every task->core assignment and every dependency-
// respecting dispatch order, with each subtask started as early as its core
// and its predecessors (plus transfer delay) allow. Search is branch and
// bound with dominance pruning; with OpenMP available, assignments are
// searched in parallel and merged deterministically.
OracleResult optimal_schedule(const ApplicationGraph& g, const Topology& topo,
                              const OracleLimits& limits = {});

// Single-threaded reference of the same search; used to cross-check the
// parallel path.
OracleResult optimal_schedule_serial(const ApplicationGraph& g, const Topology& topo,
                                     const OracleLimits& limits = {});

} // namespace taskmap
