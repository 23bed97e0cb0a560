#pragma once

#include <string>
#include <vector>

#include "taskmap/graph.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// Outcome of checking a schedule against the graph and machine. Empty
// problems means the schedule is feasible.
struct ValidationReport {
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
    std::string joined() const;
};

// Checks that a finished schedule is feasible:
//  - every subtask placed exactly once, on the core its task is assigned to,
//  - per-core intervals do not overlap,
//  - interval length equals the execution time on the core's type,
//  - every dependency is respected including cross-core transfer delay,
//  - t_est equals the latest finish.
// Comparisons use kTimeTolerance.
ValidationReport validate_schedule(const Schedule& s, const ApplicationGraph& g,
                                   const Topology& topo);

} // namespace taskmap
