#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "taskmap/graph.hpp"
#include "taskmap/rng.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// Closed ranges for workload sampling. lo == hi pins the value.
struct IntRange {
    uint64_t lo = 0;
    uint64_t hi = 0;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Parameters of a synthetic workload family. heterogeneity maps a processor
// type name to a per-type execution-time multiplier; types present in the
// target machine but absent here default to 1.0.
struct WorkloadSpec {
    IntRange n_tasks{15, 25};
    IntRange subtasks_per_task{3, 6};
    Range task_time_s{5.0, 50.0};
    IntRange comm_volume_bytes{1000, 10000};
    Range comm_probability_pct{5.0, 35.0};
    std::map<std::string, double> heterogeneity;
    uint64_t seed = 1;

    void validate() const; // throws ValidationError on bad ranges
    static WorkloadSpec from_json(const jdoc& doc);
    static WorkloadSpec load_file(const std::string& path);
    jdoc to_json() const;
};

// Draws one application from the spec, deterministically in (spec, topo).
// Tasks get uniformly many subtasks; each task's total time is split across
// its subtasks by sorted uniform cuts; per-type times scale the split by the
// heterogeneity multiplier. Directed edges go from lower to higher task ids
// (graphs are acyclic by construction) between uniformly chosen subtasks,
// each ordered task pair independently with the drawn probability.
ApplicationGraph generate(const WorkloadSpec& spec, const Topology& topo);

// Ratio of total average computation to total average pairwise transfer
// cost. +inf when the graph has no edges. Higher means coarser grain.
double grain_ratio(const ApplicationGraph& g, const Topology& topo);

} // namespace taskmap
