#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taskmap/generator.hpp"
#include "taskmap/simulator.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// One generated-mapped-replayed instance.
struct InstanceResult {
    uint32_t instance_id = 0;
    uint64_t seed = 0;
    uint32_t tasks = 0;
    uint32_t subtasks = 0;
    uint32_t edges = 0;
    double grain = 0.0; // +inf when the instance has no edges
    double t_est_s = 0.0;
    double t_exec_s = 0.0;
    double dif_rel_pct = 0.0;
};

struct BatchOptions {
    uint32_t runs = 10;
    uint64_t base_seed = 1;
    Contention contention = Contention::SerializePerLevel;
    // Instances below this computation-to-communication ratio are redrawn
    // (with a fresh seed); 0 disables the filter.
    double min_grain_ratio = 0.0;
    int threads = 0; // 0 = library default
    bool validate = false;
};

// Instance seeds are base_seed + instance_id; redraws continue from
// base_seed + runs upward so results never depend on thread count.
std::vector<InstanceResult> run_batch(const WorkloadSpec& spec, const Topology& topo,
                                      const BatchOptions& opt);
std::vector<InstanceResult> run_batch_serial(const WorkloadSpec& spec,
                                             const Topology& topo,
                                             const BatchOptions& opt);

struct Summary {
    uint32_t count = 0;
    double mean = 0.0;
    double max = 0.0;
    double stddev = 0.0; // population
};

Summary summarize_dif(const std::vector<InstanceResult>& rows);

// CSV with the fixed header
// instance_id,tasks,cores,contention_mode,t_est_s,t_exec_s,dif_rel_pct
std::string rows_to_csv(const std::vector<InstanceResult>& rows, uint32_t cores,
                        Contention contention);

jdoc make_report(const WorkloadSpec& spec, const Topology& topo,
                 const BatchOptions& opt, const std::vector<InstanceResult>& rows);

// Randomized cross-check of the mapper against exhaustive search on small
// instances: the mapper's estimate must never beat the true optimum, and the
// replay without contention must reproduce the estimate.
struct VerifyTrial {
    uint64_t seed = 0;
    uint32_t tasks = 0;
    uint32_t cores = 0;
    double t_est = 0.0;
    double optimal = 0.0;
    double replayed = 0.0;
    bool exhaustive = true;
    bool ok = false;
    std::string problem; // empty when ok
};

struct VerifyOptions {
    uint32_t trials = 50;
    uint64_t seed = 7;
    uint32_t max_tasks = 4;
    uint32_t max_cores = 3;
    uint32_t max_subtasks_per_task = 3;
    int threads = 0;
};

std::vector<VerifyTrial> run_verify(const VerifyOptions& opt);

// Small machine used by randomized tests: n_cores leaves under one shared
// level, types alternating between a fast and a slow profile when variant
// is "mixed", all identical when "uniform".
Topology tiny_topology(uint32_t n_cores, const std::string& variant = "mixed");

} // namespace taskmap
