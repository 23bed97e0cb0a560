#include "taskmap/batch.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/oracle.hpp"
#include "taskmap/rng.hpp"
#include "taskmap/validate.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("cli", msg); }

constexpr uint32_t kMaxRedraws = 1000;

// JSON-style shortest round-trip rendering, shared by CSV and reports.
std::string number(double v) { return jdoc(v).dump(); }

InstanceResult run_instance(uint32_t instance_id, const WorkloadSpec& spec,
                            const Topology& topo, const BatchOptions& opt) {
    WorkloadSpec local = spec;
    InstanceResult row;
    row.instance_id = instance_id;

    std::optional<ApplicationGraph> g;
    // Attempt k draws seed base + id + k*runs: unique per (instance, attempt)
    // and independent of scheduling order.
    for (uint32_t k = 0; k <= kMaxRedraws && !g; ++k) {
        local.seed = opt.base_seed + instance_id + static_cast<uint64_t>(k) * opt.runs;
        ApplicationGraph candidate = generate(local, topo);
        double grain = grain_ratio(candidate, topo);
        if (opt.min_grain_ratio > 0.0 && grain < opt.min_grain_ratio) continue;
        g.emplace(std::move(candidate));
        row.seed = local.seed;
        row.grain = grain;
    }
    if (!g)
        fail("instance " + std::to_string(instance_id) + " found no draw with grain ratio >= " +
             number(opt.min_grain_ratio) + " in " + std::to_string(kMaxRedraws) + " attempts");

    row.tasks = static_cast<uint32_t>(g->task_count());
    row.subtasks = static_cast<uint32_t>(g->subtask_count());
    row.edges = static_cast<uint32_t>(g->edge_count());

    Schedule sched = Mapper(*g, topo).run();
    if (opt.validate) {
        ValidationReport rep = validate_schedule(sched, *g, topo);
        if (!rep.ok())
            fail("instance " + std::to_string(instance_id) + " schedule invalid: " +
                 rep.joined());
    }
    SimulationResult sim = simulate(sched, *g, topo, opt.contention);

    row.t_est_s = sched.t_est;
    row.t_exec_s = sim.t_exec;
    row.dif_rel_pct = dif_rel_pct(sim.t_exec, sched.t_est);
    return row;
}

std::vector<InstanceResult> run_all(const WorkloadSpec& spec, const Topology& topo,
                                    const BatchOptions& opt, bool parallel) {
    spec.validate();
    if (opt.runs == 0) fail("evaluate needs at least one run");

    std::vector<InstanceResult> rows(opt.runs);
    std::vector<std::string> errors(opt.runs);

    if (parallel) {
#ifdef _OPENMP
        int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (int64_t i = 0; i < static_cast<int64_t>(opt.runs); ++i) {
            try {
                rows[static_cast<size_t>(i)] =
                    run_instance(static_cast<uint32_t>(i), spec, topo, opt);
            } catch (const std::exception& e) {
                errors[static_cast<size_t>(i)] = e.what();
            }
        }
        for (const std::string& err : errors)
            if (!err.empty()) throw ValidationError("cli", err);
        return rows;
#endif
    }
    for (uint32_t i = 0; i < opt.runs; ++i) rows[i] = run_instance(i, spec, topo, opt);
    return rows;
}

} // namespace

std::vector<InstanceResult> run_batch(const WorkloadSpec& spec, const Topology& topo,
                                      const BatchOptions& opt) {
    return run_all(spec, topo, opt, true);
}

std::vector<InstanceResult> run_batch_serial(const WorkloadSpec& spec, const Topology& topo,
                                             const BatchOptions& opt) {
    return run_all(spec, topo, opt, false);
}

Summary summarize_dif(const std::vector<InstanceResult>& rows) {
    Summary s;
    s.count = static_cast<uint32_t>(rows.size());
    if (rows.empty()) return s;
    double sum = 0.0;
    for (const InstanceResult& r : rows) {
        sum += r.dif_rel_pct;
        s.max = std::max(s.max, r.dif_rel_pct);
    }
    s.mean = sum / s.count;
    double var = 0.0;
    for (const InstanceResult& r : rows)
        var += (r.dif_rel_pct - s.mean) * (r.dif_rel_pct - s.mean);
    s.stddev = std::sqrt(var / s.count);
    return s;
}

std::string rows_to_csv(const std::vector<InstanceResult>& rows, uint32_t cores,
                        Contention contention) {
    std::ostringstream os;
    os << "instance_id,tasks,cores,contention_mode,t_est_s,t_exec_s,dif_rel_pct\n";
    for (const InstanceResult& r : rows)
        os << r.instance_id << ',' << r.tasks << ',' << cores << ',' << to_string(contention)
           << ',' << number(r.t_est_s) << ',' << number(r.t_exec_s) << ','
           << number(r.dif_rel_pct) << '\n';
    return os.str();
}

jdoc make_report(const WorkloadSpec& spec, const Topology& topo, const BatchOptions& opt,
                 const std::vector<InstanceResult>& rows) {
    jdoc doc;
    jdoc config;
    config["spec"] = spec.to_json();
    config["spec"].erase("seed");
    std::ostringstream hash;
    hash << "0x" << std::hex << topo.content_hash();
    config["topology_hash"] = hash.str();
    config["cores"] = topo.core_count();
    config["contention"] = to_string(opt.contention);
    config["runs"] = opt.runs;
    config["base_seed"] = opt.base_seed;
    config["min_grain_ratio"] = opt.min_grain_ratio;
    doc["config"] = std::move(config);

    jdoc out_rows = jdoc::array();
    for (const InstanceResult& r : rows) {
        jdoc row;
        row["instance_id"] = r.instance_id;
        row["seed"] = r.seed;
        row["tasks"] = r.tasks;
        row["subtasks"] = r.subtasks;
        row["edges"] = r.edges;
        if (std::isinf(r.grain))
            row["grain_ratio"] = "inf";
        else
            row["grain_ratio"] = r.grain;
        row["t_est_s"] = r.t_est_s;
        row["t_exec_s"] = r.t_exec_s;
        row["dif_rel_pct"] = r.dif_rel_pct;
        out_rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(out_rows);

    Summary s = summarize_dif(rows);
    jdoc summary;
    summary["count"] = s.count;
    summary["mean_dif_rel_pct"] = s.mean;
    summary["max_dif_rel_pct"] = s.max;
    summary["stddev_dif_rel_pct"] = s.stddev;
    doc["summary"] = std::move(summary);
    return doc;
}

Topology tiny_topology(uint32_t n_cores, const std::string& variant) {
    if (n_cores == 0) fail("tiny_topology needs at least one core");
    jdoc doc;
    if (variant == "uniform")
        doc["processor_types"] = {"fast"};
    else if (variant == "mixed")
        doc["processor_types"] = {"fast", "slow"};
    else
        fail("unknown tiny_topology variant \"" + variant + "\"");
    jdoc children = jdoc::array();
    for (uint32_t c = 0; c < n_cores; ++c) {
        jdoc core;
        core["id"] = "c" + std::to_string(c);
        core["core"] = true;
        core["processor_type"] = (variant == "mixed" && c % 2 == 1) ? "slow" : "fast";
        children.push_back(std::move(core));
    }
    jdoc root;
    root["id"] = "mem";
    root["kind"] = "shared_memory";
    root["bandwidth_Bps"] = 2000.0;
    root["latency_s"] = 0.01;
    root["children"] = std::move(children);
    doc["root"] = std::move(root);
    return Topology::from_json(doc);
}

std::vector<VerifyTrial> run_verify(const VerifyOptions& opt) {
    if (opt.trials == 0) fail("verify needs at least one trial");
    if (opt.max_tasks == 0 || opt.max_cores == 0 || opt.max_subtasks_per_task == 0)
        fail("verify caps must be at least 1");

    SplitMix64 rng(opt.seed);
    std::vector<VerifyTrial> trials;
    trials.reserve(opt.trials);

    OracleLimits limits;
    limits.max_tasks = opt.max_tasks;
    limits.max_cores = opt.max_cores;
    limits.max_subtasks = opt.max_tasks * opt.max_subtasks_per_task;

    for (uint32_t k = 0; k < opt.trials; ++k) {
        VerifyTrial trial;
        trial.tasks = static_cast<uint32_t>(rng.uniform_u64(1, opt.max_tasks));
        trial.cores = static_cast<uint32_t>(rng.uniform_u64(1, opt.max_cores));
        bool mixed = trial.cores > 1 && rng.next() % 2 == 0;
        trial.seed = rng.next();

        Topology topo = tiny_topology(trial.cores, mixed ? "mixed" : "uniform");
        WorkloadSpec spec;
        spec.n_tasks = {trial.tasks, trial.tasks};
        spec.subtasks_per_task = {1, opt.max_subtasks_per_task};
        spec.task_time_s = {1.0, 10.0};
        spec.comm_volume_bytes = {100, 5000};
        spec.comm_probability_pct = {10.0, 50.0};
        if (mixed) spec.heterogeneity["slow"] = 2.0;
        spec.seed = trial.seed;

        ApplicationGraph g = generate(spec, topo);
        Schedule sched = Mapper(g, topo).run();
        trial.t_est = sched.t_est;

        std::ostringstream problems;
        ValidationReport rep = validate_schedule(sched, g, topo);
        if (!rep.ok()) problems << "schedule invalid: " << rep.joined();

        OracleResult oracle = opt.threads == 1 ? optimal_schedule_serial(g, topo, limits)
                                               : optimal_schedule(g, topo, limits);
        trial.optimal = oracle.optimal_makespan;
        trial.exhaustive = oracle.exhaustive;
        if (!oracle.exhaustive) problems << (problems.str().empty() ? "" : "; ") << "search cut by node budget";
        if (sched.t_est < oracle.optimal_makespan - 1e-9)
            problems << (problems.str().empty() ? "" : "; ") << "estimate "
                     << number(sched.t_est) << " beats the optimum "
                     << number(oracle.optimal_makespan);

        SimulationResult sim = simulate(sched, g, topo, Contention::None);
        trial.replayed = sim.t_exec;
        if (std::abs(sim.t_exec - sched.t_est) > 1e-9)
            problems << (problems.str().empty() ? "" : "; ") << "replay " << number(sim.t_exec)
                     << " differs from estimate " << number(sched.t_est);

        trial.problem = problems.str();
        trial.ok = trial.problem.empty();
        trials.push_back(std::move(trial));
    }
    return trials;
}

} // namespace taskmap
