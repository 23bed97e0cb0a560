#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "taskmap/batch.hpp"
#include "taskmap/error.hpp"
#include "taskmap/generator.hpp"
#include "taskmap/graph.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/presets.hpp"
#include "taskmap/simulator.hpp"
#include "taskmap/topology.hpp"
#include "taskmap/validate.hpp"

namespace {

using namespace taskmap;

// Relative output paths land under TASKMAP_OUT_DIR when it is set.
std::filesystem::path resolve_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) return p;
    if (const char* dir = std::getenv("TASKMAP_OUT_DIR"); dir && *dir)
        return std::filesystem::path(dir) / p;
    return p;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cli", "cannot write \"" + path.string() + "\"");
    out << text;
    if (!out) throw ValidationError("cli", "write failed for \"" + path.string() + "\"");
}

void write_json(const std::filesystem::path& path, const jdoc& doc) {
    write_text(path, doc.dump(2) + "\n");
}

std::string short_number(double v) { return jdoc(v).dump(); }

int cmd_generate(const std::string& spec_arg, const std::string& topo_arg,
                 bool seed_set, uint64_t seed, const std::string& out) {
    WorkloadSpec spec = resolve_workload(spec_arg);
    if (seed_set) spec.seed = seed;
    Topology topo = resolve_topology(topo_arg);
    ApplicationGraph g = generate(spec, topo);
    std::filesystem::path path = resolve_out(out);
    write_json(path, g.to_json());
    double grain = grain_ratio(g, topo);
    std::cout << "wrote " << path.string() << " (tasks=" << g.task_count()
              << ", subtasks=" << g.subtask_count() << ", edges=" << g.edge_count()
              << ", grain_ratio=" << (std::isinf(grain) ? "inf" : short_number(grain))
              << ", seed=" << spec.seed << ")\n";
    return 0;
}

int cmd_map(const std::string& graph_arg, const std::string& topo_arg,
            const std::string& out) {
    ApplicationGraph g = ApplicationGraph::load_file(graph_arg);
    Topology topo = resolve_topology(topo_arg);
    Schedule sched = Mapper(g, topo).run();
    ValidationReport rep = validate_schedule(sched, g, topo);
    if (!rep.ok()) throw ValidationError("mapper", rep.joined());
    std::filesystem::path path = resolve_out(out);
    write_json(path, schedule_to_json(sched, g, topo));
    std::cout << "wrote " << path.string() << " (t_est_s=" << short_number(sched.t_est)
              << ")\n";
    return 0;
}

int cmd_simulate(const std::string& graph_arg, const std::string& topo_arg,
                 const std::string& sched_arg, const std::string& contention_arg,
                 const std::string& out) {
    ApplicationGraph g = ApplicationGraph::load_file(graph_arg);
    Topology topo = resolve_topology(topo_arg);
    std::ifstream in(sched_arg);
    if (!in) throw ValidationError("cli", "cannot open \"" + sched_arg + "\"");
    jdoc sched_doc;
    try {
        sched_doc = jdoc::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("cli", "parse failure in \"" + sched_arg + "\": " + e.what());
    }
    Schedule sched = schedule_from_json(sched_doc, g, topo);
    Contention mode = contention_from_string(contention_arg);
    SimulationResult sim = simulate(sched, g, topo, mode);
    std::filesystem::path path = resolve_out(out);
    write_json(path, result_to_json(sim, sched, g, topo));
    std::cout << "wrote " << path.string() << " (t_exec_s=" << short_number(sim.t_exec)
              << ", dif_rel_pct=" << short_number(dif_rel_pct(sim.t_exec, sched.t_est))
              << ")\n";
    return 0;
}

int cmd_evaluate(const std::string& spec_arg, std::string topo_arg, BatchOptions opt,
                 bool serial, const std::string& out_report, const std::string& out_csv) {
    WorkloadSpec spec = resolve_workload(spec_arg);
    if (topo_arg.empty()) {
        if (spec_arg == "default_8core")
            topo_arg = "fig1_8core";
        else if (spec_arg == "default_64core")
            topo_arg = "hp_64core";
        else
            throw ValidationError("cli", "--topo is required unless --spec names a preset");
    }
    Topology topo = resolve_topology(topo_arg);
    std::vector<InstanceResult> rows =
        serial ? run_batch_serial(spec, topo, opt) : run_batch(spec, topo, opt);

    std::filesystem::path report_path = resolve_out(out_report);
    write_json(report_path, make_report(spec, topo, opt, rows));
    std::filesystem::path csv_path = resolve_out(out_csv);
    write_text(csv_path, rows_to_csv(rows, static_cast<uint32_t>(topo.core_count()),
                                     opt.contention));

    Summary s = summarize_dif(rows);
    std::cout << "wrote " << report_path.string() << " and " << csv_path.string() << "\n"
              << "runs=" << s.count << " mean_dif_rel_pct=" << short_number(s.mean)
              << " max_dif_rel_pct=" << short_number(s.max)
              << " stddev_dif_rel_pct=" << short_number(s.stddev) << "\n";
    return 0;
}

int cmd_verify(const VerifyOptions& opt) {
    std::vector<VerifyTrial> trials = run_verify(opt);
    uint32_t ok = 0;
    for (const VerifyTrial& t : trials)
        if (t.ok) ++ok;
    for (const VerifyTrial& t : trials)
        if (!t.ok)
            std::cout << "trial seed=" << t.seed << " tasks=" << t.tasks
                      << " cores=" << t.cores << ": " << t.problem << "\n";
    std::cout << ok << "/" << trials.size()
              << " trials: estimate at or above the optimum and replay matches\n";
    if (ok != trials.size()) {
        std::cerr << "error: cli: " << (trials.size() - ok) << "/" << trials.size()
                  << " verify trials failed\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-graph mapping onto hierarchical multicore machines: generate "
                 "workloads, map them, replay the schedule, and compare estimated against "
                 "replayed makespans."};
    app.require_subcommand(1);

    std::string spec_arg, topo_arg, graph_arg, sched_arg, out_arg;
    std::string contention_arg = "serialize-per-level";
    uint64_t seed = 0;
    bool serial = false;

    auto* gen = app.add_subcommand("generate", "Draw a synthetic application graph");
    gen->add_option("--spec", spec_arg, "Workload spec: preset name or JSON file")->required();
    gen->add_option("--topo", topo_arg, "Topology: preset name or JSON file")->required();
    auto* seed_opt = gen->add_option("--seed", seed, "Override the spec's seed");
    gen->add_option("--out", out_arg, "Output graph document")->default_val("graph.json");

    auto* map_cmd = app.add_subcommand("map", "Map a graph onto a topology");
    map_cmd->add_option("--graph", graph_arg, "Graph document")->required();
    map_cmd->add_option("--topo", topo_arg, "Topology: preset name or JSON file")->required();
    map_cmd->add_option("--out", out_arg, "Output schedule document")
        ->default_val("schedule.json");

    auto* sim_cmd = app.add_subcommand("simulate", "Replay a schedule event-driven");
    sim_cmd->add_option("--graph", graph_arg, "Graph document")->required();
    sim_cmd->add_option("--topo", topo_arg, "Topology: preset name or JSON file")->required();
    sim_cmd->add_option("--schedule", sched_arg, "Schedule document")->required();
    sim_cmd->add_option("--contention", contention_arg,
                        "Contention mode: none or serialize-per-level");
    sim_cmd->add_option("--out", out_arg, "Output result document")->default_val("result.json");

    BatchOptions batch;
    std::string out_report = "report.json", out_csv = "rows.csv";
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Generate, map and replay a batch; report error statistics");
    eval_cmd->add_option("--spec", spec_arg, "Workload spec: preset name or JSON file")
        ->required();
    eval_cmd->add_option("--topo", topo_arg,
                         "Topology: preset name or JSON file (defaults to the preset "
                         "paired with a preset --spec)");
    eval_cmd->add_option("--runs", batch.runs, "Instances to run")->default_val(10);
    eval_cmd->add_option("--seed", batch.base_seed, "Base seed; instance i uses base + i")
        ->default_val(1);
    eval_cmd->add_option("--contention", contention_arg,
                         "Contention mode: none or serialize-per-level");
    eval_cmd->add_option("--min-grain", batch.min_grain_ratio,
                         "Redraw instances whose compute/comm ratio falls below this");
    eval_cmd->add_option("--threads", batch.threads, "Worker threads (0 = library default)");
    eval_cmd->add_flag("--validate", batch.validate, "Check every schedule's invariants");
    eval_cmd->add_flag("--serial", serial, "Run instances on one thread");
    eval_cmd->add_option("--out-report", out_report, "Output report document")
        ->default_val("report.json");
    eval_cmd->add_option("--out-csv", out_csv, "Output per-instance CSV")
        ->default_val("rows.csv");

    VerifyOptions vopt;
    auto* verify_cmd = app.add_subcommand(
        "verify", "Cross-check the mapper against exhaustive search on small instances");
    verify_cmd->add_option("--trials", vopt.trials, "Number of random trials")->default_val(50);
    verify_cmd->add_option("--seed", vopt.seed, "Trial stream seed")->default_val(7);
    verify_cmd->add_option("--max-tasks", vopt.max_tasks, "Largest task count")->default_val(4);
    verify_cmd->add_option("--max-cores", vopt.max_cores, "Largest core count")->default_val(3);
    verify_cmd->add_option("--max-subtasks", vopt.max_subtasks_per_task,
                           "Largest per-task subtask count")
        ->default_val(3);
    verify_cmd->add_flag("--serial", serial, "Search assignments on one thread");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_generate(spec_arg, topo_arg, seed_opt->count() > 0, seed, out_arg);
        if (map_cmd->parsed()) return cmd_map(graph_arg, topo_arg, out_arg);
        if (sim_cmd->parsed())
            return cmd_simulate(graph_arg, topo_arg, sched_arg, contention_arg, out_arg);
        if (eval_cmd->parsed()) {
            batch.contention = contention_from_string(contention_arg);
            return cmd_evaluate(spec_arg, topo_arg, batch, serial, out_report, out_csv);
        }
        if (verify_cmd->parsed()) {
            if (serial) vopt.threads = 1;
            return cmd_verify(vopt);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
