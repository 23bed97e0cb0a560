// Acceptance suite: one line per criterion, exit code = number of failures.
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include "taskmap/batch.hpp"
#include "taskmap/error.hpp"
#include "taskmap/generator.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/presets.hpp"
#include "taskmap/simulator.hpp"
#include "taskmap/validate.hpp"

using namespace taskmap;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// 1. Replay without contention reproduces the estimate exactly.
void criterion_1() {
    auto t0 = Clock::now();
    Topology topo = preset_fig1_8core();
    WorkloadSpec spec = preset_default_8core();
    double worst_dif = 0.0;
    double worst_gap = 0.0;
    int bad = 0;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        spec.seed = seed;
        ApplicationGraph g = generate(spec, topo);
        Schedule sched = Mapper(g, topo).run();
        SimulationResult sim = simulate(sched, g, topo, Contention::None);
        double dif = std::abs(dif_rel_pct(sim.t_exec, sched.t_est));
        worst_dif = std::max(worst_dif, dif);
        double gap = 0.0;
        for (uint32_t s = 0; s < g.subtask_count(); ++s) {
            gap = std::max(gap, std::abs(sim.by_subtask[s].start - sched.by_subtask[s].start));
            gap = std::max(gap, std::abs(sim.by_subtask[s].finish - sched.by_subtask[s].finish));
        }
        worst_gap = std::max(worst_gap, gap);
        if (dif > 1e-9 || gap > 1e-9) ++bad;
    }
    double dt = seconds_since(t0);
    bool pass = bad == 0 && dt < 10.0;
    report(1, pass,
           "contention-free replay matches the estimate on 100 instances (max |dif_rel_pct| " +
               fmt(worst_dif) + ", max placement gap " + fmt(worst_gap) + " s, " + fmt(dt) +
               " s)");
}

// 2. Error bounds under contention plus the volume trend.
void criterion_2() {
    auto t0 = Clock::now();
    std::string note;
    bool pass = true;

    BatchOptions opt;
    opt.runs = 30;
    opt.base_seed = 1;
    opt.contention = Contention::SerializePerLevel;
    opt.min_grain_ratio = 10.0;

    WorkloadSpec spec8 = preset_default_8core();
    Topology topo8 = preset_fig1_8core();
    auto rows8 = run_batch(spec8, topo8, opt);
    double max8 = 0.0;
    for (const InstanceResult& r : rows8) {
        max8 = std::max(max8, r.dif_rel_pct);
        if (r.dif_rel_pct < 0.0 || r.dif_rel_pct > 4.0) pass = false;
        if (r.grain <= 10.0) pass = false;
    }

    WorkloadSpec spec64 = preset_default_64core();
    Topology topo64 = preset_hp_64core();
    opt.min_grain_ratio = 0.0;
    auto rows64 = run_batch(spec64, topo64, opt);
    double max64 = 0.0;
    for (const InstanceResult& r : rows64) {
        max64 = std::max(max64, r.dif_rel_pct);
        if (r.dif_rel_pct < 0.0 || r.dif_rel_pct > 6.0) pass = false;
    }

    // Scaling the communication volume range up must not shrink the mean error.
    std::vector<double> means;
    for (uint64_t scale : {uint64_t{1}, uint64_t{10}, uint64_t{100}}) {
        WorkloadSpec spec = spec8;
        spec.comm_volume_bytes = {spec8.comm_volume_bytes.lo * scale,
                                  spec8.comm_volume_bytes.hi * scale};
        BatchOptions sweep = opt;
        sweep.min_grain_ratio = 0.0;
        auto rows = run_batch(spec, topo8, sweep);
        for (const InstanceResult& r : rows)
            if (r.dif_rel_pct < 0.0) pass = false;
        means.push_back(summarize_dif(rows).mean);
    }
    for (size_t i = 1; i < means.size(); ++i)
        if (means[i] < means[i - 1] - 1e-12) pass = false;

    double dt = seconds_since(t0);
    if (dt >= 60.0) pass = false;
    report(2, pass,
           "serialized contention stays in bounds (8-core max " + fmt(max8) +
               "% <= 4%, 64-core max " + fmt(max64) + "% <= 6%) and mean error rises with " +
               "volume x10 steps (" + fmt(means[0]) + "% -> " + fmt(means[1]) + "% -> " +
               fmt(means[2]) + "%, " + fmt(dt) + " s)");
}

// 3. The mapper never beats exhaustive search on capped instances.
void criterion_3() {
    auto t0 = Clock::now();
    VerifyOptions opt;
    opt.trials = 100;
    opt.seed = 7;
    opt.max_tasks = 4;
    opt.max_cores = 3;
    opt.max_subtasks_per_task = 3;
    auto trials = run_verify(opt);
    int bad = 0;
    std::string first;
    for (const VerifyTrial& t : trials)
        if (!t.ok) {
            ++bad;
            if (first.empty()) first = " (first: " + t.problem + ")";
        }
    double dt = seconds_since(t0);
    bool pass = bad == 0 && dt < 120.0;
    report(3, pass,
           "estimate at or above the exhaustive optimum and valid in " +
               std::to_string(100 - bad) + "/100 trials" + first + " (" + fmt(dt) + " s)");
}

// 4. Every mapped schedule passes the validity checker on both machines.
void criterion_4() {
    auto t0 = Clock::now();
    bool pass = true;
    std::string note = "no overlap, precedence, one core per task, nothing pending";
    try {
        BatchOptions opt;
        opt.runs = 100;
        opt.base_seed = 1;
        opt.validate = true;
        run_batch(preset_default_8core(), preset_fig1_8core(), opt);
        run_batch(preset_default_64core(), preset_hp_64core(), opt);
    } catch (const std::exception& e) {
        pass = false;
        note = e.what();
    }
    double dt = seconds_since(t0);
    if (dt >= 60.0) pass = false;
    report(4, pass, "200 schedules across both machines: " + note + " (" + fmt(dt) + " s)");
}

// 5. Determinism and scale invariance.
void criterion_5() {
    auto t0 = Clock::now();
    Topology topo = preset_fig1_8core();
    WorkloadSpec spec = preset_default_8core();
    spec.seed = 5;
    ApplicationGraph g = generate(spec, topo);

    std::string dump_a = schedule_to_json(Mapper(g, topo).run(), g, topo).dump(2);
    std::string dump_b = schedule_to_json(Mapper(g, topo).run(), g, topo).dump(2);
    bool identical = dump_a == dump_b;

    const double k = 7.0;
    jdoc gdoc = g.to_json();
    for (jdoc& task : gdoc["tasks"])
        for (jdoc& sub : task["subtasks"])
            for (auto it = sub["exec_time"].begin(); it != sub["exec_time"].end(); ++it)
                *it = it->get<double>() * k;
    for (jdoc& edge : gdoc["edges"])
        edge["volume_bytes"] = edge["volume_bytes"].get<uint64_t>() * static_cast<uint64_t>(k);
    ApplicationGraph g7 = ApplicationGraph::from_json(gdoc);

    jdoc tdoc = topo.to_json();
    std::vector<jdoc*> stack{&tdoc["root"]};
    while (!stack.empty()) {
        jdoc* node = stack.back();
        stack.pop_back();
        if (node->value("core", false)) continue;
        (*node)["latency_s"] = (*node)["latency_s"].get<double>() * k;
        for (jdoc& child : (*node)["children"]) stack.push_back(&child);
    }
    Topology topo7 = Topology::from_json(tdoc);

    std::vector<std::pair<uint32_t, uint32_t>> picks, picks7;
    auto trace = [](std::vector<std::pair<uint32_t, uint32_t>>& out) {
        return [&out](const MapStep& step, const Schedule&, const RankTable&) {
            out.emplace_back(step.task, step.core);
        };
    };
    Schedule base = Mapper(g, topo).run(trace(picks));
    Schedule scaled = Mapper(g7, topo7).run(trace(picks7));
    bool same_sequence = picks == picks7;
    double rel = std::abs(scaled.t_est - k * base.t_est) / (k * base.t_est);
    bool scaled_ok = rel <= 1e-6;

    double dt = seconds_since(t0);
    bool pass = identical && same_sequence && scaled_ok;
    report(5, pass,
           std::string("same seed gives byte-identical schedules (") +
               (identical ? "yes" : "NO") + "), scaling times and volumes by 7 keeps the " +
               "selection sequence (" + (same_sequence ? "yes" : "NO") +
               ") and multiplies the estimate by 7 (rel err " + fmt(rel) + ", " + fmt(dt) +
               " s)");
}

// 6. Mapping throughput on the large machine.
void criterion_6() {
    Topology topo = preset_hp_64core();
    WorkloadSpec spec = preset_default_64core();
    spec.n_tasks = {200, 200};
    spec.seed = 2;
    ApplicationGraph g = generate(spec, topo);
    auto t0 = Clock::now();
    Schedule sched = Mapper(g, topo).run();
    double dt = seconds_since(t0);
    bool pass = dt < 5.0 && sched.complete(g);
    report(6, pass,
           "mapped 200 tasks / " + std::to_string(g.subtask_count()) +
               " subtasks onto 64 cores in " + fmt(dt) + " s (< 5 s)");
}

} // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance suite aborted: %s\n", e.what());
        return 1 + failures;
    }
    std::printf("%d/6 criteria passed\n", 6 - failures);
    return failures;
}
