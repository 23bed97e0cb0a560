// Compares the parallel batch and oracle paths against their serial
// references: same results required, wall times reported.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "taskmap/batch.hpp"
#include "taskmap/generator.hpp"
#include "taskmap/oracle.hpp"
#include "taskmap/presets.hpp"

using namespace taskmap;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
auto timed(const char* label, double& out_s, F&& fn) {
    auto t0 = Clock::now();
    auto result = fn();
    out_s = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("  %-28s %8.3f s\n", label, out_s);
    return result;
}

} // namespace

int main() {
    int bad = 0;

    std::printf("batch of 20 instances, 8-core machine, serialized contention\n");
    BatchOptions opt;
    opt.runs = 20;
    opt.base_seed = 1;
    WorkloadSpec spec = preset_default_8core();
    Topology topo = preset_fig1_8core();
    double t_par = 0.0, t_ser = 0.0;
    auto rows_par = timed("parallel run_batch", t_par, [&] { return run_batch(spec, topo, opt); });
    auto rows_ser = timed("serial reference", t_ser, [&] { return run_batch_serial(spec, topo, opt); });
    bool same = rows_par.size() == rows_ser.size();
    for (size_t i = 0; same && i < rows_par.size(); ++i)
        same = rows_par[i].seed == rows_ser[i].seed &&
               rows_par[i].t_est_s == rows_ser[i].t_est_s &&
               rows_par[i].t_exec_s == rows_ser[i].t_exec_s &&
               rows_par[i].dif_rel_pct == rows_ser[i].dif_rel_pct;
    std::printf("  results identical: %s, speedup x%.2f\n", same ? "yes" : "NO", t_ser / t_par);
    if (!same) ++bad;

    std::printf("exhaustive search, 4 tasks on 3 cores, 5 seeds\n");
    Topology tiny = tiny_topology(3, "mixed");
    WorkloadSpec small;
    small.n_tasks = {4, 4};
    small.subtasks_per_task = {1, 3};
    small.task_time_s = {1.0, 10.0};
    small.comm_volume_bytes = {100, 5000};
    small.comm_probability_pct = {20.0, 60.0};
    small.heterogeneity["slow"] = 2.0;
    OracleLimits limits;
    double o_par_total = 0.0, o_ser_total = 0.0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        small.seed = seed;
        ApplicationGraph g = generate(small, tiny);
        double tp = 0.0, ts = 0.0;
        std::string lp = "parallel oracle seed " + std::to_string(seed);
        std::string ls = "serial oracle seed " + std::to_string(seed);
        OracleResult par = timed(lp.c_str(), tp, [&] { return optimal_schedule(g, tiny, limits); });
        OracleResult ser = timed(ls.c_str(), ts, [&] { return optimal_schedule_serial(g, tiny, limits); });
        o_par_total += tp;
        o_ser_total += ts;
        if (par.optimal_makespan != ser.optimal_makespan || par.task_core != ser.task_core ||
            par.nodes_explored != ser.nodes_explored) {
            std::printf("  MISMATCH at seed %llu\n", static_cast<unsigned long long>(seed));
            ++bad;
        }
    }
    std::printf("  oracle totals: parallel %.3f s, serial %.3f s, speedup x%.2f\n", o_par_total,
                o_ser_total, o_ser_total / o_par_total);

    if (bad) std::printf("%d comparison(s) failed\n", bad);
    return bad;
}
