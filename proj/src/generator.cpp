#include "taskmap/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("generator", msg); }

IntRange int_range_from_json(const jdoc& node, const char* key) {
    if (!node.contains(key) || !node[key].is_array() || node[key].size() != 2 ||
        !node[key][0].is_number_unsigned() || !node[key][1].is_number_unsigned())
        fail(std::string("\"") + key + "\" must be a [lo, hi] pair of non-negative integers");
    return {node[key][0].get<uint64_t>(), node[key][1].get<uint64_t>()};
}

Range range_from_json(const jdoc& node, const char* key) {
    if (!node.contains(key) || !node[key].is_array() || node[key].size() != 2 ||
        !node[key][0].is_number() || !node[key][1].is_number())
        fail(std::string("\"") + key + "\" must be a [lo, hi] pair of numbers");
    return {node[key][0].get<double>(), node[key][1].get<double>()};
}

} // namespace

void WorkloadSpec::validate() const {
    if (n_tasks.lo > n_tasks.hi || n_tasks.lo == 0)
        fail("n_tasks range must satisfy 1 <= lo <= hi");
    if (subtasks_per_task.lo > subtasks_per_task.hi || subtasks_per_task.lo == 0)
        fail("subtasks_per_task range must satisfy 1 <= lo <= hi");
    if (!(task_time_s.lo > 0.0) || task_time_s.lo > task_time_s.hi)
        fail("task_time_s range must satisfy 0 < lo <= hi");
    if (comm_volume_bytes.lo > comm_volume_bytes.hi || comm_volume_bytes.lo == 0)
        fail("comm_volume_bytes range must satisfy 1 <= lo <= hi");
    if (comm_probability_pct.lo < 0.0 || comm_probability_pct.lo > comm_probability_pct.hi ||
        comm_probability_pct.hi > 100.0)
        fail("comm_probability_pct range must lie within [0, 100]");
    for (const auto& [type, mult] : heterogeneity)
        if (!(mult > 0.0))
            fail("heterogeneity multiplier for \"" + type + "\" must be > 0");
}

WorkloadSpec WorkloadSpec::from_json(const jdoc& doc) {
    if (!doc.is_object()) fail("workload document root must be an object");
    WorkloadSpec spec;
    spec.n_tasks = int_range_from_json(doc, "n_tasks");
    spec.subtasks_per_task = int_range_from_json(doc, "subtasks_per_task");
    spec.task_time_s = range_from_json(doc, "task_time_s");
    spec.comm_volume_bytes = int_range_from_json(doc, "comm_volume_bytes");
    spec.comm_probability_pct = range_from_json(doc, "comm_probability_pct");
    if (doc.contains("heterogeneity")) {
        if (!doc["heterogeneity"].is_object())
            fail("\"heterogeneity\" must map processor types to multipliers");
        for (auto it = doc["heterogeneity"].begin(); it != doc["heterogeneity"].end(); ++it) {
            if (!it.value().is_number()) fail("heterogeneity multipliers must be numbers");
            spec.heterogeneity[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("\"seed\" must be a non-negative integer");
        spec.seed = doc["seed"].get<uint64_t>();
    }
    spec.validate();
    return spec;
}

WorkloadSpec WorkloadSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open \"" + path + "\"");
    jdoc doc;
    try {
        doc = jdoc::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail("parse failure in \"" + path + "\": " + e.what());
    }
    return from_json(doc);
}

jdoc WorkloadSpec::to_json() const {
    jdoc doc;
    doc["n_tasks"] = {n_tasks.lo, n_tasks.hi};
    doc["subtasks_per_task"] = {subtasks_per_task.lo, subtasks_per_task.hi};
    doc["task_time_s"] = {task_time_s.lo, task_time_s.hi};
    doc["comm_volume_bytes"] = {comm_volume_bytes.lo, comm_volume_bytes.hi};
    doc["comm_probability_pct"] = {comm_probability_pct.lo, comm_probability_pct.hi};
    jdoc het;
    for (const auto& [type, mult] : heterogeneity) het[type] = mult;
    doc["heterogeneity"] = std::move(het);
    doc["seed"] = seed;
    return doc;
}

ApplicationGraph generate(const WorkloadSpec& spec, const Topology& topo) {
    spec.validate();
    SplitMix64 rng(spec.seed);

    const uint64_t n_tasks = rng.uniform_u64(spec.n_tasks.lo, spec.n_tasks.hi);

    // Random total order over tasks; edges point from earlier to later
    // position, which rules out cycles whatever the pair draws do.
    std::vector<uint32_t> position(n_tasks);
    for (uint32_t i = 0; i < n_tasks; ++i) position[i] = i;
    for (uint64_t i = n_tasks; i > 1; --i) {
        uint64_t j = rng.uniform_u64(0, i - 1);
        std::swap(position[i - 1], position[j]);
    }

    const double comm_prob =
        rng.uniform(spec.comm_probability_pct.lo, spec.comm_probability_pct.hi) / 100.0;

    std::vector<double> multiplier(topo.processor_types().size(), 1.0);
    for (size_t ti = 0; ti < multiplier.size(); ++ti) {
        auto it = spec.heterogeneity.find(topo.processor_types()[ti]);
        if (it != spec.heterogeneity.end()) multiplier[ti] = it->second;
    }

    ApplicationGraph::Builder b;
    std::vector<std::vector<std::string>> subtask_ids(n_tasks);
    for (uint64_t t = 0; t < n_tasks; ++t) {
        std::string task_id = "t" + std::to_string(t);
        b.add_task(task_id);
        uint64_t n_sub = rng.uniform_u64(spec.subtasks_per_task.lo, spec.subtasks_per_task.hi);
        double total = rng.uniform(spec.task_time_s.lo, spec.task_time_s.hi);

        // Split the budget at sorted uniform cuts; every piece stays positive.
        std::vector<double> cuts(n_sub + 1);
        cuts.front() = 0.0;
        cuts.back() = 1.0;
        for (uint64_t k = 1; k < n_sub; ++k) cuts[k] = rng.uniform01();
        std::sort(cuts.begin() + 1, cuts.end() - 1);

        for (uint64_t k = 0; k < n_sub; ++k) {
            double base = std::max(total * (cuts[k + 1] - cuts[k]), 1e-12);
            std::map<std::string, double> times;
            for (size_t ti = 0; ti < multiplier.size(); ++ti)
                times[topo.processor_types()[ti]] = base * multiplier[ti];
            std::string sub_id = task_id + "_s" + std::to_string(k);
            b.add_subtask(sub_id, times);
            subtask_ids[t].push_back(sub_id);
        }
    }

    // One probability draw per ordered cross-task subtask pair; the volume
    // draw is consumed only when the edge materializes.
    for (uint64_t a = 0; a < n_tasks; ++a) {
        for (uint64_t c = 0; c < n_tasks; ++c) {
            if (a == c || position[a] >= position[c]) continue;
            for (const std::string& src : subtask_ids[a]) {
                for (const std::string& dst : subtask_ids[c]) {
                    if (rng.uniform01() >= comm_prob) continue;
                    uint64_t volume =
                        rng.uniform_u64(spec.comm_volume_bytes.lo, spec.comm_volume_bytes.hi);
                    b.add_edge(src, dst, volume);
                }
            }
        }
    }

    return b.build();
}

double grain_ratio(const ApplicationGraph& g, const Topology& topo) {
    double compute = 0.0;
    for (uint32_t s = 0; s < g.subtask_count(); ++s) compute += g.avg_exec_time(s, topo);
    if (g.edge_count() == 0) return std::numeric_limits<double>::infinity();
    double comm = 0.0;
    for (const CommEdge& e : g.edges()) comm += topo.avg_pair_cost(e.volume_bytes);
    if (comm == 0.0) return std::numeric_limits<double>::infinity();
    return compute / comm;
}

} // namespace taskmap
