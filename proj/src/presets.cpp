#include "taskmap/presets.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace taskmap {

namespace {

jdoc level(const std::string& id, const std::string& kind, double bandwidth_bps,
           double latency_s) {
    jdoc node;
    node["id"] = id;
    node["kind"] = kind;
    node["bandwidth_Bps"] = bandwidth_bps;
    node["latency_s"] = latency_s;
    node["children"] = jdoc::array();
    return node;
}

jdoc leaf(const std::string& id, const std::string& type) {
    jdoc node;
    node["id"] = id;
    node["core"] = true;
    node["processor_type"] = type;
    return node;
}

jdoc fig1_doc() {
    const std::string type = "xeon_e5410";
    jdoc ram = level("ram", "shared_memory", 1e9, 1e-6);
    uint32_t core = 0;
    for (uint32_t q = 0; q < 2; ++q) {
        jdoc l3 = level("l3_" + std::to_string(q), "shared_memory", 4e9, 2.5e-7);
        for (uint32_t d = 0; d < 2; ++d) {
            uint32_t pair = q * 2 + d;
            jdoc l2 = level("l2_" + std::to_string(pair), "shared_memory", 8e9, 1e-7);
            for (uint32_t k = 0; k < 2; ++k) {
                jdoc l1 = level("l1_" + std::to_string(core), "shared_memory", 1.6e10, 5e-8);
                l1["children"].push_back(leaf("c" + std::to_string(core), type));
                l2["children"].push_back(std::move(l1));
                ++core;
            }
            l3["children"].push_back(std::move(l2));
        }
        ram["children"].push_back(std::move(l3));
    }
    jdoc doc;
    doc["processor_types"] = {type};
    doc["root"] = std::move(ram);
    return doc;
}

jdoc hp64_doc() {
    const std::string type = "xeon_e5405";
    jdoc net = level("net", "network", 1.25e8, 5e-5);
    uint32_t core = 0;
    for (uint32_t n = 0; n < 8; ++n) {
        jdoc ram = level("node" + std::to_string(n) + "_ram", "shared_memory", 1e9, 1e-6);
        for (uint32_t p = 0; p < 2; ++p) {
            jdoc l2 = level("node" + std::to_string(n) + "_p" + std::to_string(p) + "_l2",
                            "shared_memory", 8e9, 1e-7);
            for (uint32_t k = 0; k < 4; ++k) {
                jdoc l1 = level("l1_" + std::to_string(core), "shared_memory", 1.6e10, 5e-8);
                l1["children"].push_back(leaf("c" + std::to_string(core), type));
                l2["children"].push_back(std::move(l1));
                ++core;
            }
            ram["children"].push_back(std::move(l2));
        }
        net["children"].push_back(std::move(ram));
    }
    jdoc doc;
    doc["processor_types"] = {type};
    doc["root"] = std::move(net);
    return doc;
}

} // namespace

Topology preset_fig1_8core() { return Topology::from_json(fig1_doc()); }

Topology preset_hp_64core() { return Topology::from_json(hp64_doc()); }

WorkloadSpec preset_default_8core() {
    WorkloadSpec spec;
    spec.n_tasks = {15, 25};
    spec.subtasks_per_task = {3, 6};
    spec.task_time_s = {5.0, 50.0};
    spec.comm_volume_bytes = {1000, 10000};
    spec.comm_probability_pct = {5.0, 35.0};
    spec.seed = 1;
    return spec;
}

WorkloadSpec preset_default_64core() {
    WorkloadSpec spec = preset_default_8core();
    spec.n_tasks = {120, 200};
    spec.seed = 2;
    return spec;
}

std::vector<std::string> topology_preset_names() { return {"fig1_8core", "hp_64core"}; }

std::vector<std::string> workload_preset_names() { return {"default_8core", "default_64core"}; }

bool is_topology_preset(const std::string& name) {
    auto names = topology_preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_workload_preset(const std::string& name) {
    auto names = workload_preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Topology resolve_topology(const std::string& name_or_path) {
    if (name_or_path == "fig1_8core") return preset_fig1_8core();
    if (name_or_path == "hp_64core") return preset_hp_64core();
    return Topology::load_file(name_or_path);
}

WorkloadSpec resolve_workload(const std::string& name_or_path) {
    if (name_or_path == "default_8core") return preset_default_8core();
    if (name_or_path == "default_64core") return preset_default_64core();
    return WorkloadSpec::load_file(name_or_path);
}

} // namespace taskmap
