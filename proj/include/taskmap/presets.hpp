#pragma once

#include <string>
#include <vector>

#include "taskmap/generator.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// Built-in machines and workload families, also shipped as JSON under
// presets/. Hardware timings are illustrative round numbers for the named
// shapes, not measurements.

// 8 cores in one box: ram over two L3 groups, each splitting twice more
// before the cores. One processor type.
Topology preset_fig1_8core();

// 64 cores across 8 network-connected boxes of 8. One processor type.
Topology preset_hp_64core();

// Moderate workload aimed at the 8-core machine.
WorkloadSpec preset_default_8core();

// Larger workload (120..200 tasks) aimed at the 64-core machine.
WorkloadSpec preset_default_64core();

std::vector<std::string> topology_preset_names();
std::vector<std::string> workload_preset_names();

bool is_topology_preset(const std::string& name);
bool is_workload_preset(const std::string& name);

// Resolve an argument that is either a preset name or a JSON file path.
Topology resolve_topology(const std::string& name_or_path);
WorkloadSpec resolve_workload(const std::string& name_or_path);

} // namespace taskmap
