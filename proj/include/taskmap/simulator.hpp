#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taskmap/graph.hpp"
#include "taskmap/mapper.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// How concurrent transfers share a communication level.
//  None: every transfer takes exactly its nominal cost, no queueing.
//  SerializePerLevel: each level moves one message at a time; messages
//  queue in (request time, edge index) order.
enum class Contention {
    None,
    SerializePerLevel,
};

const char* to_string(Contention c);
Contention contention_from_string(const std::string& name);

// One replayed subtask execution.
struct SimPlacement {
    uint32_t subtask = 0;
    uint32_t core = 0;
    double start = 0.0;
    double finish = 0.0;
};

// One replayed transfer (cross-core edges only).
struct SimTransfer {
    uint32_t edge = 0;
    double depart = 0.0; // source finish time
    double begin = 0.0;  // when the level starts moving it
    double arrive = 0.0;
};

struct SimulationResult {
    std::vector<SimPlacement> by_subtask;
    std::vector<SimTransfer> transfers; // by edge index; same-core edges arrive as they depart
    double t_exec = 0.0;
    Contention contention = Contention::None;
};

// Relative gap between replayed and estimated makespan, in percent.
// t_exec must be positive.
double dif_rel_pct(double t_exec, double t_est);

// Replays a complete schedule with event-driven timing. Core order and
// per-core subtask order are taken from the schedule; start times are
// re-derived from dependency arrivals and core availability. Throws
// ValidationError when the replay deadlocks (the diagnostic names the
// subtasks involved), which indicates an infeasible schedule.
SimulationResult simulate(const Schedule& s, const ApplicationGraph& g,
                          const Topology& topo, Contention contention);

jdoc result_to_json(const SimulationResult& r, const Schedule& s,
                    const ApplicationGraph& g, const Topology& topo);

} // namespace taskmap
