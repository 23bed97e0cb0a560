#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "taskmap/graph.hpp"
#include "taskmap/topology.hpp"

namespace taskmap {

// One subtask fixed on one core for a time interval.
// finish - start is exactly the subtask's execution time on the core's type.
struct Placement {
    uint32_t subtask = 0;
    uint32_t core = 0;
    double start = 0.0;
    double finish = 0.0;
};

// A core's state during and after mapping: the time-ordered placements plus
// the subtasks assigned here whose predecessors are not all placed yet.
struct CoreTimeline {
    uint32_t core = 0;
    std::vector<Placement> placed;  // ordered by start, non-overlapping
    std::vector<uint32_t> pending;  // insertion order
};

// Mapping output (and intermediate state while it is being built). Every
// task maps to exactly one core and all of its subtasks are placed there;
// pending lists are empty once mapping completes.
struct Schedule {
    std::vector<CoreTimeline> timelines; // by core index
    std::vector<int32_t> task_core;      // by task index, -1 while unassigned
    std::vector<Placement> by_subtask;   // valid where placed_mask is set
    std::vector<uint8_t> placed_mask;
    uint32_t placed_count = 0;
    uint32_t pending_count = 0;
    double t_est = 0.0; // max finish over all placements

    bool complete(const ApplicationGraph& g) const {
        return placed_count == g.subtask_count() && pending_count == 0;
    }
};

// Task priorities: rank is the sum of average times of the task's ready
// subtasks, -1 once the task is assigned. ready holds those subtasks.
struct RankTable {
    std::vector<double> rank;                 // by task index
    std::vector<std::vector<uint32_t>> ready; // by task index
    std::vector<uint8_t> in_ready;            // by subtask index
};

// Trace record for one mapping iteration, for tests and diagnostics.
struct MapStep {
    uint32_t iteration = 0;
    uint32_t task = 0;
    uint32_t core = 0;
    double tp = 0.0;          // winning core's completion-time score
    bool blocked_case = false; // true when some subtask of the task stayed pending
    std::vector<uint32_t> newly_placed; // placement order, cascades included
};

using MapHook =
    std::function<void(const MapStep&, const Schedule&, const RankTable&)>;

// List mapper over the task graph and machine: repeatedly rank tasks, pick
// the max-rank task, pick the core minimizing its completion-time score,
// place its subtasks with gap insertion (parking the ones whose predecessors
// are unplaced), and propagate readiness to successor tasks. Deterministic
// for fixed inputs.
//
// Not safe for concurrent use: score_core reuses an internal scratch state.
// Use one Mapper per thread; graph and topology can be shared.
class Mapper {
public:
    Mapper(const ApplicationGraph& g, const Topology& topo);

    const ApplicationGraph& graph() const { return g_; }
    const Topology& topology() const { return topo_; }

    double avg_exec(uint32_t subtask) const { return w_avg_[subtask]; }
    double total_avg(uint32_t task) const { return t_avg_[task]; }
    double exec_on(uint32_t subtask, uint32_t core) const {
        return exec_by_type_[subtask * n_types_ + topo_.core(core).type_index];
    }

    Schedule empty_schedule() const;
    RankTable initial_ranks() const;

    // Argmax of rank; ties by smaller total average time, then by task id.
    uint32_t select_task(const RankTable& rt) const;

    struct CoreScore {
        double tp = 0.0;
        bool blocked_case = false;
    };

    // Completion-time score of tentatively assigning the task to the core,
    // without mutating sched. When every subtask can be placed, tp is the
    // finish of the task's last subtask; otherwise tp is the end of the
    // core's timeline after placing what can be placed, plus the execution
    // times on this core of everything left pending there.
    CoreScore score_core(const Schedule& sched, uint32_t task, uint32_t core) const;

    // Argmin of score_core over all cores; ties by core id.
    uint32_t choose_core(const Schedule& sched, uint32_t task,
                         CoreScore* score_out = nullptr) const;

    // Places the task's subtasks on the core (pending where predecessors are
    // unplaced), cascades pending placements to a fixed point, and updates
    // ranks. Placement order is appended to newly_placed when given.
    void assign_task(Schedule& sched, RankTable& rt, uint32_t task, uint32_t core,
                     std::vector<uint32_t>* newly_placed = nullptr) const;

    // Marks the task assigned (rank -1) and, for every newly placed subtask,
    // promotes successor subtasks whose predecessors are now all placed into
    // their task's ready set, growing that rank accordingly.
    void update_ranks(RankTable& rt, const Schedule& sched,
                      std::span<const uint32_t> newly_placed, uint32_t assigned_task) const;

    // Full mapping loop; exactly one task is assigned per iteration.
    Schedule run(const MapHook& hook = {}) const;

    // True when every predecessor of the subtask is placed.
    bool ready_now(const Schedule& sched, uint32_t subtask) const;

private:
    const ApplicationGraph& g_;
    const Topology& topo_;
    uint32_t n_types_ = 0;               // topology processor types
    std::vector<double> exec_by_type_;   // subtask x topology type
    std::vector<double> w_avg_;          // per subtask
    std::vector<double> t_avg_;          // per task
    mutable Schedule scratch_;           // reused by score_core

    struct Slot {
        size_t position;
        double start;
    };
    Slot find_slot(const CoreTimeline& line, double earliest, double duration) const;
    double earliest_start(const Schedule& sched, uint32_t subtask, uint32_t core) const;
    void place_one(Schedule& sched, uint32_t subtask, uint32_t core,
                   std::vector<uint32_t>& newly_placed) const;
    void cascade(Schedule& sched, std::vector<uint32_t>& newly_placed) const;
    void place_task(Schedule& sched, uint32_t task, uint32_t core,
                    std::vector<uint32_t>& newly_placed) const;
};

// Convenience wrapper: one-shot mapping.
Schedule map_tasks(const ApplicationGraph& g, const Topology& topo,
                   const MapHook& hook = {});

jdoc schedule_to_json(const Schedule& s, const ApplicationGraph& g, const Topology& topo);
Schedule schedule_from_json(const jdoc& doc, const ApplicationGraph& g, const Topology& topo);

// Absolute tolerance for gap-fitting and validity comparisons, in seconds.
inline constexpr double kTimeTolerance = 1e-9;

} // namespace taskmap
