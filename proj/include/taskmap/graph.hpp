#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "taskmap/topology.hpp"

namespace taskmap {

// Unit of execution and placement. exec_time is indexed by the graph's own
// processor-type table (see ApplicationGraph::exec_types), one strictly
// positive duration per type.
struct Subtask {
    std::string id;
    uint32_t task = 0;
    uint32_t index_in_task = 0;
    std::vector<double> exec_time; // seconds, by graph type index
};

// Unit of assignment: an ordered chain of subtasks mapped atomically to one
// core. Subtask k must finish before subtask k+1 starts.
struct Task {
    std::string id;
    std::vector<uint32_t> subtasks; // subtask indexes, chain order
};

// Directed communication between subtasks of two different tasks. Parallel
// edges between the same pair are merged at load time by summing volumes.
struct CommEdge {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint64_t volume_bytes = 0; // > 0
};

// Immutable application model: tasks of ordered subtasks plus inter-task
// communication edges. The combined precedence relation (intra-task chains
// and edges) is validated acyclic at construction. Safe for concurrent reads.
class ApplicationGraph {
public:
    class Builder {
    public:
        Builder& add_task(const std::string& id);
        // Appends a subtask to the most recently added task.
        Builder& add_subtask(const std::string& id, const std::map<std::string, double>& exec_time);
        Builder& add_subtask(const std::string& task_id, const std::string& id,
                             const std::map<std::string, double>& exec_time);
        Builder& add_edge(const std::string& src, const std::string& dst, uint64_t volume_bytes);
        ApplicationGraph build();

    private:
        friend class ApplicationGraph;
        struct PendingSubtask {
            std::string id;
            std::map<std::string, double> exec_time;
        };
        struct PendingTask {
            std::string id;
            std::vector<PendingSubtask> subtasks;
        };
        struct PendingEdge {
            std::string src, dst;
            uint64_t volume_bytes;
        };
        std::vector<PendingTask> tasks_;
        std::vector<PendingEdge> edges_;
    };

    static ApplicationGraph from_json(const jdoc& doc);
    static ApplicationGraph load_file(const std::filesystem::path& path);
    jdoc to_json() const;

    size_t task_count() const { return tasks_.size(); }
    size_t subtask_count() const { return subtasks_.size(); }
    size_t edge_count() const { return edges_.size(); }
    const Task& task(uint32_t i) const { return tasks_[i]; }
    const Subtask& subtask(uint32_t i) const { return subtasks_[i]; }
    const CommEdge& edge(uint32_t i) const { return edges_[i]; }
    const std::vector<Task>& tasks() const { return tasks_; }
    const std::vector<Subtask>& subtasks() const { return subtasks_; }
    const std::vector<CommEdge>& edges() const { return edges_; }

    std::optional<uint32_t> task_index(const std::string& id) const;
    std::optional<uint32_t> subtask_index(const std::string& id) const;
    uint32_t require_subtask(const std::string& id) const; // throws on unknown id

    // Processor-type names this graph carries times for (sorted, identical
    // across subtasks).
    const std::vector<std::string>& exec_types() const { return exec_types_; }
    std::optional<uint32_t> exec_type_index(const std::string& name) const;

    // Incoming/outgoing edge indexes of a subtask.
    std::span<const uint32_t> in_edges(uint32_t s) const {
        return {in_edges_.data() + in_off_[s], in_off_[s + 1] - in_off_[s]};
    }
    std::span<const uint32_t> out_edges(uint32_t s) const {
        return {out_edges_.data() + out_off_[s], out_off_[s + 1] - out_off_[s]};
    }

    // Intra-task predecessor (index_in_task - 1) or nothing.
    std::optional<uint32_t> chain_predecessor(uint32_t s) const;
    std::optional<uint32_t> chain_successor(uint32_t s) const;

    // Union of the chain predecessor and all edge sources targeting s.
    std::vector<uint32_t> predecessors(uint32_t s) const;
    std::vector<uint32_t> predecessors(const std::string& id) const;
    std::vector<uint32_t> successors(uint32_t s) const;

    // Core-count-weighted average execution time of a subtask across the
    // machine: sum of the subtask's time on each core's type, divided by the
    // number of cores. Throws if a core's type has no time entry.
    double avg_exec_time(uint32_t s, const Topology& topo) const;
    // Sum of avg_exec_time over all subtasks of a task.
    double total_avg_time(uint32_t t, const Topology& topo) const;

    // A topological order of the combined precedence relation (always exists
    // for a validated graph).
    std::vector<uint32_t> topological_order() const;

private:
    friend class Builder;
    ApplicationGraph() = default;

    std::vector<Task> tasks_;
    std::vector<Subtask> subtasks_;
    std::vector<CommEdge> edges_;
    std::vector<std::string> exec_types_;
    std::map<std::string, uint32_t> task_by_id_;
    std::map<std::string, uint32_t> subtask_by_id_;
    // CSR adjacency over edge indexes.
    std::vector<uint32_t> in_off_, in_edges_;
    std::vector<uint32_t> out_off_, out_edges_;

    void build_adjacency();
    void check_acyclic() const;
};

} // namespace taskmap
