#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace taskmap {

using jdoc = nlohmann::ordered_json;

enum class LevelKind { SharedMemory, Network };

std::string to_string(LevelKind kind);

// One tier of the communication hierarchy: a shared memory (cache or RAM)
// or a network segment. Moving data through it costs latency + bytes/bandwidth.
struct CommLevel {
    std::string id;
    LevelKind kind = LevelKind::SharedMemory;
    double bandwidth_bps = 0.0; // bytes per second, > 0
    double latency_s = 0.0;     // seconds, >= 0
    int32_t parent = -1;        // level index, -1 for the root
    int32_t depth = 0;          // root is 0
    std::vector<uint32_t> child_levels;
};

struct Core {
    std::string id;
    std::string processor_type;
    uint32_t type_index = 0;  // into processor_types()
    int32_t parent_level = 0; // always a valid level index
};

struct TopologyLoadOptions {
    // Monotonicity violations (a deeper level slower than its parent) are
    // collected as warnings unless strict, in which case loading fails.
    bool strict = false;
};

// Immutable machine description: a tree of communication levels whose leaves
// are cores. Answers two questions: how fast is core c for a processor type,
// and what does it cost to move bytes between two cores. The common-level
// lookup table is precomputed at load time; all reads are thread-safe.
class Topology {
public:
    static Topology from_json(const jdoc& doc, const TopologyLoadOptions& opts = {});
    static Topology load_file(const std::filesystem::path& path,
                              const TopologyLoadOptions& opts = {});
    jdoc to_json() const;

    size_t core_count() const { return cores_.size(); }
    size_t level_count() const { return levels_.size(); }
    const Core& core(uint32_t i) const { return cores_[i]; }
    const CommLevel& level(uint32_t i) const { return levels_[i]; }
    const std::vector<Core>& cores() const { return cores_; }
    const std::vector<std::string>& processor_types() const { return processor_types_; }
    uint32_t cores_of_type(uint32_t type_index) const { return type_counts_[type_index]; }
    std::optional<uint32_t> core_index(const std::string& id) const;
    std::optional<uint32_t> type_index(const std::string& name) const;

    // Level ids from the root down to the core's parent.
    std::vector<std::string> core_path(uint32_t core) const;

    // Deepest level shared by two distinct cores; -1 when a == b.
    int32_t common_level(uint32_t a, uint32_t b) const {
        return common_[a * cores_.size() + b];
    }

    // Cost of moving volume_bytes from src to dst. Zero on the same core:
    // data produced locally needs no transfer.
    double comm_cost(uint32_t src, uint32_t dst, uint64_t volume_bytes) const {
        if (src == dst) return 0.0;
        const CommLevel& l = levels_[static_cast<uint32_t>(common_level(src, dst))];
        return l.latency_s + static_cast<double>(volume_bytes) / l.bandwidth_bps;
    }

    // Coefficients of the pairwise-average cost: mean latency and mean 1/bandwidth
    // over all ordered core pairs a != b. avg_pair_cost(v) is linear in v, which
    // keeps grain-ratio computation O(1) per edge instead of O(cores^2).
    double mean_pair_latency() const { return mean_pair_latency_; }
    double mean_pair_inv_bandwidth() const { return mean_pair_inv_bw_; }
    double avg_pair_cost(uint64_t volume_bytes) const {
        return mean_pair_latency_ + static_cast<double>(volume_bytes) * mean_pair_inv_bw_;
    }

    // FNV-1a over the canonical serialization; used for report config echoes.
    uint64_t content_hash() const;

    // Monotonicity notes collected during a non-strict load.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::vector<CommLevel> levels_; // preorder, root at 0
    std::vector<Core> cores_;       // document order
    std::vector<std::string> processor_types_;
    std::vector<uint32_t> type_counts_;
    std::vector<int32_t> common_; // core x core -> level index, -1 on diagonal
    std::vector<std::string> warnings_;
    double mean_pair_latency_ = 0.0;
    double mean_pair_inv_bw_ = 0.0;

    void finalize(const TopologyLoadOptions& opts);
};

} // namespace taskmap
