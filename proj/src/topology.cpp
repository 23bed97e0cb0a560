#include "taskmap/topology.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("topology", msg); }

LevelKind kind_from_string(const std::string& s) {
    if (s == "shared_memory") return LevelKind::SharedMemory;
    if (s == "network") return LevelKind::Network;
    fail("unknown level kind \"" + s + "\" (expected shared_memory or network)");
}

double require_number(const jdoc& node, const char* key, const std::string& where) {
    if (!node.contains(key) || !node[key].is_number())
        fail(where + ": missing numeric field \"" + key + "\"");
    return node[key].get<double>();
}

std::string require_string(const jdoc& node, const char* key, const std::string& where) {
    if (!node.contains(key) || !node[key].is_string() || node[key].get<std::string>().empty())
        fail(where + ": missing non-empty string field \"" + key + "\"");
    return node[key].get<std::string>();
}

} // namespace

std::string to_string(LevelKind kind) {
    return kind == LevelKind::SharedMemory ? "shared_memory" : "network";
}

Topology Topology::from_json(const jdoc& doc, const TopologyLoadOptions& opts) {
    if (!doc.is_object()) fail("document root must be an object");
    if (!doc.contains("processor_types") || !doc["processor_types"].is_array())
        fail("missing \"processor_types\" list");
    if (!doc.contains("root") || !doc["root"].is_object())
        fail("missing \"root\" level object");

    Topology t;
    std::set<std::string> seen_types;
    for (const jdoc& entry : doc["processor_types"]) {
        if (!entry.is_string() || entry.get<std::string>().empty())
            fail("processor_types entries must be non-empty strings");
        std::string name = entry.get<std::string>();
        if (!seen_types.insert(name).second) fail("duplicate processor type \"" + name + "\"");
        t.processor_types_.push_back(name);
    }
    if (t.processor_types_.empty()) fail("processor_types must not be empty");

    std::set<std::string> ids;
    // Iterative preorder walk; work items carry the parent level index.
    struct Item {
        const jdoc* node;
        int32_t parent;
    };
    std::vector<Item> stack{{&doc["root"], -1}};
    while (!stack.empty()) {
        Item item = stack.back();
        stack.pop_back();
        const jdoc& node = *item.node;
        if (!node.is_object()) fail("tree nodes must be objects");

        if (node.value("core", false)) {
            if (item.parent < 0) fail("the root cannot be a core");
            Core c;
            c.id = require_string(node, "id", "core");
            if (!ids.insert(c.id).second) fail("duplicate id \"" + c.id + "\"");
            c.processor_type = require_string(node, "processor_type", "core \"" + c.id + "\"");
            auto it = std::find(t.processor_types_.begin(), t.processor_types_.end(),
                                c.processor_type);
            if (it == t.processor_types_.end())
                fail("core \"" + c.id + "\" has undeclared processor type \"" +
                     c.processor_type + "\"");
            c.type_index = static_cast<uint32_t>(it - t.processor_types_.begin());
            c.parent_level = item.parent;
            t.cores_.push_back(std::move(c));
            continue;
        }

        CommLevel lvl;
        lvl.id = require_string(node, "id", "level");
        if (!ids.insert(lvl.id).second) fail("duplicate id \"" + lvl.id + "\"");
        lvl.kind = kind_from_string(require_string(node, "kind", "level \"" + lvl.id + "\""));
        lvl.bandwidth_bps = require_number(node, "bandwidth_Bps", "level \"" + lvl.id + "\"");
        lvl.latency_s = require_number(node, "latency_s", "level \"" + lvl.id + "\"");
        if (!(lvl.bandwidth_bps > 0.0))
            fail("level \"" + lvl.id + "\" bandwidth must be > 0");
        if (lvl.latency_s < 0.0) fail("level \"" + lvl.id + "\" latency must be >= 0");
        if (!node.contains("children") || !node["children"].is_array() ||
            node["children"].empty())
            fail("level \"" + lvl.id + "\" must have a non-empty children list");
        lvl.parent = item.parent;
        lvl.depth = item.parent < 0 ? 0 : t.levels_[item.parent].depth + 1;

        int32_t index = static_cast<int32_t>(t.levels_.size());
        if (item.parent >= 0)
            t.levels_[item.parent].child_levels.push_back(static_cast<uint32_t>(index));
        t.levels_.push_back(std::move(lvl));

        const jdoc& children = node["children"];
        // Reverse push keeps document order in the preorder result.
        for (auto it = children.rbegin(); it != children.rend(); ++it)
            stack.push_back({&*it, index});
    }

    if (t.cores_.empty()) fail("topology has no cores");
    t.finalize(opts);
    return t;
}

Topology Topology::load_file(const std::filesystem::path& path, const TopologyLoadOptions& opts) {
    std::ifstream in(path);
    if (!in) fail("cannot open \"" + path.string() + "\"");
    jdoc doc;
    try {
        doc = jdoc::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail("parse failure in \"" + path.string() + "\": " + e.what());
    }
    return from_json(doc, opts);
}

void Topology::finalize(const TopologyLoadOptions& opts) {
    type_counts_.assign(processor_types_.size(), 0);
    for (const Core& c : cores_) ++type_counts_[c.type_index];

    for (const CommLevel& lvl : levels_) {
        if (lvl.parent < 0) continue;
        const CommLevel& up = levels_[lvl.parent];
        if (lvl.bandwidth_bps < up.bandwidth_bps || lvl.latency_s > up.latency_s) {
            std::ostringstream os;
            os << "level \"" << lvl.id << "\" is slower than its parent \"" << up.id
               << "\" (bandwidth " << lvl.bandwidth_bps << " vs " << up.bandwidth_bps
               << " Bps, latency " << lvl.latency_s << " vs " << up.latency_s << " s)";
            if (opts.strict) fail(os.str());
            warnings_.push_back(os.str());
        }
    }

    const size_t n = cores_.size();
    // Root-to-parent level path per core, for pairwise lowest-common-level lookups.
    std::vector<std::vector<int32_t>> paths(n);
    for (size_t i = 0; i < n; ++i) {
        for (int32_t l = cores_[i].parent_level; l >= 0; l = levels_[l].parent)
            paths[i].push_back(l);
        std::reverse(paths[i].begin(), paths[i].end());
    }

    common_.assign(n * n, -1);
    double lat_sum = 0.0, inv_bw_sum = 0.0;
    for (size_t a = 0; a < n; ++a) {
        for (size_t b = a + 1; b < n; ++b) {
            size_t k = 0;
            while (k < paths[a].size() && k < paths[b].size() && paths[a][k] == paths[b][k]) ++k;
            if (k == 0) fail("cores \"" + cores_[a].id + "\" and \"" + cores_[b].id +
                             "\" share no level");
            int32_t lca = paths[a][k - 1];
            common_[a * n + b] = lca;
            common_[b * n + a] = lca;
            lat_sum += levels_[lca].latency_s;
            inv_bw_sum += 1.0 / levels_[lca].bandwidth_bps;
        }
    }
    if (n > 1) {
        const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
        mean_pair_latency_ = lat_sum / pairs;
        mean_pair_inv_bw_ = inv_bw_sum / pairs;
    }
}

std::optional<uint32_t> Topology::core_index(const std::string& id) const {
    for (size_t i = 0; i < cores_.size(); ++i)
        if (cores_[i].id == id) return static_cast<uint32_t>(i);
    return std::nullopt;
}

std::optional<uint32_t> Topology::type_index(const std::string& name) const {
    for (size_t i = 0; i < processor_types_.size(); ++i)
        if (processor_types_[i] == name) return static_cast<uint32_t>(i);
    return std::nullopt;
}

std::vector<std::string> Topology::core_path(uint32_t core) const {
    std::vector<std::string> out;
    for (int32_t l = cores_[core].parent_level; l >= 0; l = levels_[l].parent)
        out.push_back(levels_[l].id);
    std::reverse(out.begin(), out.end());
    return out;
}

jdoc Topology::to_json() const {
    // Children are emitted levels-first, then cores, each in load order.
    std::vector<std::vector<uint32_t>> cores_under(levels_.size());
    for (uint32_t i = 0; i < cores_.size(); ++i)
        cores_under[cores_[i].parent_level].push_back(i);

    std::function<jdoc(uint32_t)> emit = [&](uint32_t li) {
        const CommLevel& lvl = levels_[li];
        jdoc node;
        node["id"] = lvl.id;
        node["kind"] = to_string(lvl.kind);
        node["bandwidth_Bps"] = lvl.bandwidth_bps;
        node["latency_s"] = lvl.latency_s;
        jdoc children = jdoc::array();
        for (uint32_t child : lvl.child_levels) children.push_back(emit(child));
        for (uint32_t ci : cores_under[li]) {
            jdoc c;
            c["id"] = cores_[ci].id;
            c["core"] = true;
            c["processor_type"] = cores_[ci].processor_type;
            children.push_back(std::move(c));
        }
        node["children"] = std::move(children);
        return node;
    };

    jdoc doc;
    doc["processor_types"] = processor_types_;
    doc["root"] = emit(0);
    return doc;
}

uint64_t Topology::content_hash() const {
    const std::string text = to_json().dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace taskmap
