#include "taskmap/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taskmap/error.hpp"

namespace taskmap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ValidationError("graph", msg); }

} // namespace

ApplicationGraph::Builder& ApplicationGraph::Builder::add_task(const std::string& id) {
    tasks_.push_back({id, {}});
    return *this;
}

ApplicationGraph::Builder& ApplicationGraph::Builder::add_subtask(
    const std::string& id, const std::map<std::string, double>& exec_time) {
    if (tasks_.empty()) fail("add_subtask before any add_task");
    tasks_.back().subtasks.push_back({id, exec_time});
    return *this;
}

ApplicationGraph::Builder& ApplicationGraph::Builder::add_subtask(
    const std::string& task_id, const std::string& id,
    const std::map<std::string, double>& exec_time) {
    for (PendingTask& t : tasks_) {
        if (t.id == task_id) {
            t.subtasks.push_back({id, exec_time});
            return *this;
        }
    }
    fail("add_subtask references unknown task \"" + task_id + "\"");
}

ApplicationGraph::Builder& ApplicationGraph::Builder::add_edge(const std::string& src,
                                                               const std::string& dst,
                                                               uint64_t volume_bytes) {
    edges_.push_back({src, dst, volume_bytes});
    return *this;
}

ApplicationGraph ApplicationGraph::Builder::build() {
    ApplicationGraph g;
    if (tasks_.empty()) fail("graph must contain at least one task");

    for (const PendingTask& pt : tasks_) {
        if (pt.id.empty()) fail("task ids must be non-empty");
        if (g.task_by_id_.count(pt.id)) fail("duplicate task id \"" + pt.id + "\"");
        if (pt.subtasks.empty()) fail("task \"" + pt.id + "\" has no subtasks");
        uint32_t ti = static_cast<uint32_t>(g.tasks_.size());
        g.task_by_id_[pt.id] = ti;
        Task task;
        task.id = pt.id;
        for (const PendingSubtask& ps : pt.subtasks) {
            if (ps.id.empty()) fail("subtask ids must be non-empty");
            if (g.subtask_by_id_.count(ps.id)) fail("duplicate subtask id \"" + ps.id + "\"");
            if (ps.exec_time.empty())
                fail("subtask \"" + ps.id + "\" has no execution times");
            uint32_t si = static_cast<uint32_t>(g.subtasks_.size());
            g.subtask_by_id_[ps.id] = si;
            Subtask s;
            s.id = ps.id;
            s.task = ti;
            s.index_in_task = static_cast<uint32_t>(task.subtasks.size());
            if (g.exec_types_.empty() && g.subtasks_.empty()) {
                for (const auto& [type, secs] : ps.exec_time) g.exec_types_.push_back(type);
            }
            if (ps.exec_time.size() != g.exec_types_.size())
                fail("subtask \"" + ps.id + "\" lists a different processor-type set");
            s.exec_time.reserve(g.exec_types_.size());
            for (const std::string& type : g.exec_types_) {
                auto it = ps.exec_time.find(type);
                if (it == ps.exec_time.end())
                    fail("subtask \"" + ps.id + "\" missing time for processor type \"" +
                         type + "\"");
                if (!(it->second > 0.0))
                    fail("subtask \"" + ps.id + "\" time for type \"" + type +
                         "\" must be > 0");
                s.exec_time.push_back(it->second);
            }
            task.subtasks.push_back(si);
            g.subtasks_.push_back(std::move(s));
        }
        g.tasks_.push_back(std::move(task));
    }

    // Merge parallel edges by summed volume, keep first-seen order.
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> edge_at;
    for (const PendingEdge& pe : edges_) {
        auto si = g.subtask_by_id_.find(pe.src);
        if (si == g.subtask_by_id_.end())
            fail("edge references unknown subtask \"" + pe.src + "\"");
        auto di = g.subtask_by_id_.find(pe.dst);
        if (di == g.subtask_by_id_.end())
            fail("edge references unknown subtask \"" + pe.dst + "\"");
        if (pe.volume_bytes == 0)
            fail("edge " + pe.src + " -> " + pe.dst + " must carry a positive volume");
        uint32_t src = si->second, dst = di->second;
        if (g.subtasks_[src].task == g.subtasks_[dst].task)
            fail("edge " + pe.src + " -> " + pe.dst + " connects subtasks of the same task");
        auto [it, inserted] =
            edge_at.try_emplace({src, dst}, static_cast<uint32_t>(g.edges_.size()));
        if (inserted)
            g.edges_.push_back({src, dst, pe.volume_bytes});
        else
            g.edges_[it->second].volume_bytes += pe.volume_bytes;
    }

    g.build_adjacency();
    g.check_acyclic();
    return g;
}

ApplicationGraph ApplicationGraph::from_json(const jdoc& doc) {
    if (!doc.is_object()) fail("document root must be an object");
    if (!doc.contains("tasks") || !doc["tasks"].is_array())
        fail("missing \"tasks\" list");

    Builder b;
    for (const jdoc& tnode : doc["tasks"]) {
        if (!tnode.is_object() || !tnode.contains("id") || !tnode["id"].is_string())
            fail("task entries need a string \"id\"");
        b.add_task(tnode["id"].get<std::string>());
        if (!tnode.contains("subtasks") || !tnode["subtasks"].is_array())
            fail("task \"" + tnode["id"].get<std::string>() + "\" needs a \"subtasks\" list");
        for (const jdoc& snode : tnode["subtasks"]) {
            if (!snode.is_object() || !snode.contains("id") || !snode["id"].is_string())
                fail("subtask entries need a string \"id\"");
            if (!snode.contains("exec_time") || !snode["exec_time"].is_object())
                fail("subtask \"" + snode["id"].get<std::string>() +
                     "\" needs an \"exec_time\" object");
            std::map<std::string, double> times;
            for (auto it = snode["exec_time"].begin(); it != snode["exec_time"].end(); ++it) {
                if (!it.value().is_number())
                    fail("subtask \"" + snode["id"].get<std::string>() +
                         "\" exec_time values must be numbers");
                times[it.key()] = it.value().get<double>();
            }
            b.add_subtask(snode["id"].get<std::string>(), times);
        }
    }
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) fail("\"edges\" must be a list");
        for (const jdoc& enode : doc["edges"]) {
            if (!enode.is_object() || !enode.contains("src") || !enode.contains("dst") ||
                !enode.contains("volume_bytes") || !enode["src"].is_string() ||
                !enode["dst"].is_string() || !enode["volume_bytes"].is_number_unsigned())
                fail("edge entries need string \"src\"/\"dst\" and unsigned \"volume_bytes\"");
            b.add_edge(enode["src"].get<std::string>(), enode["dst"].get<std::string>(),
                       enode["volume_bytes"].get<uint64_t>());
        }
    }
    return b.build();
}

ApplicationGraph ApplicationGraph::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open \"" + path.string() + "\"");
    jdoc doc;
    try {
        doc = jdoc::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail("parse failure in \"" + path.string() + "\": " + e.what());
    }
    return from_json(doc);
}

jdoc ApplicationGraph::to_json() const {
    jdoc doc;
    jdoc tasks = jdoc::array();
    for (const Task& t : tasks_) {
        jdoc tnode;
        tnode["id"] = t.id;
        jdoc subtasks = jdoc::array();
        for (uint32_t si : t.subtasks) {
            const Subtask& s = subtasks_[si];
            jdoc snode;
            snode["id"] = s.id;
            jdoc times;
            for (size_t k = 0; k < exec_types_.size(); ++k) times[exec_types_[k]] = s.exec_time[k];
            snode["exec_time"] = std::move(times);
            subtasks.push_back(std::move(snode));
        }
        tnode["subtasks"] = std::move(subtasks);
        tasks.push_back(std::move(tnode));
    }
    doc["tasks"] = std::move(tasks);
    jdoc edges = jdoc::array();
    for (const CommEdge& e : edges_) {
        jdoc enode;
        enode["src"] = subtasks_[e.src].id;
        enode["dst"] = subtasks_[e.dst].id;
        enode["volume_bytes"] = e.volume_bytes;
        edges.push_back(std::move(enode));
    }
    doc["edges"] = std::move(edges);
    return doc;
}

std::optional<uint32_t> ApplicationGraph::task_index(const std::string& id) const {
    auto it = task_by_id_.find(id);
    if (it == task_by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<uint32_t> ApplicationGraph::subtask_index(const std::string& id) const {
    auto it = subtask_by_id_.find(id);
    if (it == subtask_by_id_.end()) return std::nullopt;
    return it->second;
}

uint32_t ApplicationGraph::require_subtask(const std::string& id) const {
    auto idx = subtask_index(id);
    if (!idx) fail("unknown subtask \"" + id + "\"");
    return *idx;
}

std::optional<uint32_t> ApplicationGraph::exec_type_index(const std::string& name) const {
    for (size_t i = 0; i < exec_types_.size(); ++i)
        if (exec_types_[i] == name) return static_cast<uint32_t>(i);
    return std::nullopt;
}

std::optional<uint32_t> ApplicationGraph::chain_predecessor(uint32_t s) const {
    const Subtask& st = subtasks_[s];
    if (st.index_in_task == 0) return std::nullopt;
    return tasks_[st.task].subtasks[st.index_in_task - 1];
}

std::optional<uint32_t> ApplicationGraph::chain_successor(uint32_t s) const {
    const Subtask& st = subtasks_[s];
    const Task& t = tasks_[st.task];
    if (st.index_in_task + 1 >= t.subtasks.size()) return std::nullopt;
    return t.subtasks[st.index_in_task + 1];
}

std::vector<uint32_t> ApplicationGraph::predecessors(uint32_t s) const {
    std::vector<uint32_t> out;
    if (auto chain = chain_predecessor(s)) out.push_back(*chain);
    for (uint32_t e : in_edges(s)) out.push_back(edges_[e].src);
    return out;
}

std::vector<uint32_t> ApplicationGraph::predecessors(const std::string& id) const {
    return predecessors(require_subtask(id));
}

std::vector<uint32_t> ApplicationGraph::successors(uint32_t s) const {
    std::vector<uint32_t> out;
    if (auto chain = chain_successor(s)) out.push_back(*chain);
    for (uint32_t e : out_edges(s)) out.push_back(edges_[e].dst);
    return out;
}

double ApplicationGraph::avg_exec_time(uint32_t s, const Topology& topo) const {
    const Subtask& st = subtasks_[s];
    double sum = 0.0;
    for (size_t ti = 0; ti < topo.processor_types().size(); ++ti) {
        uint32_t count = topo.cores_of_type(static_cast<uint32_t>(ti));
        if (count == 0) continue;
        auto gi = exec_type_index(topo.processor_types()[ti]);
        if (!gi)
            fail("subtask \"" + st.id + "\" has no time for processor type \"" +
                 topo.processor_types()[ti] + "\"");
        sum += st.exec_time[*gi] * count;
    }
    return sum / static_cast<double>(topo.core_count());
}

double ApplicationGraph::total_avg_time(uint32_t t, const Topology& topo) const {
    double sum = 0.0;
    for (uint32_t si : tasks_[t].subtasks) sum += avg_exec_time(si, topo);
    return sum;
}

void ApplicationGraph::build_adjacency() {
    const size_t n = subtasks_.size();
    in_off_.assign(n + 1, 0);
    out_off_.assign(n + 1, 0);
    for (const CommEdge& e : edges_) {
        ++in_off_[e.dst + 1];
        ++out_off_[e.src + 1];
    }
    for (size_t i = 0; i < n; ++i) {
        in_off_[i + 1] += in_off_[i];
        out_off_[i + 1] += out_off_[i];
    }
    in_edges_.resize(edges_.size());
    out_edges_.resize(edges_.size());
    std::vector<uint32_t> in_pos(in_off_.begin(), in_off_.end() - 1);
    std::vector<uint32_t> out_pos(out_off_.begin(), out_off_.end() - 1);
    for (uint32_t ei = 0; ei < edges_.size(); ++ei) {
        in_edges_[in_pos[edges_[ei].dst]++] = ei;
        out_edges_[out_pos[edges_[ei].src]++] = ei;
    }
}

std::vector<uint32_t> ApplicationGraph::topological_order() const {
    const size_t n = subtasks_.size();
    std::vector<uint32_t> indegree(n, 0);
    for (uint32_t s = 0; s < n; ++s) {
        if (chain_predecessor(s)) ++indegree[s];
        indegree[s] += static_cast<uint32_t>(in_edges(s).size());
    }
    std::vector<uint32_t> queue;
    queue.reserve(n);
    for (uint32_t s = 0; s < n; ++s)
        if (indegree[s] == 0) queue.push_back(s);
    std::vector<uint32_t> order;
    order.reserve(n);
    for (size_t head = 0; head < queue.size(); ++head) {
        uint32_t s = queue[head];
        order.push_back(s);
        for (uint32_t succ : successors(s))
            if (--indegree[succ] == 0) queue.push_back(succ);
    }
    return order;
}

void ApplicationGraph::check_acyclic() const {
    std::vector<uint32_t> order = topological_order();
    if (order.size() == subtasks_.size()) return;

    // Some subtasks never reached indegree zero; walk the leftovers to name
    // one cycle in the diagnostic.
    std::vector<uint8_t> in_order(subtasks_.size(), 0);
    for (uint32_t s : order) in_order[s] = 1;
    uint32_t start = 0;
    while (in_order[start]) ++start;

    std::vector<int32_t> came_from(subtasks_.size(), -1);
    std::vector<uint8_t> visited(subtasks_.size(), 0);
    uint32_t cur = start;
    while (!visited[cur]) {
        visited[cur] = 1;
        for (uint32_t p : predecessors(cur)) {
            if (!in_order[p]) {
                came_from[cur] = static_cast<int32_t>(p);
                cur = p;
                break;
            }
        }
    }
    std::vector<std::string> cycle{subtasks_[cur].id};
    for (uint32_t s = static_cast<uint32_t>(came_from[cur]); s != cur && came_from[s] >= 0;
         s = static_cast<uint32_t>(came_from[s]))
        cycle.push_back(subtasks_[s].id);

    std::ostringstream os;
    os << "precedence cycle through:";
    for (auto it = cycle.rbegin(); it != cycle.rend(); ++it) os << ' ' << *it;
    fail(os.str());
}

} // namespace taskmap
