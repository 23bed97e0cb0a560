#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskmap/batch.hpp"
#include "taskmap/error.hpp"
#include "taskmap/graph.hpp"

using namespace taskmap;

namespace {

std::map<std::string, double> times(double a, double b) {
    return {{"fast", a}, {"slow", b}};
}

ApplicationGraph diamond() {
    // t0 -> t1, t0 -> t2, t1 -> t3, t2 -> t3, each task a two-subtask chain.
    ApplicationGraph::Builder b;
    for (int i = 0; i < 4; ++i) {
        std::string t = "t" + std::to_string(i);
        b.add_task(t);
        b.add_subtask(t + "_s0", times(1.0 + i, 2.0 + i));
        b.add_subtask(t + "_s1", times(0.5, 0.5));
    }
    b.add_edge("t0_s1", "t1_s0", 100);
    b.add_edge("t0_s1", "t2_s0", 200);
    b.add_edge("t1_s1", "t3_s0", 300);
    b.add_edge("t2_s1", "t3_s0", 400);
    return b.build();
}

} // namespace

TEST_CASE("builder produces the declared structure") {
    ApplicationGraph g = diamond();
    CHECK(g.task_count() == 4);
    CHECK(g.subtask_count() == 8);
    CHECK(g.edge_count() == 4);
    CHECK(g.exec_types() == std::vector<std::string>{"fast", "slow"});

    REQUIRE(g.task_index("t2").has_value());
    const Task& t2 = g.task(*g.task_index("t2"));
    REQUIRE(t2.subtasks.size() == 2);
    CHECK(g.subtask(t2.subtasks[0]).id == "t2_s0");
    CHECK(g.subtask(t2.subtasks[1]).id == "t2_s1");
    CHECK(g.subtask(t2.subtasks[1]).index_in_task == 1);

    uint32_t s1 = g.require_subtask("t2_s1");
    CHECK(g.chain_predecessor(s1) == g.subtask_index("t2_s0"));
    CHECK(g.chain_successor(s1) == std::nullopt);
    CHECK_THROWS_AS(g.require_subtask("nope"), ValidationError);
}

TEST_CASE("predecessors combine the chain and incoming edges") {
    ApplicationGraph g = diamond();
    std::vector<uint32_t> preds = g.predecessors("t3_s0");
    std::vector<std::string> ids;
    for (uint32_t p : preds) ids.push_back(g.subtask(p).id);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{"t1_s1", "t2_s1"});

    preds = g.predecessors("t3_s1");
    REQUIRE(preds.size() == 1);
    CHECK(g.subtask(preds[0]).id == "t3_s0");

    CHECK(g.predecessors("t0_s0").empty());
}

TEST_CASE("parallel edges merge by summing volume") {
    ApplicationGraph::Builder b;
    b.add_task("a");
    b.add_subtask("a_s0", {{"p", 1.0}});
    b.add_task("b");
    b.add_subtask("b_s0", {{"p", 1.0}});
    b.add_edge("a_s0", "b_s0", 10);
    b.add_edge("a_s0", "b_s0", 32);
    ApplicationGraph g = b.build();
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edge(0).volume_bytes == 42);
}

TEST_CASE("builder rejects malformed graphs") {
    auto build = [](auto&& fill) {
        ApplicationGraph::Builder b;
        fill(b);
        return b.build();
    };

    CHECK_THROWS_AS(build([](auto&) {}), ValidationError);                 // no tasks
    CHECK_THROWS_AS(build([](auto& b) { b.add_task("t"); }), ValidationError); // no subtasks
    CHECK_THROWS_AS(build([](auto& b) {
        b.add_task("t");
        b.add_subtask("s", {{"p", 0.0}}); // non-positive time
    }), ValidationError);
    CHECK_THROWS_AS(build([](auto& b) {
        b.add_task("t");
        b.add_subtask("s", {{"p", 1.0}});
        b.add_subtask("s", {{"p", 1.0}}); // duplicate id
    }), ValidationError);
    CHECK_THROWS_AS(build([](auto& b) {
        b.add_task("t");
        b.add_subtask("s0", {{"p", 1.0}});
        b.add_subtask("s1", {{"q", 1.0}}); // inconsistent type set
    }), ValidationError);
    CHECK_THROWS_AS(build([](auto& b) {
        b.add_task("t");
        b.add_subtask("s0", {{"p", 1.0}});
        b.add_subtask("s1", {{"p", 1.0}});
        b.add_edge("s0", "s1", 5); // edge within one task
    }), ValidationError);
    CHECK_THROWS_AS(build([](auto& b) {
        b.add_task("t");
        b.add_subtask("s0", {{"p", 1.0}});
        b.add_task("u");
        b.add_subtask("u0", {{"p", 1.0}});
        b.add_edge("s0", "u0", 0); // zero volume
    }), ValidationError);
}

TEST_CASE("cycles through edges are rejected") {
    ApplicationGraph::Builder b;
    b.add_task("a");
    b.add_subtask("a_s0", {{"p", 1.0}});
    b.add_task("c");
    b.add_subtask("c_s0", {{"p", 1.0}});
    b.add_edge("a_s0", "c_s0", 1);
    b.add_edge("c_s0", "a_s0", 1);
    CHECK_THROWS_WITH_AS(b.build(), doctest::Contains("cycle"), ValidationError);
}

TEST_CASE("json round trip preserves the graph") {
    ApplicationGraph g = diamond();
    jdoc doc = g.to_json();
    ApplicationGraph h = ApplicationGraph::from_json(doc);
    CHECK(h.to_json() == doc);
    CHECK(h.task_count() == g.task_count());
    CHECK(h.edge_count() == g.edge_count());

    // Schema shape.
    REQUIRE(doc.contains("tasks"));
    REQUIRE(doc.contains("edges"));
    const jdoc& first = doc["tasks"][0];
    CHECK(first["id"] == "t0");
    CHECK(first["subtasks"][0]["exec_time"]["fast"] == 1.0);
    const jdoc& e = doc["edges"][0];
    CHECK(e["src"] == "t0_s1");
    CHECK(e["dst"] == "t1_s0");
    CHECK(e["volume_bytes"] == 100);
}

TEST_CASE("from_json rejects schema violations") {
    jdoc good = diamond().to_json();

    jdoc missing = good;
    missing.erase("tasks");
    CHECK_THROWS_AS(ApplicationGraph::from_json(missing), ValidationError);

    jdoc negative = good;
    negative["edges"][0]["volume_bytes"] = -5;
    CHECK_THROWS_AS(ApplicationGraph::from_json(negative), ValidationError);

    jdoc bad_time = good;
    bad_time["tasks"][0]["subtasks"][0]["exec_time"]["fast"] = -1.0;
    CHECK_THROWS_AS(ApplicationGraph::from_json(bad_time), ValidationError);
}

TEST_CASE("topological order respects chains and edges") {
    ApplicationGraph g = diamond();
    std::vector<uint32_t> order = g.topological_order();
    REQUIRE(order.size() == g.subtask_count());
    std::vector<uint32_t> pos(order.size());
    for (uint32_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (uint32_t s = 0; s < g.subtask_count(); ++s)
        for (uint32_t p : g.predecessors(s)) CHECK(pos[p] < pos[s]);
}

TEST_CASE("average execution time weights by core counts") {
    Topology topo = tiny_topology(3, "mixed"); // c0 fast, c1 slow, c2 fast
    ApplicationGraph g = diamond();
    uint32_t s = g.require_subtask("t0_s0"); // fast 1.0, slow 2.0
    CHECK(g.avg_exec_time(s, topo) == doctest::Approx((1.0 + 2.0 + 1.0) / 3.0));
    uint32_t t = *g.task_index("t0");
    CHECK(g.total_avg_time(t, topo) ==
          doctest::Approx((1.0 + 2.0 + 1.0) / 3.0 + 0.5));
}

TEST_CASE("avg_exec_time requires a time for every core type") {
    jdoc doc;
    doc["processor_types"] = {"other"};
    doc["root"] = {{"id", "mem"},
                   {"kind", "shared_memory"},
                   {"bandwidth_Bps", 1e9},
                   {"latency_s", 1e-6},
                   {"children", {{{"id", "c0"}, {"core", true}, {"processor_type", "other"}}}}};
    Topology topo = Topology::from_json(doc);
    ApplicationGraph g = diamond(); // carries fast/slow only
    CHECK_THROWS_AS(g.avg_exec_time(0, topo), ValidationError);
}
