#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "dhn/network.hpp"
#include "dhn/types.hpp"
#include "instances.hpp"

using namespace dhn;

namespace {

// The expanded form of the smallest sensible network: one plant, one
// consumer, one street.  Mirrors what the single-sided loader produces.
NetworkGraph tiny_graph() {
  NetworkGraph g;
  auto node = [&](const std::string& id, NodeRole role) {
    Node n;
    n.id = id;
    n.role = role;
    g.nodes.push_back(n);
  };
  node("house", NodeRole::ConsumerFeed);
  node("house_r", NodeRole::ConsumerReturn);
  node("plant", NodeRole::ProducerFeed);
  node("plant_r", NodeRole::ProducerReturn);

  auto edge = [&](const std::string& id, EdgeRole role, const std::string& t,
                  const std::string& h, double length = 0.0) -> Edge& {
    Edge e;
    e.id = id;
    e.role = role;
    e.tail_id = t;
    e.head_id = h;
    e.length = length;
    g.edges.push_back(e);
    return g.edges.back();
  };
  edge("main", EdgeRole::PipeFeed, "plant", "house", 60.0);
  edge("main_r", EdgeRole::PipeReturn, "house_r", "plant_r", 60.0);
  Edge& hs = edge("house_hs", EdgeRole::HeatingSystem, "house", "house_r");
  hs.zeta = 1e8;
  hs.q_max = 1e-3;
  hs.consumer.demand = 25000.0;
  hs.consumer.radiator_coeff = 450.0;
  hs.consumer.radiator_exp = 1.42;
  Edge& bp = edge("house_bp", EdgeRole::Bypass, "house", "house_r");
  bp.zeta = 1e8;
  bp.q_max = 1e-3;
  edge("plant_sup", EdgeRole::ProducerFeed, "plant_r", "plant");
  edge("plant_ret", EdgeRole::ProducerReturn, "plant_r", "plant");
  return g;
}

void expect_error(NetworkGraph g, const std::string& fragment) {
  try {
    g.finalize();
    FAIL("expected a validation error mentioning: " << fragment);
  } catch (const ValidationError& err) {
    CHECK(std::string(err.what()).find(fragment) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("finalize builds sorted index maps") {
  NetworkGraph g = tiny_graph();
  g.finalize();

  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 6);
  CHECK(g.num_pipes() == 2);
  CHECK(g.num_consumers() == 1);
  CHECK(g.num_producers() == 1);
  CHECK(g.consumer_edges.size() == 2);
  CHECK(g.producer_return.size() == 1);

  // ids come out sorted regardless of insertion order
  for (int i = 1; i < g.num_nodes(); ++i)
    CHECK(g.nodes[i - 1].id < g.nodes[i].id);
  for (int i = 1; i < g.num_edges(); ++i)
    CHECK(g.edges[i - 1].id < g.edges[i].id);

  CHECK(g.node_index("house") == 0);
  CHECK(g.node_index("plant_r") == 3);
  CHECK(g.node_index("nope") == -1);
  CHECK(g.edge_index("main") == g.pipes[0]);
  CHECK(g.edge_index("nope") == -1);

  // endpoint resolution
  const Edge& main = g.edges[g.edge_index("main")];
  CHECK(main.tail == g.node_index("plant"));
  CHECK(main.head == g.node_index("house"));
}

TEST_CASE("reference node is the return node of the first producer") {
  NetworkGraph g = tiny_graph();
  g.finalize();
  CHECK(g.reference_node == g.node_index("plant_r"));

  Problem desk = testing::make_desk_problem();
  // producers sorted by id: pa before pb
  CHECK(desk.graph.reference_node == desk.graph.node_index("pa_r"));
}

TEST_CASE("plant legs count on one side only") {
  NetworkGraph g = tiny_graph();
  g.finalize();
  const Edge& sup = g.edges[g.edge_index("plant_sup")];
  const Edge& ret = g.edges[g.edge_index("plant_ret")];
  CHECK(sup.counts_at_head());
  CHECK_FALSE(ret.counts_at_head());
  CHECK(ret.counts_at_tail());
  CHECK_FALSE(sup.counts_at_tail());
  // ordinary edges count on both sides
  const Edge& main = g.edges[g.edge_index("main")];
  CHECK(main.counts_at_tail());
  CHECK(main.counts_at_head());
}

TEST_CASE("partner map pairs consumer edges and plant legs") {
  NetworkGraph g = tiny_graph();
  g.finalize();
  int hs = g.edge_index("house_hs");
  int bp = g.edge_index("house_bp");
  int sup = g.edge_index("plant_sup");
  int ret = g.edge_index("plant_ret");
  CHECK(g.partner[hs] == bp);
  CHECK(g.partner[bp] == hs);
  CHECK(g.partner[sup] == ret);
  CHECK(g.partner[ret] == sup);
  CHECK(g.partner[g.edge_index("main")] == -1);
}

TEST_CASE("incidence lists match edge endpoints") {
  Problem p = testing::make_desk_problem();
  const NetworkGraph& g = p.graph;
  std::vector<int> in_count(g.num_nodes(), 0), out_count(g.num_nodes(), 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    ++out_count[g.edges[e].tail];
    ++in_count[g.edges[e].head];
  }
  for (int n = 0; n < g.num_nodes(); ++n) {
    CHECK(static_cast<int>(g.in_edges[n].size()) == in_count[n]);
    CHECK(static_cast<int>(g.out_edges[n].size()) == out_count[n]);
    for (int e : g.in_edges[n]) CHECK(g.edges[e].head == n);
    for (int e : g.out_edges[n]) CHECK(g.edges[e].tail == n);
  }
}

TEST_CASE("desk instance dimensions") {
  Problem p = testing::make_desk_problem();
  // 12 consumers + 2 plants, mirrored
  CHECK(p.graph.num_nodes() == 28);
  CHECK(p.graph.num_producers() == 2);
  CHECK(p.graph.num_consumers() == 12);
  // 9 horizontal + 8 vertical + 2 feeders + 1 diagonal, each mirrored
  CHECK(p.graph.num_pipes() == 40);
  CHECK(p.graph.num_edges() == 40 + 2 * 12 + 2 * 2);
}

TEST_CASE("structural validation rejects malformed graphs") {
  {
    NetworkGraph g;
    expect_error(g, "network has no nodes");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges.clear();
    expect_error(g, "network has no edges");
  }
  {
    NetworkGraph g = tiny_graph();
    g.nodes.push_back(g.nodes.front());
    expect_error(g, "duplicate node id");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges.push_back(g.edges.front());
    expect_error(g, "duplicate edge id");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges[0].tail_id = "ghost";
    expect_error(g, "references unknown node 'ghost'");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges[0].head_id = g.edges[0].tail_id;
    expect_error(g, "is a self loop");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges[0].length = 0.0;
    expect_error(g, "needs a positive length");
  }
}

TEST_CASE("role rules tie edges to compatible endpoints") {
  {
    // feed pipe ending on a return-side node
    NetworkGraph g = tiny_graph();
    g.edges[0].head_id = "house_r";
    expect_error(g, "feed pipe must connect feed-side nodes");
  }
  {
    NetworkGraph g = tiny_graph();
    g.edges[1].tail_id = "house";
    expect_error(g, "return pipe must connect return-side nodes");
  }
  {
    // heating system flipped backwards
    NetworkGraph g = tiny_graph();
    std::swap(g.edges[2].tail_id, g.edges[2].head_id);
    expect_error(g, "consumer edge must run consumer-feed -> consumer-return");
  }
  {
    NetworkGraph g = tiny_graph();
    std::swap(g.edges[4].tail_id, g.edges[4].head_id);
    expect_error(g, "plant leg must run producer-return -> producer-feed");
  }
}

TEST_CASE("pairing rules") {
  {
    // bypass without its heating system
    NetworkGraph g = tiny_graph();
    g.edges.erase(g.edges.begin() + 2);
    expect_error(g, "consumer at node");
  }
  {
    // plant with only a feed leg
    NetworkGraph g = tiny_graph();
    g.edges.erase(g.edges.begin() + 5);
    expect_error(g, "producer at node");
  }
  {
    // no producer at all: drop the plant and rewire the street to a junction
    NetworkGraph g = tiny_graph();
    g.nodes[2].role = NodeRole::JunctionFeed;
    g.nodes[3].role = NodeRole::JunctionReturn;
    g.edges.erase(g.edges.begin() + 4, g.edges.begin() + 6);
    expect_error(g, "network has no producer");
  }
  {
    // disconnected node
    NetworkGraph g = tiny_graph();
    Node lone;
    lone.id = "zzz";
    lone.role = NodeRole::JunctionFeed;
    g.nodes.push_back(lone);
    expect_error(g, "is isolated");
  }
}

TEST_CASE("state layout partitions the vector") {
  Problem p = testing::make_minimal_problem();
  StateLayout lay(p.graph);
  CHECK(lay.size() == 2 * (4 + 6));
  CHECK(lay.flow(0) == 0);
  CHECK(lay.pressure(0) == 6);
  CHECK(lay.theta_node(0) == 10);
  CHECK(lay.theta_exit(0) == 14);
  CHECK(lay.theta_exit(5) == 19);
  // rows cover the same range
  CHECK(lay.row_mass(0) == 0);
  CHECK(lay.row_momentum(0) == 4);
  CHECK(lay.row_energy_node(0) == 10);
  CHECK(lay.row_energy_edge(5) == 19);
}

TEST_CASE("consumer heating system carries its data") {
  Problem p = testing::make_minimal_problem();
  int hs = p.graph.edge_index("house_hs");
  REQUIRE(hs >= 0);
  const Edge& e = p.graph.edges[hs];
  CHECK(e.consumer.demand == 25000.0);
  CHECK(e.consumer.radiator_coeff == 450.0);
  CHECK(e.consumer.radiator_exp == 1.42);
  CHECK(e.zeta > 0.0);
  CHECK(e.q_max > 0.0);
  // bypass sized alongside
  const Edge& b = p.graph.edges[p.graph.edge_index("house_bp")];
  CHECK(b.zeta > 0.0);
  CHECK(b.q_max > 0.0);
}
