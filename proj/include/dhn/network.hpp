#pragma once

#include <string>
#include <vector>

#include "dhn/types.hpp"

namespace dhn {

struct Node {
  std::string id;
  NodeRole role = NodeRole::JunctionFeed;
  double x = 0.0;  // site coordinates, m (informational)
  double y = 0.0;

  bool operator==(const Node&) const = default;
};

// Parameters of a consumer heating system (heating-system edges only).
struct ConsumerData {
  double demand = 0.0;          // W, contracted heat demand
  double radiator_coeff = 0.0;  // W/K^n
  double radiator_exp = 1.0;    // dimensionless exponent n
  double theta_house = 28.0;    // K above ambient, indoor design temperature

  bool operator==(const ConsumerData&) const = default;
};

// Parameters of a plant (producer-feed edges only).  Prices are per W of
// capacity (capex) and per Wh produced (opex).
struct ProducerData {
  double supply_temperature_c = 70.0;  // deg C
  double c_heat_capex = 0.0;           // EUR/W
  double c_heat_opex = 0.0;            // EUR/Wh
  double c_pump_capex = 0.0;           // EUR/W electric
  double c_pump_opex = 0.0;            // EUR/Wh electric

  bool operator==(const ProducerData&) const = default;
};

struct Edge {
  std::string id;
  EdgeRole role = EdgeRole::PipeFeed;
  std::string tail_id;
  std::string head_id;
  int tail = -1;  // node indices, filled by finalize()
  int head = -1;

  double length = 0.0;  // m, pipes only
  double zeta = 0.0;    // Pa s/m^3, valve coefficient (consumer edges)
  double q_max = 0.0;   // m^3/s, fully open flow (consumer edges)

  ConsumerData consumer;  // valid when role == HeatingSystem
  ProducerData producer;  // valid when role == ProducerFeed

  // Plant legs are half-edges: the feed leg is counted only at its head
  // (the feed node), the return leg only at its tail (the return node).
  bool counts_at_tail() const { return role != EdgeRole::ProducerFeed; }
  bool counts_at_head() const { return role != EdgeRole::ProducerReturn; }

  bool operator==(const Edge&) const = default;
};

// Validated directed graph.  Nodes and edges are kept sorted by id so every
// derived index map is reproducible.
struct NetworkGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  // Derived index sets (indices into edges), id-sorted.
  std::vector<int> pipes;           // PipeFeed + PipeReturn
  std::vector<int> heating;         // HeatingSystem
  std::vector<int> consumer_edges;  // HeatingSystem + Bypass
  std::vector<int> producer_feed;   // ProducerFeed
  std::vector<int> producer_return; // ProducerReturn

  // Per-edge positions within the sets above (-1 when not a member).
  std::vector<int> pipe_index;
  std::vector<int> consumer_index;
  std::vector<int> producer_index;

  // Heating system <-> bypass pairing and plant leg pairing.
  std::vector<int> partner;

  // Pressure gauge: return node of the first producer by id.
  int reference_node = -1;

  std::vector<std::vector<int>> in_edges;   // by head
  std::vector<std::vector<int>> out_edges;  // by tail

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_pipes() const { return static_cast<int>(pipes.size()); }
  int num_consumers() const { return static_cast<int>(heating.size()); }
  int num_producers() const { return static_cast<int>(producer_feed.size()); }

  int node_index(const std::string& id) const;  // -1 when absent
  int edge_index(const std::string& id) const;

  // Sorts, resolves endpoints, builds the index sets and checks the
  // structural rules.  Throws ValidationError naming the offending entity.
  void finalize();

  bool operator==(const NetworkGraph& o) const {
    return nodes == o.nodes && edges == o.edges;
  }
};

// State vector ordering for the thermo-hydraulic system:
//   [ flow per edge | pressure per node | temperature per node |
//     exit temperature per edge ]
// Temperatures are offsets above ambient.  Equation rows follow the same
// grouping: mass balance per node, flow/momentum per edge, thermal balance
// per node, exit temperature per edge.
struct StateLayout {
  int n_nodes = 0;
  int n_edges = 0;

  StateLayout() = default;
  explicit StateLayout(const NetworkGraph& g)
      : n_nodes(g.num_nodes()), n_edges(g.num_edges()) {}

  int size() const { return 2 * (n_nodes + n_edges); }

  int flow(int e) const { return e; }
  int pressure(int n) const { return n_edges + n; }
  int theta_node(int n) const { return n_edges + n_nodes + n; }
  int theta_exit(int e) const { return n_edges + 2 * n_nodes + e; }

  int row_mass(int n) const { return n; }
  int row_momentum(int e) const { return n_nodes + e; }
  int row_energy_node(int n) const { return n_nodes + n_edges + n; }
  int row_energy_edge(int e) const { return 2 * n_nodes + n_edges + e; }
};

}  // namespace dhn
