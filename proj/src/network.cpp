#include "dhn/network.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dhn {

std::string to_string(NodeRole r) {
  switch (r) {
    case NodeRole::ProducerFeed: return "producer-feed";
    case NodeRole::ProducerReturn: return "producer-return";
    case NodeRole::ConsumerFeed: return "consumer-feed";
    case NodeRole::ConsumerReturn: return "consumer-return";
    case NodeRole::JunctionFeed: return "junction-feed";
    case NodeRole::JunctionReturn: return "junction-return";
  }
  return "?";
}

std::string to_string(EdgeRole r) {
  switch (r) {
    case EdgeRole::PipeFeed: return "pipe-feed";
    case EdgeRole::PipeReturn: return "pipe-return";
    case EdgeRole::HeatingSystem: return "heating-system";
    case EdgeRole::Bypass: return "bypass";
    case EdgeRole::ProducerFeed: return "producer-feed";
    case EdgeRole::ProducerReturn: return "producer-return";
  }
  return "?";
}

NodeRole node_role_from_string(const std::string& s) {
  if (s == "producer-feed") return NodeRole::ProducerFeed;
  if (s == "producer-return") return NodeRole::ProducerReturn;
  if (s == "consumer-feed") return NodeRole::ConsumerFeed;
  if (s == "consumer-return") return NodeRole::ConsumerReturn;
  if (s == "junction-feed") return NodeRole::JunctionFeed;
  if (s == "junction-return") return NodeRole::JunctionReturn;
  throw ValidationError("unknown node role '" + s + "'");
}

EdgeRole edge_role_from_string(const std::string& s) {
  if (s == "pipe-feed") return EdgeRole::PipeFeed;
  if (s == "pipe-return") return EdgeRole::PipeReturn;
  if (s == "heating-system") return EdgeRole::HeatingSystem;
  if (s == "bypass") return EdgeRole::Bypass;
  if (s == "producer-feed") return EdgeRole::ProducerFeed;
  if (s == "producer-return") return EdgeRole::ProducerReturn;
  throw ValidationError("unknown edge role '" + s + "'");
}

int NetworkGraph::node_index(const std::string& id) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), id,
      [](const Node& n, const std::string& s) { return n.id < s; });
  if (it == nodes.end() || it->id != id) return -1;
  return static_cast<int>(it - nodes.begin());
}

int NetworkGraph::edge_index(const std::string& id) const {
  auto it = std::lower_bound(
      edges.begin(), edges.end(), id,
      [](const Edge& e, const std::string& s) { return e.id < s; });
  if (it == edges.end() || it->id != id) return -1;
  return static_cast<int>(it - edges.begin());
}

namespace {

bool feed_role(NodeRole r) { return is_feed_side(r); }

void check_endpoint_sides(const Edge& e, const Node& tail, const Node& head) {
  auto fail = [&](const char* what) {
    throw ValidationError("edge '" + e.id + "': " + what);
  };
  switch (e.role) {
    case EdgeRole::PipeFeed:
      if (!feed_role(tail.role) || !feed_role(head.role))
        fail("feed pipe must connect feed-side nodes");
      break;
    case EdgeRole::PipeReturn:
      if (feed_role(tail.role) || feed_role(head.role))
        fail("return pipe must connect return-side nodes");
      break;
    case EdgeRole::HeatingSystem:
    case EdgeRole::Bypass:
      if (tail.role != NodeRole::ConsumerFeed ||
          head.role != NodeRole::ConsumerReturn)
        fail("consumer edge must run consumer-feed -> consumer-return");
      break;
    case EdgeRole::ProducerFeed:
    case EdgeRole::ProducerReturn:
      if (tail.role != NodeRole::ProducerReturn ||
          head.role != NodeRole::ProducerFeed)
        fail("plant leg must run producer-return -> producer-feed");
      break;
  }
}

}  // namespace

void NetworkGraph::finalize() {
  if (nodes.empty()) throw ValidationError("network has no nodes");
  if (edges.empty()) throw ValidationError("network has no edges");

  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.id < b.id; });

  for (size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].id == nodes[i - 1].id)
      throw ValidationError("duplicate node id '" + nodes[i].id + "'");
  for (size_t i = 1; i < edges.size(); ++i)
    if (edges[i].id == edges[i - 1].id)
      throw ValidationError("duplicate edge id '" + edges[i].id + "'");

  pipes.clear();
  heating.clear();
  consumer_edges.clear();
  producer_feed.clear();
  producer_return.clear();
  pipe_index.assign(edges.size(), -1);
  consumer_index.assign(edges.size(), -1);
  producer_index.assign(edges.size(), -1);
  partner.assign(edges.size(), -1);
  in_edges.assign(nodes.size(), {});
  out_edges.assign(nodes.size(), {});

  for (size_t e = 0; e < edges.size(); ++e) {
    Edge& ed = edges[e];
    ed.tail = node_index(ed.tail_id);
    ed.head = node_index(ed.head_id);
    if (ed.tail < 0)
      throw ValidationError("edge '" + ed.id + "' references unknown node '" +
                            ed.tail_id + "'");
    if (ed.head < 0)
      throw ValidationError("edge '" + ed.id + "' references unknown node '" +
                            ed.head_id + "'");
    if (ed.tail == ed.head)
      throw ValidationError("edge '" + ed.id + "' is a self loop");
    check_endpoint_sides(ed, nodes[ed.tail], nodes[ed.head]);

    if (is_pipe(ed.role)) {
      if (ed.length <= 0.0)
        throw ValidationError("pipe '" + ed.id + "' needs a positive length");
      pipe_index[e] = static_cast<int>(pipes.size());
      pipes.push_back(static_cast<int>(e));
    }
    if (is_consumer_edge(ed.role)) {
      if (ed.zeta <= 0.0 || ed.q_max <= 0.0)
        throw ValidationError("consumer edge '" + ed.id +
                              "' needs positive zeta and q_max");
      consumer_index[e] = static_cast<int>(consumer_edges.size());
      consumer_edges.push_back(static_cast<int>(e));
      if (ed.role == EdgeRole::HeatingSystem) {
        if (ed.consumer.demand <= 0.0 || ed.consumer.radiator_coeff <= 0.0)
          throw ValidationError("heating system '" + ed.id +
                                "' needs positive demand and radiator_coeff");
        heating.push_back(static_cast<int>(e));
      }
    }
    if (ed.role == EdgeRole::ProducerFeed) {
      producer_index[e] = static_cast<int>(producer_feed.size());
      producer_feed.push_back(static_cast<int>(e));
    }
    if (ed.role == EdgeRole::ProducerReturn)
      producer_return.push_back(static_cast<int>(e));

    in_edges[ed.head].push_back(static_cast<int>(e));
    out_edges[ed.tail].push_back(static_cast<int>(e));
  }

  // Consumer pairing: one heating system plus one bypass per feed/return
  // node pair.
  std::map<std::pair<int, int>, std::pair<int, int>> pairs;  // (hs, bp)
  for (int e : consumer_edges) {
    auto key = std::make_pair(edges[e].tail, edges[e].head);
    auto& slot = pairs[key];
    if (edges[e].role == EdgeRole::HeatingSystem) {
      if (slot.first != 0)
        throw ValidationError("consumer at node '" + nodes[edges[e].tail].id +
                              "' has two heating systems");
      slot.first = e + 1;
    } else {
      if (slot.second != 0)
        throw ValidationError("consumer at node '" + nodes[edges[e].tail].id +
                              "' has two bypasses");
      slot.second = e + 1;
    }
  }
  for (auto& [key, slot] : pairs) {
    if (slot.first == 0)
      throw ValidationError("consumer at node '" + nodes[key.first].id +
                            "' is missing its heating system");
    if (slot.second == 0)
      throw ValidationError("consumer at node '" + nodes[key.first].id +
                            "' is missing its bypass");
    partner[slot.first - 1] = slot.second - 1;
    partner[slot.second - 1] = slot.first - 1;
  }
  for (int e : consumer_edges)
    if (partner[e] < 0)
      throw ValidationError("consumer edge '" + edges[e].id +
                            "' has no heating-system/bypass partner");

  // Plant leg pairing, keyed the same way.
  std::map<std::pair<int, int>, std::pair<int, int>> legs;  // (feed, return)
  for (int e : producer_feed)
    legs[{edges[e].tail, edges[e].head}].first = e + 1;
  for (int e : producer_return)
    legs[{edges[e].tail, edges[e].head}].second = e + 1;
  for (auto& [key, slot] : legs) {
    if (slot.first == 0 || slot.second == 0)
      throw ValidationError("producer at node '" + nodes[key.second].id +
                            "' needs exactly one feed and one return leg");
    partner[slot.first - 1] = slot.second - 1;
    partner[slot.second - 1] = slot.first - 1;
  }
  if (producer_feed.empty())
    throw ValidationError("network has no producer");
  if (producer_feed.size() != producer_return.size())
    throw ValidationError("producer feed and return legs do not pair up");

  // Every node must touch at least one edge that is counted there.
  for (size_t n = 0; n < nodes.size(); ++n) {
    bool touched = false;
    for (int e : in_edges[n]) touched |= edges[e].counts_at_head();
    for (int e : out_edges[n]) touched |= edges[e].counts_at_tail();
    if (!touched)
      throw ValidationError("node '" + nodes[n].id + "' is isolated");
  }

  reference_node = edges[producer_feed.front()].tail;
}

}  // namespace dhn
