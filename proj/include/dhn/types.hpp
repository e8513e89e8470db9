#pragma once

#include <stdexcept>
#include <string>

namespace dhn {

enum class NodeRole {
  ProducerFeed,
  ProducerReturn,
  ConsumerFeed,
  ConsumerReturn,
  JunctionFeed,
  JunctionReturn,
};

enum class EdgeRole {
  PipeFeed,
  PipeReturn,
  HeatingSystem,   // consumer heat exchanger, feed node -> return node
  Bypass,          // consumer short circuit, feed node -> return node
  ProducerFeed,    // plant feed leg, return node -> feed node
  ProducerReturn,  // plant return leg, same orientation, counted at the return node
};

inline bool is_feed_side(NodeRole r) {
  return r == NodeRole::ProducerFeed || r == NodeRole::ConsumerFeed ||
         r == NodeRole::JunctionFeed;
}

inline bool is_pipe(EdgeRole r) {
  return r == EdgeRole::PipeFeed || r == EdgeRole::PipeReturn;
}

inline bool is_consumer_edge(EdgeRole r) {
  return r == EdgeRole::HeatingSystem || r == EdgeRole::Bypass;
}

inline bool is_producer_edge(EdgeRole r) {
  return r == EdgeRole::ProducerFeed || r == EdgeRole::ProducerReturn;
}

std::string to_string(NodeRole r);
std::string to_string(EdgeRole r);
NodeRole node_role_from_string(const std::string& s);
EdgeRole edge_role_from_string(const std::string& s);

// Input document or network structure is unusable; message names the
// offending key or entity id.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dhn
