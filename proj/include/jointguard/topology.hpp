#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "jointguard/rng.hpp"

namespace jointguard::topology {

// Dense node handle; ids are assigned in insertion order and "ascending node
// id" tie-breaking refers to this order.
struct NodeId {
  std::uint32_t value = 0;
  constexpr auto operator<=>(const NodeId&) const = default;
};

enum class NodeRole { Victim, Defender, Transit, AttackerSource, Cloud, BenignSource };

const char* to_string(NodeRole role);
std::optional<NodeRole> parse_role(const std::string& text);

struct Node {
  std::string name;
  NodeRole role = NodeRole::Transit;
  bool egress_filtering = false;
};

struct Link {
  NodeId src;
  NodeId dst;
  double capacity = 0.0;  // load units per second
  double latency = 0.0;   // seconds
};

enum class DistanceMetric { Hops, Latency };

class NetworkGraph {
 public:
  // Throws std::invalid_argument on a duplicate name.
  NodeId add_node(std::string name, NodeRole role, bool egress_filtering = false);
  // Directed link. Throws on self loops, unknown endpoints or bad numbers.
  void add_link(NodeId src, NodeId dst, double capacity, double latency);
  // Adds src->dst and dst->src with the same parameters.
  void add_duplex_link(NodeId a, NodeId b, double capacity, double latency);

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const;
  const std::vector<Link>& links() const { return links_; }
  std::optional<NodeId> find(const std::string& name) const;
  // Throws std::out_of_range for an unknown name.
  NodeId id_of(const std::string& name) const;
  bool contains(NodeId id) const { return id.value < nodes_.size(); }

  // Outgoing links of `u` in insertion order.
  const std::vector<std::size_t>& out_links(NodeId u) const;
  // Out-neighbours of `u`, ascending by id, duplicates removed.
  std::vector<NodeId> out_neighbors(NodeId u) const;
  const Link* find_link(NodeId src, NodeId dst) const;
  std::vector<NodeId> nodes_with_role(NodeRole role) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::unordered_map<std::string, NodeId> by_name_;

  friend std::vector<std::optional<double>> distances_to(const NetworkGraph&, NodeId, DistanceMetric);
};

// Minimum hop count over directed links; std::nullopt when unreachable.
// Throws std::out_of_range for unknown nodes.
std::optional<int> hop_distance(const NetworkGraph& g, NodeId u, NodeId v);

// Distance from every node to `target` (reverse search). Hop distances are
// returned as whole numbers.
std::vector<std::optional<double>> distances_to(const NetworkGraph& g, NodeId target,
                                                DistanceMetric metric = DistanceMetric::Hops);

struct CandidateSet {
  std::vector<NodeId> nodes;  // ascending id
  // Set when the victim cannot be reached from the requesting node at all;
  // distinguishes "no route" from "no strictly closer neighbour".
  bool victim_unreachable = false;
};

// Out-neighbours u_j of u_i with f(u_j, victim) < f(u_i, victim).
// Throws std::invalid_argument when u_i == victim.
CandidateSet loop_free_candidates(const NetworkGraph& g, NodeId u_i, NodeId victim,
                                  DistanceMetric metric = DistanceMetric::Hops);

// Time-to-live of the routes on M parallel links, each exponential with
// rate deltas[i]. T = max of the M lifetimes is the route discovery interval.
struct RouteLifetimeModel {
  std::vector<double> deltas;

  void validate() const;
};

// P{T <= t} = prod_i (1 - exp(-delta_i t)).
double route_interval_cdf(const RouteLifetimeModel& model, double t);

double sample_route_interval(const RouteLifetimeModel& model, Rng& rng);

}  // namespace jointguard::topology
