#include "jointguard/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace jointguard::topology {

const char* to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Victim: return "victim";
    case NodeRole::Defender: return "defender";
    case NodeRole::Transit: return "transit";
    case NodeRole::AttackerSource: return "attacker-source";
    case NodeRole::Cloud: return "cloud";
    case NodeRole::BenignSource: return "benign-source";
  }
  return "unknown";
}

std::optional<NodeRole> parse_role(const std::string& text) {
  for (auto role : {NodeRole::Victim, NodeRole::Defender, NodeRole::Transit, NodeRole::AttackerSource,
                    NodeRole::Cloud, NodeRole::BenignSource}) {
    if (text == to_string(role)) return role;
  }
  return std::nullopt;
}

NodeId NetworkGraph::add_node(std::string name, NodeRole role, bool egress_filtering) {
  if (name.empty()) throw std::invalid_argument("node name must not be empty");
  if (by_name_.count(name) != 0) throw std::invalid_argument("duplicate node id '" + name + "'");
  const NodeId id{static_cast<std::uint32_t>(nodes_.size())};
  by_name_.emplace(name, id);
  nodes_.push_back(Node{std::move(name), role, egress_filtering});
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

void NetworkGraph::add_link(NodeId src, NodeId dst, double capacity, double latency) {
  if (!contains(src) || !contains(dst)) throw std::out_of_range("link endpoint is not a node");
  if (src == dst) throw std::invalid_argument("self-loop on '" + nodes_[src.value].name + "'");
  if (!(capacity > 0.0) || !std::isfinite(capacity)) throw std::invalid_argument("link capacity must be positive");
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw std::invalid_argument("link latency must be >= 0");
  out_[src.value].push_back(links_.size());
  in_[dst.value].push_back(links_.size());
  links_.push_back(Link{src, dst, capacity, latency});
}

void NetworkGraph::add_duplex_link(NodeId a, NodeId b, double capacity, double latency) {
  add_link(a, b, capacity, latency);
  add_link(b, a, capacity, latency);
}

const Node& NetworkGraph::node(NodeId id) const {
  if (!contains(id)) throw std::out_of_range(fmt::format("unknown node id {}", id.value));
  return nodes_[id.value];
}

std::optional<NodeId> NetworkGraph::find(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId NetworkGraph::id_of(const std::string& name) const {
  if (auto id = find(name)) return *id;
  throw std::out_of_range("unknown node '" + name + "'");
}

const std::vector<std::size_t>& NetworkGraph::out_links(NodeId u) const {
  if (!contains(u)) throw std::out_of_range(fmt::format("unknown node id {}", u.value));
  return out_[u.value];
}

std::vector<NodeId> NetworkGraph::out_neighbors(NodeId u) const {
  std::vector<NodeId> result;
  for (std::size_t l : out_links(u)) result.push_back(links_[l].dst);
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

const Link* NetworkGraph::find_link(NodeId src, NodeId dst) const {
  for (std::size_t l : out_links(src)) {
    if (links_[l].dst == dst) return &links_[l];
  }
  return nullptr;
}

std::vector<NodeId> NetworkGraph::nodes_with_role(NodeRole role) const {
  std::vector<NodeId> result;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].role == role) result.push_back(NodeId{i});
  }
  return result;
}

std::vector<std::optional<double>> distances_to(const NetworkGraph& g, NodeId target, DistanceMetric metric) {
  if (!g.contains(target)) throw std::out_of_range(fmt::format("unknown node id {}", target.value));
  std::vector<std::optional<double>> dist(g.node_count());
  dist[target.value] = 0.0;

  if (metric == DistanceMetric::Hops) {
    std::deque<NodeId> frontier{target};
    while (!frontier.empty()) {
      const NodeId v = frontier.front();
      frontier.pop_front();
      for (std::size_t l : g.in_[v.value]) {
        const NodeId u = g.links_[l].src;
        if (!dist[u.value]) {
          dist[u.value] = *dist[v.value] + 1.0;
          frontier.push_back(u);
        }
      }
    }
    return dist;
  }

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  queue.emplace(0.0, target.value);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > *dist[v]) continue;
    for (std::size_t l : g.in_[v]) {
      const auto& link = g.links_[l];
      const double nd = d + link.latency;
      auto& slot = dist[link.src.value];
      if (!slot || nd < *slot) {
        slot = nd;
        queue.emplace(nd, link.src.value);
      }
    }
  }
  return dist;
}

std::optional<int> hop_distance(const NetworkGraph& g, NodeId u, NodeId v) {
  if (!g.contains(u) || !g.contains(v)) throw std::out_of_range("hop_distance on an unknown node");
  const auto d = distances_to(g, v, DistanceMetric::Hops)[u.value];
  if (!d) return std::nullopt;
  return static_cast<int>(*d);
}

CandidateSet loop_free_candidates(const NetworkGraph& g, NodeId u_i, NodeId victim, DistanceMetric metric) {
  if (!g.contains(u_i) || !g.contains(victim)) throw std::out_of_range("loop_free_candidates on an unknown node");
  if (u_i == victim) throw std::invalid_argument("the victim does not offload to itself");
  const auto dist = distances_to(g, victim, metric);
  CandidateSet out;
  const auto& own = dist[u_i.value];
  if (!own) {
    out.victim_unreachable = true;
    return out;
  }
  for (NodeId n : g.out_neighbors(u_i)) {
    const auto& d = dist[n.value];
    if (d && *d < *own) out.nodes.push_back(n);
  }
  return out;
}

void RouteLifetimeModel::validate() const {
  if (deltas.empty()) throw std::invalid_argument("route lifetime model needs at least one link");
  for (double d : deltas) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("route lifetime rates must be positive");
  }
}

double route_interval_cdf(const RouteLifetimeModel& model, double t) {
  model.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("route interval cdf needs t >= 0");
  double p = 1.0;
  for (double delta : model.deltas) p *= -std::expm1(-delta * t);
  return p;
}

double sample_route_interval(const RouteLifetimeModel& model, Rng& rng) {
  model.validate();
  double t = 0.0;
  for (double delta : model.deltas) t = std::max(t, rng.exponential(delta));
  return t;
}

}  // namespace jointguard::topology
