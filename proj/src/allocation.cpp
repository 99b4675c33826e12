#include "jointguard/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace jointguard::allocation {

void WorkloadProblem::validate() const {
  if (capacity.empty()) throw std::invalid_argument("workload problem needs at least one defender");
  if (eligible.size() != capacity.size()) throw std::invalid_argument("eligibility rows must match defenders");
  for (const auto& row : eligible) {
    if (row.size() != attack_power.size()) throw std::invalid_argument("eligibility columns must match vulnerabilities");
  }
  for (double c : capacity) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("defender capacity must be positive");
  }
  for (std::size_t j = 0; j < attack_power.size(); ++j) {
    const double a = attack_power[j];
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("attack power must be >= 0");
    if (a == 0.0) continue;
    bool any = false;
    for (std::size_t i = 0; i < capacity.size(); ++i) any = any || eligible[i][j];
    if (!any) throw InfeasibleProblem(fmt::format("vulnerability {} has no eligible defender", j));
  }
}

double Allocation::load(std::size_t defender) const {
  const auto& row = assign.at(defender);
  return std::accumulate(row.begin(), row.end(), 0.0);
}

namespace {

// Dinic max-flow on a small dense-ish graph with real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes), level_(nodes), next_(nodes) {}

  std::size_t add_edge(std::size_t from, std::size_t to, double cap) {
    adj_[from].push_back(edges_.size());
    edges_.push_back({to, cap, 0.0});
    adj_[to].push_back(edges_.size());
    edges_.push_back({from, 0.0, 0.0});
    return edges_.size() - 2;
  }

  double flow(std::size_t edge) const { return edges_[edge].flow; }

  double max_flow(std::size_t s, std::size_t t, double eps) {
    double total = 0.0;
    while (build_levels(s, t, eps)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double pushed = augment(s, t, std::numeric_limits<double>::infinity(), eps);
        if (pushed <= eps) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    double cap;
    double flow;
  };

  bool build_levels(std::size_t s, std::size_t t, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::size_t> queue{s};
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t e : adj_[u]) {
        const Edge& edge = edges_[e];
        if (level_[edge.to] < 0 && edge.cap - edge.flow > eps) {
          level_[edge.to] = level_[u] + 1;
          queue.push_back(edge.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double augment(std::size_t u, std::size_t t, double limit, double eps) {
    if (u == t) return limit;
    for (; next_[u] < adj_[u].size(); ++next_[u]) {
      const std::size_t e = adj_[u][next_[u]];
      Edge& edge = edges_[e];
      if (level_[edge.to] != level_[u] + 1 || edge.cap - edge.flow <= eps) continue;
      const double pushed = augment(edge.to, t, std::min(limit, edge.cap - edge.flow), eps);
      if (pushed > eps) {
        edge.flow += pushed;
        edges_[e ^ 1].flow -= pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

struct FlowResult {
  double routed = 0.0;
  std::vector<std::vector<double>> assign;
};

// source -> vulnerability j (attack_power[j]) -> eligible defender i (unbounded)
// -> sink (pi * capacity[i]).
FlowResult route(const WorkloadProblem& p, double pi, double eps) {
  const std::size_t m = p.defenders();
  const std::size_t n = p.vulnerabilities();
  const std::size_t source = 0;
  const std::size_t sink = 1;
  auto vuln_node = [](std::size_t j) { return 2 + j; };
  auto def_node = [n](std::size_t i) { return 2 + n + i; };

  FlowNetwork net(2 + n + m);
  const double total = std::accumulate(p.attack_power.begin(), p.attack_power.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) net.add_edge(source, vuln_node(j), p.attack_power[j]);
  std::vector<std::vector<std::size_t>> middle(m, std::vector<std::size_t>(n, SIZE_MAX));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (p.eligible[i][j] && p.attack_power[j] > 0.0) middle[i][j] = net.add_edge(vuln_node(j), def_node(i), total);
    }
  }
  for (std::size_t i = 0; i < m; ++i) net.add_edge(def_node(i), sink, pi * p.capacity[i]);

  FlowResult r;
  r.routed = net.max_flow(source, sink, eps);
  r.assign.assign(m, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (middle[i][j] != SIZE_MAX) r.assign[i][j] = std::max(0.0, net.flow(middle[i][j]));
    }
  }
  return r;
}

// Rescales each column to its exact demand and recomputes pi from the loads.
Allocation finalize(const WorkloadProblem& p, std::vector<std::vector<double>> assign) {
  const std::size_t m = p.defenders();
  const std::size_t n = p.vulnerabilities();
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m; ++i) col += assign[i][j];
    if (p.attack_power[j] == 0.0 || col <= 0.0) {
      for (std::size_t i = 0; i < m; ++i) assign[i][j] = 0.0;
      continue;
    }
    const double scale = p.attack_power[j] / col;
    for (std::size_t i = 0; i < m; ++i) assign[i][j] *= scale;
  }
  Allocation a{std::move(assign), 0.0};
  for (std::size_t i = 0; i < m; ++i) a.pi = std::max(a.pi, a.load(i) / p.capacity[i]);
  return a;
}

double total_demand(const WorkloadProblem& p) {
  return std::accumulate(p.attack_power.begin(), p.attack_power.end(), 0.0);
}

}  // namespace

Allocation solve_exact(const WorkloadProblem& p, double tol) {
  p.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const std::size_t m = p.defenders();
  const double total = total_demand(p);
  if (total == 0.0) return Allocation{std::vector<std::vector<double>>(m, std::vector<double>(p.vulnerabilities(), 0.0)), 0.0};

  const double cap_sum = std::accumulate(p.capacity.begin(), p.capacity.end(), 0.0);
  const double cap_min = *std::min_element(p.capacity.begin(), p.capacity.end());
  double lo = total / cap_sum;  // every defender fully and evenly loaded
  double hi = total / cap_min;  // everything on the weakest eligible defender
  const double eps = total * 1e-14;
  auto feasible = [&](double pi) { return route(p, pi, eps).routed >= total * (1.0 - 1e-12); };

  constexpr int kMaxIterations = 200;
  int iter = 0;
  while (hi - lo > tol) {
    if (++iter > kMaxIterations) {
      throw NonConvergence(fmt::format("binary search did not reach tol {} (bracket [{}, {}])", tol, lo, hi));
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      throw NonConvergence(fmt::format("tol {} is below floating resolution at pi = {}", tol, hi));
    }
    (feasible(mid) ? hi : lo) = mid;
  }
  return finalize(p, route(p, hi, eps).assign);
}

Allocation solve_iterative(const WorkloadProblem& p, double epsilon, const WeightObserver& observer) {
  p.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  const std::size_t m = p.defenders();
  const std::size_t n = p.vulnerabilities();
  const double total = total_demand(p);
  if (total == 0.0) return Allocation{std::vector<std::vector<double>>(m, std::vector<double>(n, 0.0)), 0.0};

  // Garg-Konemann loses a factor (1 - e)^-3 against the optimum.
  const double e = 1.0 - std::pow(1.0 + epsilon, -1.0 / 3.0);

  // Scale demands by a feasible pi so the optimal concurrent throughput is
  // at least 1; keeps the phase count bounded.
  std::vector<std::size_t> greedy(n, m);
  double pi_greedy = 0.0;
  {
    std::vector<double> load(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (p.attack_power[j] == 0.0) continue;
      for (std::size_t i = 0; i < m; ++i) {
        if (p.eligible[i][j] && (greedy[j] == m || p.capacity[i] > p.capacity[greedy[j]])) greedy[j] = i;
      }
      load[greedy[j]] += p.attack_power[j];
    }
    for (std::size_t i = 0; i < m; ++i) pi_greedy = std::max(pi_greedy, load[i] / p.capacity[i]);
  }
  std::vector<double> demand(n);
  for (std::size_t j = 0; j < n; ++j) demand[j] = p.attack_power[j] / pi_greedy;

  // weight[i] = length(i) * capacity(i) / delta, so every weight starts at 1.
  const double log_bound = std::log(static_cast<double>(m) / (1.0 - e)) / e;  // ln(1/delta)
  std::vector<double> weight(m, 1.0);
  double weight_sum = static_cast<double>(m);
  const double stop = std::exp(log_bound);

  std::vector<std::vector<double>> completed(m, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> phase(m, std::vector<double>(n, 0.0));
  bool done = false;
  while (!done) {
    for (auto& row : phase) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < n && !done; ++j) {
      double remaining = demand[j];
      while (remaining > 0.0) {
        if (weight_sum >= stop) {
          done = true;
          break;
        }
        std::size_t best = m;
        for (std::size_t i = 0; i < m; ++i) {
          if (!p.eligible[i][j]) continue;
          if (best == m || weight[i] / p.capacity[i] < weight[best] / p.capacity[best]) best = i;
        }
        const double amount = std::min(remaining, p.capacity[best]);
        phase[best][j] += amount;
        remaining -= amount;
        const double grown = weight[best] * (e * amount / p.capacity[best]);
        weight[best] += grown;
        weight_sum += grown;
        if (observer) observer(weight);
      }
    }
    if (!done) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) completed[i][j] += phase[i][j];
      }
    }
  }

  // Every completed phase routed each demand exactly once, so normalising the
  // columns averages the phases.
  bool any = false;
  for (const auto& row : completed) {
    for (double v : row) any = any || v > 0.0;
  }
  if (!any) {
    // The width bound was hit inside the first phase (extreme capacity
    // spread). Keep the partial phase and put unrouted columns on the greedy
    // choice.
    completed = phase;
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < m; ++i) col += completed[i][j];
      if (col == 0.0 && greedy[j] != m) completed[greedy[j]][j] = p.attack_power[j];
    }
  }
  return finalize(p, std::move(completed));
}

}  // namespace jointguard::allocation
