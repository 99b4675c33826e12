#pragma once

// Test-side reference implementations. They deliberately share no code with
// the library: each one recomputes a quantity from its textbook definition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "jointguard/allocation.hpp"

namespace oracle {

// log R for the combat model, R = Nb^a1 e^{-a2 Nb} Nd^a3 e^{-a4 Nd}.
inline double log_r(double nd, double nb, double a1, double a2, double a3, double a4) {
  return a1 * std::log(nb) - a2 * nb + a3 * std::log(nd) - a4 * nd;
}

// Column sum over capable rows divided by the cell, summed in plain order.
inline double lambda(const std::vector<std::vector<double>>& d, const std::vector<int>& c, std::size_t i,
                     std::size_t j) {
  double f = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    if (c[r] != 0) f += d[r][j];
  }
  return f / d[i][j];
}

// Optimal min-max ratio by the cut condition: for every set S of loaded
// vulnerabilities, the defenders able to serve S must absorb demand(S), so
// pi* = max_S demand(S) / capacity(N(S)); max-flow/min-cut makes the bound
// tight. Exponential in the vulnerability count (fine for n <= 12).
inline double hall_pi(const jointguard::allocation::WorkloadProblem& p) {
  const std::size_t n = p.vulnerabilities();
  const std::size_t m = p.defenders();
  double best = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double demand = 0.0;
    std::vector<bool> reach(m, false);
    for (std::size_t j = 0; j < n; ++j) {
      if ((mask >> j) & 1u) {
        demand += p.attack_power[j];
        for (std::size_t i = 0; i < m; ++i) reach[i] = reach[i] || p.eligible[i][j];
      }
    }
    double cap = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (reach[i]) cap += p.capacity[i];
    }
    if (demand > 0.0) best = std::max(best, cap > 0.0 ? demand / cap : std::numeric_limits<double>::infinity());
  }
  return best;
}

// Brute force over a grid: every vulnerability's demand is split among its
// eligible defenders in multiples of 1/steps, and the best max ratio over
// all combinations is returned. Only practical for a handful of cells.
inline double grid_pi(const jointguard::allocation::WorkloadProblem& p, int steps) {
  const std::size_t n = p.vulnerabilities();
  const std::size_t m = p.defenders();
  std::vector<std::vector<std::vector<int>>> splits(n);  // per vulnerability: list of integer splits
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> el;
    for (std::size_t i = 0; i < m; ++i) {
      if (p.eligible[i][j]) el.push_back(i);
    }
    std::vector<int> cur(m, 0);
    auto rec = [&](auto&& self, std::size_t k, int left) -> void {
      if (k + 1 == el.size()) {
        cur[el[k]] = left;
        splits[j].push_back(cur);
        cur[el[k]] = 0;
        return;
      }
      for (int a = 0; a <= left; ++a) {
        cur[el[k]] = a;
        self(self, k + 1, left - a);
      }
      cur[el[k]] = 0;
    };
    if (p.attack_power[j] == 0.0 || el.empty()) {
      splits[j].push_back(std::vector<int>(m, 0));
    } else {
      rec(rec, 0, steps);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> load(m, 0.0);
  auto walk = [&](auto&& self, std::size_t j) -> void {
    if (j == n) {
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i) worst = std::max(worst, load[i] / p.capacity[i]);
      best = std::min(best, worst);
      return;
    }
    for (const auto& s : splits[j]) {
      for (std::size_t i = 0; i < m; ++i) load[i] += p.attack_power[j] * s[i] / steps;
      self(self, j + 1);
      for (std::size_t i = 0; i < m; ++i) load[i] -= p.attack_power[j] * s[i] / steps;
    }
  };
  walk(walk, 0);
  return best;
}

// Checks that an allocation routes every demand, only along eligible pairs,
// with nonnegative amounts, and that its reported pi is the real max ratio.
inline bool allocation_valid(const jointguard::allocation::WorkloadProblem& p,
                             const jointguard::allocation::Allocation& a, double tol) {
  const std::size_t n = p.vulnerabilities();
  const std::size_t m = p.defenders();
  if (a.assign.size() != m) return false;
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (a.assign[i].size() != n) return false;
    double load = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = a.assign[i][j];
      if (x < -tol) return false;
      if (!p.eligible[i][j] && std::abs(x) > tol) return false;
      load += x;
    }
    worst = std::max(worst, load / p.capacity[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m; ++i) col += a.assign[i][j];
    if (std::abs(col - p.attack_power[j]) > tol * std::max(1.0, p.attack_power[j])) return false;
  }
  return std::abs(worst - a.pi) <= tol * std::max(1.0, worst);
}

// Directed BFS hop distances to `target` over an adjacency list.
inline std::vector<std::optional<int>> hops_to(const std::vector<std::vector<int>>& adj, int target) {
  const int n = static_cast<int>(adj.size());
  std::vector<std::vector<int>> rev(adj.size());
  for (int u = 0; u < n; ++u) {
    for (int v : adj[u]) rev[v].push_back(u);
  }
  std::vector<std::optional<int>> d(adj.size());
  std::deque<int> q{target};
  d[target] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int u : rev[v]) {
      if (!d[u]) {
        d[u] = *d[v] + 1;
        q.push_back(u);
      }
    }
  }
  return d;
}

// One-sample Kolmogorov-Smirnov distance of `samples` against `cdf`.
template <typename Cdf>
double ks_distance(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

}  // namespace oracle
