#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace jointguard::allocation {

// Min-max defense workload: route every vulnerability's attack power to
// eligible defenders so that the largest load/capacity ratio is minimal.
struct WorkloadProblem {
  std::vector<double> attack_power;        // per vulnerability, >= 0
  std::vector<double> capacity;            // per defender, > 0
  std::vector<std::vector<bool>> eligible;  // [defender][vulnerability]

  std::size_t defenders() const { return capacity.size(); }
  std::size_t vulnerabilities() const { return attack_power.size(); }

  // Throws std::invalid_argument on malformed input and InfeasibleProblem
  // when a loaded vulnerability has no eligible defender.
  void validate() const;
};

struct Allocation {
  std::vector<std::vector<double>> assign;  // [defender][vulnerability]
  double pi = 0.0;                          // max_i load(i) / capacity(i)

  double load(std::size_t defender) const;
};

class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary search on pi with a max-flow feasibility test; the returned pi is
// within `tol` of the optimum. Throws NonConvergence when `tol` cannot be
// reached in the iteration budget.
Allocation solve_exact(const WorkloadProblem& p, double tol = 1e-9);

// Called after every weight update of solve_iterative with the current
// per-defender weights.
using WeightObserver = std::function<void(std::span<const double>)>;

// Multiplicative-weights (Garg-Konemann) approximation: each defender carries
// a weight starting at 1, demand is routed step by step to the eligible
// defender of least weight per unit capacity, and after each step the chosen
// defender's weight grows by (1 + e * routed / capacity). Stops once the
// weights pass the width bound (m / (1 - e))^(1/e). The internal step factor
// e is derived from `epsilon` so that pi <= (1 + epsilon) * optimum.
Allocation solve_iterative(const WorkloadProblem& p, double epsilon, const WeightObserver& observer = {});

}  // namespace jointguard::allocation
