#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jointguard::dynamics {

// Interaction constants of the defense-unit / bot combat model:
//   dNd/dt = a1*Nd - a2*Nd*Nb
//   dNb/dt = a4*Nd*Nb - a3*Nb
struct CombatParams {
  double alpha1 = 1.0;
  double alpha2 = 0.02;
  double alpha3 = 1.0;
  double alpha4 = 0.01;

  // Throws std::invalid_argument unless all four constants are finite and > 0.
  void validate() const;
};

struct PopulationState {
  double n_d = 0.0;  // defense units
  double n_b = 0.0;  // bots
  double t = 0.0;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<PopulationState> states;  // states[k].t == states[0].t + k * dt
};

// Raised by integrate() when a Runge-Kutta stage would leave the positive
// quadrant; the caller has to shrink dt.
class StepSizeError : public std::runtime_error {
 public:
  StepSizeError(std::size_t step, double t);
  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t step_;
  double time_;
};

std::pair<double, double> derivatives(const PopulationState& state, const CombatParams& params);

// Extinction point first, then the interior point (a3/a4, a1/a2).
std::array<PopulationState, 2> equilibria(const CombatParams& params);

// R = Nb^a1 e^{-a2 Nb} Nd^a3 e^{-a4 Nd}. Throws std::domain_error for
// nonpositive populations.
double constant_of_motion(const PopulationState& state, const CombatParams& params);

// Maximum of R, attained at the interior equilibrium.
double r_max(const CombatParams& params);

// Classical fixed-step RK4. The returned trajectory holds steps + 1 states,
// starting with `initial`.
Trajectory integrate(const PopulationState& initial, const CombatParams& params, double dt,
                     std::size_t steps);

// Sustained bot population needed against n_d defense units: n_d * a1*a4 / (a2*a3).
double required_bots(double n_d, const CombatParams& params);

}  // namespace jointguard::dynamics
