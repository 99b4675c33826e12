#include "jointguard/dynamics.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

namespace jointguard::dynamics {

void CombatParams::validate() const {
  const std::array<std::pair<const char*, double>, 4> fields{
      {{"alpha1", alpha1}, {"alpha2", alpha2}, {"alpha3", alpha3}, {"alpha4", alpha4}}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw std::invalid_argument(fmt::format("{} must be a positive finite constant, got {}", name, value));
    }
  }
}

StepSizeError::StepSizeError(std::size_t step, double t)
    : std::runtime_error(fmt::format(
          "population left the positive quadrant during step {} (t = {}); reduce dt", step, t)),
      step_(step),
      time_(t) {}

std::pair<double, double> derivatives(const PopulationState& s, const CombatParams& p) {
  return {p.alpha1 * s.n_d - p.alpha2 * s.n_d * s.n_b,
          p.alpha4 * s.n_d * s.n_b - p.alpha3 * s.n_b};
}

std::array<PopulationState, 2> equilibria(const CombatParams& p) {
  p.validate();
  return {PopulationState{0.0, 0.0, 0.0},
          PopulationState{p.alpha3 / p.alpha4, p.alpha1 / p.alpha2, 0.0}};
}

double constant_of_motion(const PopulationState& s, const CombatParams& p) {
  if (!(s.n_d > 0.0) || !(s.n_b > 0.0)) {
    throw std::domain_error("constant of motion needs strictly positive populations");
  }
  // Evaluated in log space; the direct product overflows for large exponents.
  const double log_r = p.alpha1 * std::log(s.n_b) - p.alpha2 * s.n_b +
                       p.alpha3 * std::log(s.n_d) - p.alpha4 * s.n_d;
  return std::exp(log_r);
}

double r_max(const CombatParams& p) {
  p.validate();
  const double log_r = p.alpha1 * (std::log(p.alpha1 / p.alpha2) - 1.0) +
                       p.alpha3 * (std::log(p.alpha3 / p.alpha4) - 1.0);
  return std::exp(log_r);
}

namespace {

struct Rate {
  double d_nd;
  double d_nb;
};

Rate rate_at(double n_d, double n_b, const CombatParams& p) {
  const auto [a, b] = derivatives(PopulationState{n_d, n_b, 0.0}, p);
  return {a, b};
}

bool positive(double n_d, double n_b) { return n_d > 0.0 && n_b > 0.0; }

}  // namespace

Trajectory integrate(const PopulationState& initial, const CombatParams& params, double dt,
                     std::size_t steps) {
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  if (!positive(initial.n_d, initial.n_b)) {
    throw std::invalid_argument("initial populations must be strictly positive");
  }

  Trajectory out;
  out.dt = dt;
  out.states.reserve(steps + 1);
  out.states.push_back(initial);

  double nd = initial.n_d;
  double nb = initial.n_b;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = initial.t + static_cast<double>(k) * dt;
    const Rate k1 = rate_at(nd, nb, params);

    const double nd2 = nd + 0.5 * dt * k1.d_nd;
    const double nb2 = nb + 0.5 * dt * k1.d_nb;
    if (!positive(nd2, nb2)) throw StepSizeError(k, t);
    const Rate k2 = rate_at(nd2, nb2, params);

    const double nd3 = nd + 0.5 * dt * k2.d_nd;
    const double nb3 = nb + 0.5 * dt * k2.d_nb;
    if (!positive(nd3, nb3)) throw StepSizeError(k, t);
    const Rate k3 = rate_at(nd3, nb3, params);

    const double nd4 = nd + dt * k3.d_nd;
    const double nb4 = nb + dt * k3.d_nb;
    if (!positive(nd4, nb4)) throw StepSizeError(k, t);
    const Rate k4 = rate_at(nd4, nb4, params);

    nd += dt / 6.0 * (k1.d_nd + 2.0 * k2.d_nd + 2.0 * k3.d_nd + k4.d_nd);
    nb += dt / 6.0 * (k1.d_nb + 2.0 * k2.d_nb + 2.0 * k3.d_nb + k4.d_nb);
    if (!positive(nd, nb)) throw StepSizeError(k, t);

    out.states.push_back(PopulationState{nd, nb, initial.t + static_cast<double>(k + 1) * dt});
  }
  return out;
}

double required_bots(double n_d, const CombatParams& p) {
  p.validate();
  if (!(n_d > 0.0)) throw std::invalid_argument("defense units must be positive");
  return n_d * (p.alpha1 * p.alpha4) / (p.alpha2 * p.alpha3);
}

}  // namespace jointguard::dynamics
