#include <doctest.h>

#include <cmath>
#include <limits>

#include "jointguard/dynamics.hpp"
#include "jointguard/rng.hpp"
#include "oracles.hpp"

using namespace jointguard;
using namespace jointguard::dynamics;

TEST_SUITE("dynamics") {
  TEST_CASE("derivatives at a hand-computed point") {
    const CombatParams p{1.0, 0.02, 1.0, 0.01};
    const auto [dd, db] = derivatives({120.0, 40.0, 0.0}, p);
    CHECK(dd == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(db == doctest::Approx(8.0).epsilon(1e-15));
  }

  TEST_CASE("equilibria are the origin and (a3/a4, a1/a2)") {
    const CombatParams p{1.0, 0.02, 1.0, 0.01};
    const auto eq = equilibria(p);
    CHECK(eq[0].n_d == 0.0);
    CHECK(eq[0].n_b == 0.0);
    CHECK(eq[1].n_d == doctest::Approx(100.0));
    CHECK(eq[1].n_b == doctest::Approx(50.0));
  }

  TEST_CASE("derivatives vanish at both fixed points for random parameters") {
    Rng rng(11);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int k = 0; k < 1000; ++k) {
      const CombatParams p{rng.uniform(0.1, 5), rng.uniform(1e-3, 0.5), rng.uniform(0.1, 5), rng.uniform(1e-3, 0.5)};
      for (const auto& s : equilibria(p)) {
        const auto [dd, db] = derivatives(s, p);
        const double scale_d = p.alpha1 * s.n_d + 1.0;
        const double scale_b = p.alpha3 * s.n_b + 1.0;
        CHECK(std::abs(dd) <= 8 * eps * scale_d);
        CHECK(std::abs(db) <= 8 * eps * scale_b);
      }
    }
  }

  TEST_CASE("constant of motion matches the log-space oracle") {
    Rng rng(5);
    for (int k = 0; k < 500; ++k) {
      const CombatParams p{rng.uniform(0.1, 3), rng.uniform(1e-3, 0.1), rng.uniform(0.1, 3), rng.uniform(1e-3, 0.1)};
      const PopulationState s{rng.uniform(1, 300), rng.uniform(1, 300), 0.0};
      const double want = std::exp(oracle::log_r(s.n_d, s.n_b, p.alpha1, p.alpha2, p.alpha3, p.alpha4));
      if (want == 0.0 || !std::isfinite(want)) continue;
      CHECK(constant_of_motion(s, p) == doctest::Approx(want).epsilon(1e-11));
    }
  }

  TEST_CASE("r_max is attained at the interior equilibrium and bounds R") {
    const CombatParams p{1.0, 0.02, 1.0, 0.01};
    const auto eq = equilibria(p)[1];
    CHECK(constant_of_motion(eq, p) == doctest::Approx(r_max(p)).epsilon(1e-12));
    Rng rng(3);
    for (int k = 0; k < 1000; ++k) {
      const PopulationState s{rng.uniform(0.5, 400), rng.uniform(0.5, 400), 0.0};
      CHECK(constant_of_motion(s, p) <= r_max(p) * (1 + 1e-12));
    }
  }

  TEST_CASE("constant of motion rejects nonpositive populations") {
    const CombatParams p;
    CHECK_THROWS_AS(constant_of_motion({0.0, 10.0, 0.0}, p), std::domain_error);
    CHECK_THROWS_AS(constant_of_motion({10.0, -1.0, 0.0}, p), std::domain_error);
  }

  TEST_CASE("integrate returns steps+1 evenly spaced states") {
    const CombatParams p;
    const auto tr = integrate({120.0, 40.0, 2.0}, p, 0.01, 50);
    REQUIRE(tr.states.size() == 51);
    CHECK(tr.states.front().n_d == 120.0);
    CHECK(tr.states.front().n_b == 40.0);
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      CHECK(tr.states[k].t == doctest::Approx(2.0 + 0.01 * static_cast<double>(k)));
    }
  }

  TEST_CASE("RK4 conserves R along a long orbit") {
    const CombatParams p{1.0, 0.02, 1.0, 0.01};
    const auto tr = integrate({120.0, 40.0, 0.0}, p, 1e-3, 100000);
    const double r0 = oracle::log_r(120.0, 40.0, 1.0, 0.02, 1.0, 0.01);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.states.size(); k += 97) {
      const auto& s = tr.states[k];
      worst = std::max(worst, std::abs(std::expm1(oracle::log_r(s.n_d, s.n_b, 1.0, 0.02, 1.0, 0.01) - r0)));
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("populations stay positive on a well-resolved orbit") {
    const CombatParams p;
    const auto tr = integrate({300.0, 5.0, 0.0}, p, 1e-3, 20000);
    for (const auto& s : tr.states) {
      CHECK(s.n_d > 0.0);
      CHECK(s.n_b > 0.0);
    }
  }

  TEST_CASE("an oversized step is reported instead of producing negative populations") {
    const CombatParams p;
    CHECK_THROWS_AS(integrate({120.0, 40.0, 0.0}, p, 5.0, 10), StepSizeError);
  }

  TEST_CASE("required bots scale with defense units") {
    const CombatParams p{1.0, 0.02, 1.0, 0.01};
    CHECK(required_bots(100.0, p) == doctest::Approx(50.0));
    CHECK(required_bots(300.0, p) == doctest::Approx(3.0 * required_bots(100.0, p)));
    const CombatParams q{1.0, 0.001, 1.0, 0.01};
    CHECK(required_bots(100.0, q) == doctest::Approx(1000.0));
    CHECK_THROWS(required_bots(0.0, p));
  }

  TEST_CASE("parameter validation") {
    CHECK_NOTHROW(CombatParams{}.validate());
    CHECK_THROWS_AS((CombatParams{0.0, 1, 1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((CombatParams{1, -1, 1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((CombatParams{1, 1, std::nan(""), 1}.validate()), std::invalid_argument);
  }
}
