#include <doctest.h>

#include <cmath>
#include <sstream>

#include "jointguard/dynamics.hpp"
#include "jointguard/engine.hpp"
#include "test_util.hpp"

using namespace jointguard;
using namespace jointguard::engine;

namespace {

void check_conservation(const MetricsTimeSeries& m) {
  for (const auto& r : m.records) {
    const double lhs = r.injected;
    const double rhs = r.delivered + r.dropped + r.in_flight;
    REQUIRE(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, lhs));
    REQUIRE(r.shed_high == 0.0);
  }
}

TickInputs attack_tick(bool shed) {
  TickInputs in;
  in.benign_high = 15;
  in.benign_low = 15;
  in.attack = 150;
  in.attack_dropped_upstream = 7;
  in.defenders = {{100, 15, 165}, {100, 0, 0}};  // L at the primary = benign_low + attack
  in.victim_capacity = 150;
  in.link_capacity = 120;
  in.shed_low = shed;
  in.baseline_rho = 0.3;
  return in;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("latency model") {
    CHECK(benign_latency(0.3, 0.3, 0.09, 2.86) == doctest::Approx(0.09));
    CHECK(benign_latency(0.9, 0.3, 0.09, 2.86) == doctest::Approx(0.63));
    CHECK(benign_latency(0.999999, 0.3, 0.09, 2.86) == 2.86);
    CHECK(benign_latency(1.0, 0.3, 0.09, 2.86) == 2.86);
  }

  TEST_CASE("tick accounting conserves traffic and serves H first") {
    for (bool shed : {false, true}) {
      const auto r = metrics_tick(attack_tick(shed));
      CHECK(r.injected == doctest::Approx(187.0));
      CHECK(r.injected == doctest::Approx(r.delivered + r.dropped + r.in_flight).epsilon(1e-12));
      CHECK(r.shed_high == 0.0);
      CHECK(r.delivered >= 15.0);
      CHECK(r.primary_util == 1.0);
      CHECK(r.latency == 2.86);
    }
    CHECK(metrics_tick(attack_tick(true)).delivered < metrics_tick(attack_tick(false)).delivered);
  }

  TEST_CASE("bundled efficacy runs satisfy the ledger invariants") {
    for (const char* name : {"fig5_1defender", "fig5_2defender", "fig5_3defender", "fig5_economics"}) {
      CAPTURE(name);
      const auto s = testutil::bundled(name);
      const auto m = run(s);
      REQUIRE(m.records.size() == 7200);
      check_conservation(m);
      // Expense is the running sum of wave prices and never decreases.
      Money sum;
      for (const auto& w : m.waves) {
        CHECK(w.expense == expense::botnet_expense(w.bots, s.pricing, s.mitigation));
        sum += w.expense;
      }
      CHECK(m.total_expense() == sum);
      for (std::size_t k = 1; k < m.records.size(); ++k) CHECK(m.records[k].expense >= m.records[k - 1].expense);
    }
  }

  TEST_CASE("no attack means baseline latency everywhere") {
    auto s = testutil::bundled("fig5_1defender");
    s.attacker.first_wave_at = s.duration + 1;
    const auto m = run(s);
    for (const auto& r : m.records) REQUIRE(r.latency == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(m.waves.empty());
    CHECK(m.messages.empty());
  }

  TEST_CASE("more defenders lower utilisation and latency") {
    const auto base = testutil::bundled("fig5_1defender");
    const auto runs = run_sweep(base, {1, 2, 3});
    CHECK(runs[1].mean_primary_util() < runs[0].mean_primary_util());
    CHECK(runs[2].mean_primary_util() < runs[1].mean_primary_util());
    CHECK(runs[1].mean_latency() < runs[0].mean_latency());
    CHECK(runs[2].mean_latency() < runs[1].mean_latency());
    // Attack-free ticks are unaffected by the alliance size.
    CHECK(runs[0].records[10].latency == runs[2].records[10].latency);
  }

  TEST_CASE("runs are deterministic and seeds only move the route clock") {
    const auto s = testutil::bundled("fig5_3defender");
    std::ostringstream a, b, ta, tb;
    const auto m1 = run(s);
    const auto m2 = run(s);
    write_metrics_csv(m1, a);
    write_metrics_csv(m2, b);
    write_trace_csv(m1, ta);
    write_trace_csv(m2, tb);
    CHECK(a.str() == b.str());
    CHECK(ta.str() == tb.str());
  }

  TEST_CASE("sustained attacker fields the required bots for the engaged units") {
    auto s = testutil::bundled("fig5_economics");
    for (std::size_t k = 1; k <= 3; ++k) {
      s.defender_count_active = k;
      const auto m = run(s);
      REQUIRE_FALSE(m.waves.empty());
      const double need = dynamics::required_bots(100.0 * static_cast<double>(k), s.combat);
      CHECK(m.waves.front().bots == std::max<std::int64_t>(s.pricing.min_bots, std::llround(std::ceil(need))));
    }
  }

  TEST_CASE("the attacker quits at the end of the wave that breaks the margin") {
    const auto s = testutil::bundled("fig5_economics");
    const auto m = run(s);
    REQUIRE(m.quit.has_value());
    CHECK(m.quit->margin < 1.0);
    CHECK(m.quit->final_expense == m.total_expense());
    const auto& last = m.waves.back();
    CHECK(m.quit->time == doctest::Approx(last.start + s.attacker.wave_duration));
    // No wave starts after quitting.
    CHECK(m.waves.size() == 7);
    for (const auto& r : m.records) {
      if (r.t > m.quit->time) REQUIRE(r.active_bots == 0);
    }
  }

  TEST_CASE("bot knowledge cuts the attack once mitigation completes") {
    auto s = testutil::bundled("fig5_1defender");
    s.mitigation.mrt = 0.025;  // 90 s, shorter than a 300 s wave
    const auto m = run(s);
    check_conservation(m);
    bool knowledge = false;
    for (const auto& t : m.messages) knowledge = knowledge || t.kind == "BotKnowledge";
    CHECK(knowledge);
  }

  TEST_CASE("regional alarm sheds only low-priority work") {
    auto s = testutil::bundled("fig5_1defender");
    s.global_defense_power = 120.0;
    const auto m = run(s);
    check_conservation(m);
    bool ra = false;
    for (const auto& r : m.records) ra = ra || r.ra;
    CHECK(ra);
  }

  TEST_CASE("invalid scenarios are rejected before running") {
    auto s = testutil::bundled("fig5_1defender");
    s.defender_count_active = 4;
    s.attacker.wave_duration = 2000;
    try {
      run(s);
      FAIL("expected ScenarioInvalid");
    } catch (const ScenarioInvalid& e) {
      CHECK(e.problems().size() >= 2);
    }
  }
}
