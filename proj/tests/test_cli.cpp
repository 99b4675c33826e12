#include <doctest.h>

#include <regex>

#include "test_util.hpp"

using namespace jointguard;
using testutil::run_cli;
using testutil::slurp;
using testutil::TempDir;

namespace {

const std::string kMinimal = R"(schema_version: 1
name: tiny
graph:
  nodes:
    - {id: src, role: attacker-source}
    - {id: r, role: transit}
    - {id: d, role: defender, egress_filtering: true}
    - {id: v, role: victim}
  links:
    - {src: src, dst: r, capacity: 100, latency: 0.01}
    - {src: r, dst: d, capacity: 100, latency: 0.01, duplex: true}
    - {src: d, dst: v, capacity: 100, latency: 0.01, duplex: true}
combat: {alpha1: 1, alpha2: 0.02, alpha3: 1, alpha4: 0.01}
pricing: {rental_per_bot_per_lease: 0.06, lease_hours: 336, min_bots: 1000}
mitigation: {mrt_hours: 1}
attacker: {source: src, wave_duration: 10, wave_period: 20, load_per_bot: 0.01}
defenders:
  victim: v
  diverter: r
  victim_capacity: 50
  active: 1
  members:
    - {node: d, capacity: 20}
run: {duration: 60, seed: 1}
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

void expect_error(const std::string& text, int line, const std::string& fragment) {
  CAPTURE(fragment);
  try {
    scenario::parse_scenario(text);
    FAIL("expected ScenarioError");
  } catch (const scenario::ScenarioError& e) {
    if (line >= 0) CHECK(e.line() == line);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("minimal scenario loads") {
    const auto s = scenario::parse_scenario(kMinimal);
    CHECK(s.name == "tiny");
    CHECK(s.defenders.size() == 1);
    CHECK(s.pricing.rental_per_bot_per_lease == Money::parse("0.06"));
    CHECK_FALSE(s.attacker.reward.has_value());
    CHECK(s.threshold_fraction == 0.8);
  }

  TEST_CASE("errors carry line numbers") {
    expect_error(with("schema_version: 1", "schema_version: 2"), 1, "schema_version");
    expect_error(with("schema_version: 1\n", ""), -1, "schema_version");
    expect_error(with("run: {duration: 60, seed: 1}", "run: {duration: 60, seed: 1, colour: red}"), 24,
                 "unknown key 'run.colour'");
    expect_error(with("    - {node: d, capacity: 20}", "    - {node: q, capacity: 20}"), 23, "unknown node 'q'");
    expect_error(with("role: transit", "role: router"), 6, "unknown role");
    expect_error(with("mitigation: {mrt_hours: 1}", "mitigation: {mrt_hours: soon}"), 15, "mitigation.mrt_hours");
    expect_error(with("combat: {alpha1: 1, ", "combat: {"), 13, "combat.alpha1");
    expect_error(with("name: tiny", "name: [tiny"), -1, "syntax error");
  }

  TEST_CASE("pricing needs exactly one rental form") {
    expect_error(with("rental_per_bot_per_lease: 0.06", "rental_per_bot_per_lease: 0.06, bulk_price: 3000, bulk_bots: 50000"),
                 14, "exactly one");
    const auto s = scenario::parse_scenario(with("rental_per_bot_per_lease: 0.06", "bulk_price: 4000, bulk_bots: 50000"));
    CHECK(s.pricing.rental_per_bot_per_lease == Money::parse("0.08"));
  }

  TEST_CASE("engine constraints surface as validation errors") {
    CHECK_THROWS_AS(scenario::parse_scenario(with("active: 1", "active: 2")), scenario::ScenarioError);
  }

  TEST_CASE("bundled files load") {
    for (const char* n : {"fig5_1defender", "fig5_2defender", "fig5_3defender", "fig5_economics"}) {
      CHECK_NOTHROW(testutil::bundled(n));
    }
    const auto c = scenario::parse_expense_config(slurp(testutil::source_path("scenarios/table3.yaml")));
    CHECK(c.m == 8);
    CHECK(c.n == 10);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("simulate writes metrics, trace and summary") {
    TempDir dir;
    const auto r = run_cli({"simulate", testutil::source_path("scenarios/fig5_1defender.yaml").string(), "--out",
                            dir.path().string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mean_primary_util") != std::string::npos);
    const auto metrics = slurp(dir / "fig5_1defender_metrics.csv");
    CHECK(std::regex_search(metrics, std::regex("^# jointguard 0\\.1\\.0 scenario=[0-9a-f]{16}\n"
                                                "t,victim_util,primary_util,latency,link_util,active_bots,expense,la,ra\n")));
    CHECK(slurp(dir / "fig5_1defender_messages.csv").rfind("# jointguard ", 0) == 0);
    CHECK(std::filesystem::exists(dir / "fig5_1defender_summary.txt"));
  }

  TEST_CASE("malformed input leaves no output") {
    TempDir dir;
    write(dir / "bad.yaml", with("run: {duration: 60, seed: 1}", "run: {duration: 60, sed: 1}"));
    const auto out = dir / "out";
    const auto r = run_cli({"simulate", (dir / "bad.yaml").string(), "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 24") != std::string::npos);
    CHECK(testutil::files_in(out).empty());
    CHECK(run_cli({"simulate", (dir / "bad.yaml").string(), "--seed", "9", "--out", out.string()}).code == 1);
  }

  TEST_CASE("missing files and unwritable outputs are I/O errors") {
    TempDir dir;
    CHECK(run_cli({"simulate", (dir / "nope.yaml").string()}).code == 2);
    write(dir / "blocker", "x");
    CHECK(run_cli({"simulate", testutil::source_path("scenarios/fig5_1defender.yaml").string(), "--out",
                   (dir / "blocker" / "sub").string()})
              .code == 2);
  }

  TEST_CASE("bad arguments are validation errors") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"expense-table", "-m", "8"}).code == 1);
    CHECK(run_cli({"expense-table", "-m", "8", "-n", "10", "--low", "100", "--high", "1", "--seed", "7"}).code == 1);
    CHECK(run_cli({"sweep", testutil::source_path("scenarios/fig5_1defender.yaml").string(), "--defenders", "1,9"}).code ==
          1);
  }

  TEST_CASE("seed override changes the hash, not the schema") {
    TempDir a, b;
    const auto file = testutil::source_path("scenarios/fig5_2defender.yaml").string();
    REQUIRE(run_cli({"simulate", file, "--out", a.path().string()}).code == 0);
    REQUIRE(run_cli({"simulate", file, "--seed", "7", "--out", b.path().string()}).code == 0);
    const auto sa = slurp(a / "fig5_2defender_summary.txt");
    const auto sb = slurp(b / "fig5_2defender_summary.txt");
    CHECK(sa.find("seed: 42") != std::string::npos);
    CHECK(sb.find("seed: 7") != std::string::npos);
    CHECK(slurp(a / "fig5_2defender_metrics.csv").substr(0, 50) != slurp(b / "fig5_2defender_metrics.csv").substr(0, 50));
  }

  TEST_CASE("sweep over one count is a plain simulate") {
    TempDir a, b;
    const auto file = testutil::source_path("scenarios/fig5_1defender.yaml").string();
    REQUIRE(run_cli({"sweep", file, "--defenders", "1", "--out", a.path().string()}).code == 0);
    REQUIRE(run_cli({"simulate", file, "--out", b.path().string()}).code == 0);
    const auto fa = testutil::files_in(a.path());
    REQUIRE(fa.size() == 3);
    for (const auto& p : fa) CHECK(slurp(p) == slurp(b / p.filename().string()));
  }

  TEST_CASE("sweep writes per-count runs and a comparison table") {
    TempDir dir;
    const auto r = run_cli({"sweep", testutil::source_path("scenarios/fig5_1defender.yaml").string(), "--defenders",
                            "3,1,2", "--out", dir.path().string()});
    CHECK(r.code == 0);
    CHECK(testutil::files_in(dir.path()).size() == 10);
    const auto cmp = slurp(dir / "fig5_1defender_sweep.csv");
    CHECK(cmp.find("\n1,") < cmp.find("\n2,"));
    CHECK(cmp.find("\n2,") < cmp.find("\n3,"));
  }

  TEST_CASE("expense table") {
    TempDir dir;
    const auto r = run_cli({"expense-table", "-m", "2", "-n", "4", "--low", "5", "--high", "5", "--seed", "1", "--out",
                            dir.path().string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("D1       2       2       2       2") != std::string::npos);
    CHECK(r.out.find("D2       2       2       2       2") != std::string::npos);
    const auto csv = slurp(dir / "expense_expense.csv");
    CHECK(csv.rfind("# jointguard 0.1.0 scenario=", 0) == 0);

    const auto cfg = run_cli({"expense-table", "--config", testutil::source_path("scenarios/table3.yaml").string()});
    const auto flags = run_cli({"expense-table", "-m", "8", "-n", "10", "--low", "1", "--high", "100", "--seed", "7",
                                "--rental", "0.06", "--lease-hours", "336", "--mrt-hours", "1"});
    REQUIRE(cfg.code == 0);
    CHECK(cfg.out == flags.out);
    CHECK(cfg.out.find("per-active-bot expense: $20.16") != std::string::npos);
  }
}
