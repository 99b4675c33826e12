#include "jointguard/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "jointguard/csv.hpp"
#include "jointguard/engine.hpp"
#include "jointguard/expense.hpp"
#include "jointguard/scenario.hpp"

namespace jointguard::cli {

namespace fs = std::filesystem;

std::string scenario_hash(const std::string& text, std::uint64_t seed, std::size_t active) {
  return csv::digest(fmt::format("{}\n#seed={}\n#active={}\n", text, seed, active));
}

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using FileSet = std::vector<std::pair<fs::path, std::string>>;

// Everything is rendered before the first write; a failed write removes
// the files this call already produced.
void write_all(const fs::path& dir, const FileSet& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw scenario::IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  std::vector<fs::path> written;
  try {
    for (const auto& [name, body] : files) {
      csv::write_atomically(dir / name, body);
      written.push_back(dir / name);
    }
  } catch (const std::exception& e) {
    for (const auto& p : written) fs::remove(p, ec);
    throw scenario::IoError(e.what());
  }
}

std::string metrics_file(const engine::MetricsTimeSeries& m, const std::string& hash) {
  std::ostringstream os;
  os << csv::header_comment(hash);
  if (m.quit) {
    os << fmt::format("# attacker_quit t={} expense={} margin={}\n", csv::format_real(m.quit->time),
                      m.quit->final_expense.to_string(), csv::format_real(m.quit->margin));
  }
  engine::write_metrics_csv(m, os);
  return os.str();
}

std::string trace_file(const engine::MetricsTimeSeries& m, const std::string& hash) {
  std::ostringstream os;
  os << csv::header_comment(hash);
  engine::write_trace_csv(m, os);
  return os.str();
}

std::string summary_text(const engine::Scenario& s, const engine::MetricsTimeSeries& m, const std::string& hash) {
  std::string q = "none";
  if (m.quit) {
    q = fmt::format("t={} expense=${} margin={:.4f}", csv::format_real(m.quit->time), m.quit->final_expense.to_cents_string(),
                    m.quit->margin);
  }
  return fmt::format(
      "scenario: {}\n"
      "scenario_hash: {}\n"
      "active_defenders: {}\n"
      "seed: {}\n"
      "mean_primary_util: {:.6f}\n"
      "max_primary_util: {:.6f}\n"
      "mean_victim_util: {:.6f}\n"
      "mean_link_util: {:.6f}\n"
      "mean_latency_s: {:.6f}\n"
      "waves: {}\n"
      "total_expense: ${}\n"
      "attacker_quit: {}\n",
      s.name, hash, s.defender_count_active, s.seed, m.mean_primary_util(), m.max_primary_util(), m.mean_victim_util(),
      m.mean_link_util(), m.mean_latency(), m.waves.size(), m.total_expense().to_cents_string(), q);
}

void add_run_files(FileSet& files, const std::string& stem, const engine::Scenario& s,
                   const engine::MetricsTimeSeries& m, const std::string& hash) {
  files.emplace_back(stem + "_metrics.csv", metrics_file(m, hash));
  files.emplace_back(stem + "_messages.csv", trace_file(m, hash));
  files.emplace_back(stem + "_summary.txt", summary_text(s, m, hash));
}

int cmd_simulate(const std::string& file, std::optional<std::uint64_t> seed, std::optional<std::size_t> active,
                 const fs::path& out_dir, std::ostream& out) {
  const std::string text = scenario::read_file(file);
  engine::Scenario s = scenario::parse_scenario(text);
  if (seed) s.seed = *seed;
  if (active) s.defender_count_active = *active;
  const auto m = engine::run(s);
  const auto hash = scenario_hash(text, s.seed, s.defender_count_active);
  FileSet files;
  add_run_files(files, s.name, s, m, hash);
  write_all(out_dir, files);
  out << files.back().second;
  return kExitOk;
}

int cmd_sweep(const std::string& file, std::vector<std::size_t> counts, std::optional<std::uint64_t> seed,
              const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  if (counts.empty()) throw ValidationError("--defenders needs at least one count");
  std::sort(counts.begin(), counts.end());
  if (std::adjacent_find(counts.begin(), counts.end()) != counts.end()) {
    throw ValidationError("--defenders lists a count twice");
  }
  if (counts.size() == 1) return cmd_simulate(file, seed, counts.front(), out_dir, out);

  const std::string text = scenario::read_file(file);
  engine::Scenario base = scenario::parse_scenario(text);
  if (seed) base.seed = *seed;
  for (std::size_t k : counts) {
    engine::Scenario probe = base;
    probe.defender_count_active = k;
    auto problems = probe.validate();
    if (!problems.empty()) throw engine::ScenarioInvalid(std::move(problems));
  }
  const auto results = engine::run_sweep(base, counts);

  FileSet files;
  std::ostringstream cmp;
  cmp << csv::header_comment(scenario_hash(text, base.seed, 0));
  cmp << "defenders,mean_primary_util,max_primary_util,mean_victim_util,mean_link_util,mean_latency,waves,"
         "total_expense,attacker_quit_t\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    engine::Scenario s = base;
    s.defender_count_active = counts[i];
    const auto& m = results[i];
    add_run_files(files, fmt::format("{}_d{}", s.name, counts[i]), s, m, scenario_hash(text, s.seed, counts[i]));
    cmp << fmt::format("{},{},{},{},{},{},{},{},{}\n", counts[i], csv::format_real(m.mean_primary_util()),
                       csv::format_real(m.max_primary_util()), csv::format_real(m.mean_victim_util()),
                       csv::format_real(m.mean_link_util()), csv::format_real(m.mean_latency()), m.waves.size(),
                       m.total_expense().to_string(), m.quit ? csv::format_real(m.quit->time) : std::string{});
  }
  files.emplace_back(base.name + "_sweep.csv", cmp.str());
  write_all(out_dir, files);
  out << files.back().second;

  int status = kExitOk;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    const auto& prev = results[i - 1];
    const auto& cur = results[i];
    if (!(cur.mean_primary_util() < prev.mean_primary_util())) {
      err << fmt::format("ordering violation: mean primary utilisation {} defenders = {} is not below {} defenders = {}\n",
                         counts[i], cur.mean_primary_util(), counts[i - 1], prev.mean_primary_util());
      status = kExitOrdering;
    }
    if (!(cur.mean_latency() < prev.mean_latency())) {
      err << fmt::format("ordering violation: mean latency {} defenders = {} is not below {} defenders = {}\n",
                         counts[i], cur.mean_latency(), counts[i - 1], prev.mean_latency());
      status = kExitOrdering;
    }
  }
  return status;
}

struct ExpenseOptions {
  std::string config;
  std::optional<std::size_t> m, n;
  std::optional<double> low, high;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rental, setup;
  std::optional<double> lease_hours, mrt_hours;
  std::optional<std::int64_t> min_bots;
  std::string out_dir;
};

std::string render_table(const expense::ExpenseReport& r, const scenario::ExpenseConfig& c) {
  std::string s = fmt::format("lambda per (defender, vulnerability): m={} n={} values=[{}, {}) seed={}\n", c.m, c.n,
                              csv::format_real(c.low), csv::format_real(c.high), c.seed);
  s += fmt::format("{:>5}", "");
  for (std::size_t j = 0; j < r.vulnerabilities; ++j) s += fmt::format("{:>8}", fmt::format("C{}", j + 1));
  s += '\n';
  double lo = r.lambda.front();
  double hi = lo;
  for (std::size_t i = 0; i < r.defenders; ++i) {
    s += fmt::format("{:>5}", fmt::format("D{}", i + 1));
    for (std::size_t j = 0; j < r.vulnerabilities; ++j) {
      const double v = r.lambda_at(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      s += fmt::format("{:>8.0f}", v);
    }
    s += '\n';
  }
  s += fmt::format("expense multiplier range: {:.4f} .. {:.4f}\n", lo, hi);
  s += fmt::format("per-active-bot expense: ${}\n", r.pabe.to_cents_string());
  s += fmt::format("individual defense ({} bots): ${}\n", r.individual_bots, r.individual_expense.to_cents_string());
  s += fmt::format("joint defense at D{} x C{} (lambda {:.4f}): ${}\n", r.reported_defender + 1,
                   r.reported_vulnerability + 1, r.lambda_at(r.reported_defender, r.reported_vulnerability),
                   r.joint_expense.to_cents_string());
  return s;
}

Money parse_money_flag(const std::string& flag, const std::string& text) {
  try {
    return Money::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(fmt::format("{}: {}", flag, e.what()));
  }
}

int cmd_expense_table(const ExpenseOptions& o, std::ostream& out) {
  scenario::ExpenseConfig c;
  std::string source;
  if (!o.config.empty()) {
    source = scenario::read_file(o.config);
    c = scenario::parse_expense_config(source);
  } else {
    if (!o.m || !o.n || !o.low || !o.high || !o.seed) {
      throw ValidationError("expense-table needs -m, -n, --low, --high and --seed (or --config)");
    }
  }
  if (o.m) c.m = *o.m;
  if (o.n) c.n = *o.n;
  if (o.low) c.low = *o.low;
  if (o.high) c.high = *o.high;
  if (o.seed) c.seed = *o.seed;
  if (o.rental) c.pricing.rental_per_bot_per_lease = parse_money_flag("--rental", *o.rental);
  if (o.setup) c.pricing.setup_per_bot = parse_money_flag("--setup", *o.setup);
  if (o.lease_hours) c.pricing.lease_duration = *o.lease_hours;
  if (o.mrt_hours) c.mitigation.mrt = *o.mrt_hours;
  if (o.min_bots) c.pricing.min_bots = *o.min_bots;

  const auto report = expense::expense_table(c.m, c.n, c.low, c.high, c.seed, c.pricing, c.mitigation);
  out << render_table(report, c);
  if (!o.out_dir.empty()) {
    const std::string params =
        fmt::format("{}\nm={} n={} low={} high={} seed={} rental={} setup={} lease={} mrt={} min_bots={}", source, c.m,
                    c.n, c.low, c.high, c.seed, c.pricing.rental_per_bot_per_lease.to_string(),
                    c.pricing.setup_per_bot.to_string(), c.pricing.lease_duration, c.mitigation.mrt, c.pricing.min_bots);
    std::ostringstream os;
    os << csv::header_comment(csv::digest(params));
    expense::write_csv(report, os);
    write_all(o.out_dir, {{c.name + "_expense.csv", os.str()}});
  }
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint DDoS defense simulator", "jointguard"};
  app.set_version_flag("--version", std::string(JOINTGUARD_VERSION));
  app.require_subcommand(1);

  std::string file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> active;
  std::string out_dir = ".";

  auto* sim = app.add_subcommand("simulate", "Run one scenario and write metrics, message trace and summary");
  sim->add_option("file", file, "Scenario YAML")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_option("--active", active, "Override the number of active defenders");
  sim->add_option("--out", out_dir, "Output directory");

  std::vector<std::size_t> counts;
  auto* sweep = app.add_subcommand("sweep", "Run one scenario per defender count and compare");
  sweep->add_option("file", file, "Scenario YAML")->required();
  sweep->add_option("--defenders", counts, "Defender counts, e.g. 1,2,3")->required()->delimiter(',');
  sweep->add_option("--seed", seed, "Override the scenario seed");
  sweep->add_option("--out", out_dir, "Output directory");

  ExpenseOptions eo;
  auto* table = app.add_subcommand("expense-table", "Tabulate amplification factors for a random defense matrix");
  table->add_option("--config", eo.config, "Expense-table YAML supplying defaults");
  table->add_option("-m,--defenders", eo.m, "Number of defenders");
  table->add_option("-n,--vulnerabilities", eo.n, "Number of vulnerabilities");
  table->add_option("--low", eo.low, "Lower bound of defense values");
  table->add_option("--high", eo.high, "Upper bound of defense values");
  table->add_option("--seed", eo.seed, "Generator seed");
  table->add_option("--rental", eo.rental, "Rental price per bot per lease, dollars");
  table->add_option("--setup", eo.setup, "Setup cost per bot, dollars");
  table->add_option("--lease-hours", eo.lease_hours, "Lease duration in hours");
  table->add_option("--mrt-hours", eo.mrt_hours, "Mitigation response time in hours");
  table->add_option("--min-bots", eo.min_bots, "Smallest rentable botnet");
  table->add_option("--out", eo.out_dir, "Write <name>_expense.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(file, seed, active, out_dir, out);
    if (*sweep) return cmd_sweep(file, counts, seed, out_dir, out, err);
    if (*table) return cmd_expense_table(eo, out);
  } catch (const scenario::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const engine::ScenarioInvalid& e) {
    err << "error: invalid scenario\n";
    for (const auto& p : e.problems()) err << "  " << p << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace jointguard::cli
