#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jointguard/dynamics.hpp"
#include "jointguard/expense.hpp"
#include "jointguard/money.hpp"
#include "jointguard/protocol.hpp"
#include "jointguard/topology.hpp"

namespace jointguard::engine {

using topology::NodeId;

struct AttackerProfile {
  NodeId source;
  std::optional<Money> reward;  // unset: the attacker never runs out of motive
  double first_wave_at = 0.0;   // seconds
  double wave_duration = 300.0;
  double wave_period = 900.0;
  // Fixed bots per wave; 0 means the attacker fields
  // dynamics::required_bots against the alliance's engaged defense units.
  std::int64_t bots_per_wave = 0;
  double load_per_bot = 0.1;  // load units per second per active bot
};

struct BenignSource {
  NodeId node;
  double rate = 0.0;               // load units per second
  double verified_fraction = 0.0;  // share classified H
};

struct DefenderSpec {
  NodeId node;
  double capacity = 0.0;
  std::optional<double> threshold;  // defaults to threshold_fraction * capacity
  bool certificate_valid = true;
};

struct Scenario {
  std::string name = "scenario";
  topology::NetworkGraph graph;
  NodeId victim;
  NodeId diverter;  // upstream router that splits L-class traffic

  dynamics::CombatParams combat;
  expense::BotnetPricing pricing;
  expense::MitigationProfile mitigation;  // hours, like pricing.lease_duration
  AttackerProfile attacker;
  std::vector<BenignSource> benign;

  std::vector<DefenderSpec> defenders;  // defenders[0] is the primary defender
  std::size_t defender_count_active = 1;
  double victim_capacity = 0.0;
  double threshold_fraction = 0.8;
  double availability = 1.0;                   // coordinator pi
  std::optional<double> global_defense_power;  // default: active defenders' capacity
  double coordinator_latency = 0.005;          // seconds

  topology::RouteLifetimeModel routes{{1.0 / 600.0}};  // rates per second
  double base_latency = 0.09;                           // seconds
  double latency_cap = 2.86;

  double duration = 7200.0;  // seconds
  double tick = 1.0;
  std::uint64_t seed = 1;

  // Every violated constraint, in a stable order. Empty when runnable.
  std::vector<std::string> validate() const;
};

class ScenarioInvalid : public std::runtime_error {
 public:
  explicit ScenarioInvalid(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct MetricsRecord {
  double t = 0.0;
  double victim_util = 0.0;
  double primary_util = 0.0;
  double latency = 0.0;
  double link_util = 0.0;
  std::int64_t active_bots = 0;
  Money expense;
  bool la = false;
  bool ra = false;

  // Traffic ledger for the tick (load units per second).
  double injected = 0.0;
  double delivered = 0.0;
  double dropped = 0.0;
  double in_flight = 0.0;
  double shed_high = 0.0;  // H-class load shed or diverted; always 0
  std::vector<double> defender_util;
};

struct TraceEntry {
  double time = 0.0;
  std::string kind;
  std::string sender;
  std::string receiver;
  std::string payload_summary;
};

struct WaveRecord {
  double start = 0.0;
  std::int64_t bots = 0;
  Money expense;
};

struct QuitRecord {
  double time = 0.0;
  Money final_expense;
  double margin = 0.0;
};

struct MetricsTimeSeries {
  std::vector<MetricsRecord> records;
  std::vector<WaveRecord> waves;
  std::vector<TraceEntry> messages;
  std::optional<QuitRecord> quit;

  double mean_primary_util() const;
  double mean_victim_util() const;
  double mean_latency() const;
  double mean_link_util() const;
  double max_primary_util() const;
  Money total_expense() const;
};

// Offered traffic at one defender for one tick.
struct DefenderLoad {
  double capacity = 0.0;
  double high = 0.0;  // H-class, served first and never shed
  double low = 0.0;   // L-class share
};

struct TickInputs {
  double t = 0.0;
  double benign_high = 0.0;
  double benign_low = 0.0;
  double attack = 0.0;                   // attack load reaching the defenders
  double attack_dropped_upstream = 0.0;  // known-bot traffic dropped at the diverter
  std::vector<DefenderLoad> defenders;   // [0] is the primary defender
  double victim_capacity = 1.0;
  double link_capacity = 1.0;
  bool shed_low = false;  // regional alarm: uninspected L-class work is killed
  double base_latency = 0.09;
  double baseline_rho = 0.0;  // utilisation of the attack-free network
  double latency_cap = 2.86;
};

// base * (1 - baseline_rho) / (1 - rho), capped; rho >= 1 returns the cap.
double benign_latency(double rho, double baseline_rho, double base, double cap);

// Bottleneck utilisation seen by benign traffic.
double benign_rho(const TickInputs& in);

// Utilisation = offered load / capacity clamped to 1. Each defender serves
// its H load first, inspects L traffic with the remaining capacity (dropping
// the attack part) and passes the uninspected rest, or sheds it when
// shed_low is set.
MetricsRecord metrics_tick(const TickInputs& in);

enum class AttackerDecision { Continue, Quit };

struct AttackerLedger {
  Money cumulative_expense;
  std::optional<Money> reward;
};

// Quits once the profit margin reward / expense falls below 1.
AttackerDecision attacker_policy(const AttackerLedger& state, double margin);
AttackerDecision attacker_policy(const AttackerLedger& state);

// Runs the event loop. Throws ScenarioInvalid before any event executes.
MetricsTimeSeries run(const Scenario& s);

// One run per defender count with the same seed, in parallel.
std::vector<MetricsTimeSeries> run_sweep(const Scenario& base, const std::vector<std::size_t>& counts);

// `t,victim_util,primary_util,latency,link_util,active_bots,expense,la,ra`
void write_metrics_csv(const MetricsTimeSeries& series, std::ostream& out);
// `time,kind,sender,receiver,payload_summary`
void write_trace_csv(const MetricsTimeSeries& series, std::ostream& out);

}  // namespace jointguard::engine
