#include "jointguard/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>

#include <fmt/format.h>

#include "jointguard/csv.hpp"
#include "jointguard/rng.hpp"

namespace jointguard::engine {

namespace {

constexpr double kMsPerSecond = 1000.0;
constexpr double kSecondsPerHour = 3600.0;

std::int64_t to_ms(double seconds) { return std::llround(seconds * kMsPerSecond); }

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Validation

ScenarioInvalid::ScenarioInvalid(std::vector<std::string> problems)
    : std::runtime_error(problems.empty() ? std::string("invalid scenario")
                                          : fmt::format("invalid scenario: {}", problems.front())),
      problems_(std::move(problems)) {}

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> errs;
  auto check = [&errs](bool ok, std::string msg) {
    if (!ok) errs.push_back(std::move(msg));
  };
  auto guarded = [&errs](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      errs.push_back(fmt::format("{}: {}", what, e.what()));
    }
  };

  const auto& g = graph;
  check(g.contains(victim) && g.node(victim).role == topology::NodeRole::Victim, "victim must be a node with role victim");
  check(g.contains(diverter), "diverter must be a node of the graph");
  check(g.contains(attacker.source), "attacker source must be a node of the graph");
  check(!g.nodes_with_role(topology::NodeRole::Victim).empty(), "graph needs at least one victim");
  guarded("combat", [&] { combat.validate(); });
  guarded("pricing", [&] { pricing.validate(); });
  guarded("mitigation", [&] { mitigation.validate(); });
  guarded("routes", [&] { routes.validate(); });

  check(positive_finite(duration), "duration must be positive");
  check(positive_finite(tick) && tick * kMsPerSecond >= 1.0, "tick must be at least 1 ms");
  check(positive_finite(attacker.wave_duration), "wave_duration must be positive");
  check(attacker.wave_duration < attacker.wave_period, "wave_duration must be shorter than wave_period");
  check(attacker.first_wave_at >= 0.0, "first_wave_at must be >= 0");
  check(attacker.load_per_bot >= 0.0 && std::isfinite(attacker.load_per_bot), "load_per_bot must be >= 0");
  check(attacker.bots_per_wave == 0 || attacker.bots_per_wave >= pricing.min_bots,
        fmt::format("bots_per_wave must be 0 (derived) or at least min_bots = {}", pricing.min_bots));
  if (attacker.reward) check(*attacker.reward >= Money{}, "reward must be >= 0");

  check(!defenders.empty(), "at least one defender is required");
  check(defender_count_active >= 1 && defender_count_active <= defenders.size(),
        fmt::format("active defender count must lie in [1, {}]", defenders.size()));
  for (const auto& d : defenders) {
    const bool known = g.contains(d.node);
    check(known, "defender node is not part of the graph");
    check(positive_finite(d.capacity), "defender capacity must be positive");
    if (d.threshold) check(positive_finite(*d.threshold), "defender threshold must be positive");
    if (known && g.contains(victim)) {
      check(topology::hop_distance(g, d.node, victim).has_value(),
            fmt::format("defender '{}' cannot reach the victim", g.node(d.node).name));
    }
  }
  check(positive_finite(victim_capacity), "victim_capacity must be positive");
  check(threshold_fraction > 0.0 && threshold_fraction <= 1.0, "threshold_fraction must lie in (0, 1]");
  check(availability > 0.0 && availability <= 1.0, "availability must lie in (0, 1]");
  if (global_defense_power) check(positive_finite(*global_defense_power), "global_defense_power must be positive");
  check(coordinator_latency >= 0.0, "coordinator_latency must be >= 0");
  check(positive_finite(base_latency), "base latency must be positive");
  check(latency_cap >= base_latency, "latency cap must be >= base latency");
  for (const auto& b : benign) {
    check(g.contains(b.node), "benign source is not part of the graph");
    check(b.rate >= 0.0 && std::isfinite(b.rate), "benign rate must be >= 0");
    check(b.verified_fraction >= 0.0 && b.verified_fraction <= 1.0, "verified_fraction must lie in [0, 1]");
  }
  if (g.contains(victim) && g.contains(diverter)) {
    check(diverter != victim, "diverter must differ from the victim");
    if (diverter != victim) {
      check(!topology::loop_free_candidates(g, diverter, victim).victim_unreachable,
            "victim must be reachable from the diverter");
    }
    bool has_ingress = false;
    for (const auto& l : g.links()) has_ingress = has_ingress || l.dst == victim;
    check(has_ingress, "victim needs at least one ingress link");
  }
  return errs;
}

// ---------------------------------------------------------------------------
// Per-tick model

double benign_latency(double rho, double baseline_rho, double base, double cap) {
  if (rho >= 1.0) return cap;
  return std::min(cap, base * (1.0 - baseline_rho) / (1.0 - rho));
}

namespace {

MetricsRecord evaluate(const TickInputs& in) {
  MetricsRecord r;
  r.t = in.t;
  const double total_low = in.benign_low + in.attack;
  const double attack_share = total_low > 0.0 ? in.attack / total_low : 0.0;

  double passed = 0.0;
  double dropped = in.attack_dropped_upstream;
  double rho = 0.0;
  r.defender_util.reserve(in.defenders.size());
  for (const auto& d : in.defenders) {
    const double load = d.high + d.low;
    const double util = std::min(1.0, load / d.capacity);
    r.defender_util.push_back(util);
    if (load > 0.0) rho = std::max(rho, util);

    const double room = std::max(0.0, d.capacity - d.high);
    const double inspected = std::min(d.low, room);
    const double uninspected = d.low - inspected;
    dropped += inspected * attack_share;
    passed += d.high + inspected * (1.0 - attack_share);
    (in.shed_low ? dropped : passed) += uninspected;
  }
  r.primary_util = r.defender_util.empty() ? 0.0 : r.defender_util.front();
  r.injected = in.benign_high + in.benign_low + in.attack + in.attack_dropped_upstream;
  r.delivered = passed;
  r.dropped = dropped;
  r.in_flight = 0.0;
  r.victim_util = std::min(1.0, passed / in.victim_capacity);
  r.link_util = std::min(1.0, passed / in.link_capacity);
  rho = std::max({rho, r.victim_util, r.link_util});
  r.latency = rho;  // replaced by the caller
  return r;
}

}  // namespace

double benign_rho(const TickInputs& in) { return evaluate(in).latency; }

MetricsRecord metrics_tick(const TickInputs& in) {
  MetricsRecord r = evaluate(in);
  r.latency = benign_latency(r.latency, in.baseline_rho, in.base_latency, in.latency_cap);
  return r;
}

AttackerDecision attacker_policy(const AttackerLedger& /*state*/, double margin) {
  return margin < 1.0 ? AttackerDecision::Quit : AttackerDecision::Continue;
}

AttackerDecision attacker_policy(const AttackerLedger& state) {
  if (!state.reward || state.cumulative_expense.units() == 0) return AttackerDecision::Continue;
  return attacker_policy(state, expense::profit_margin(*state.reward, state.cumulative_expense));
}

// ---------------------------------------------------------------------------
// Event loop

namespace {

enum class EventKind : int {
  AttackEnd = 0,
  MitigationComplete = 1,
  AttackStart = 2,
  MessageDelivery = 3,
  RouteRefresh = 4,
  MetricTick = 5,
};

struct Event {
  std::int64_t time_ms;
  EventKind kind;
  std::uint64_t seq;
  std::size_t payload;  // message index for deliveries

  bool operator>(const Event& o) const {
    if (time_ms != o.time_ms) return time_ms > o.time_ms;
    if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
    return seq > o.seq;
  }
};

constexpr protocol::Address kCohortBase = protocol::Address{1} << 32;

class Simulation {
 public:
  explicit Simulation(const Scenario& s) : s_(s), rng_(s.seed), end_ms_(to_ms(s.duration)) {}

  MetricsTimeSeries run() {
    setup();
    schedule(0, EventKind::RouteRefresh);
    schedule(0, EventKind::MetricTick);
    if (to_ms(s_.attacker.first_wave_at) < end_ms_) schedule(to_ms(s_.attacker.first_wave_at), EventKind::AttackStart);

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      now_ms_ = e.time_ms;
      switch (e.kind) {
        case EventKind::AttackStart: on_attack_start(); break;
        case EventKind::AttackEnd: on_attack_end(); break;
        case EventKind::MitigationComplete: on_mitigation_complete(); break;
        case EventKind::MessageDelivery: on_delivery(e.payload); break;
        case EventKind::RouteRefresh: on_route_refresh(); break;
        case EventKind::MetricTick: on_tick(); break;
      }
    }
    return std::move(out_);
  }

 private:
  void schedule(std::int64_t at_ms, EventKind kind, std::size_t payload = 0) {
    if (at_ms >= end_ms_) return;
    queue_.push(Event{at_ms, kind, seq_++, payload});
  }

  double now() const { return static_cast<double>(now_ms_) / kMsPerSecond; }

  std::string endpoint_name(NodeId id) const {
    if (id == protocol::kCoordinator) return "coordinator";
    if (id == protocol::kAllMembers) return "*";
    return s_.graph.node(id).name;
  }

  void setup() {
    const auto& g = s_.graph;
    active_.assign(s_.defenders.begin(), s_.defenders.begin() + static_cast<std::ptrdiff_t>(s_.defender_count_active));

    std::vector<NodeId> members;
    for (const auto& d : active_) members.push_back(d.node);
    const auto caps = protocol::capability_vector(g, s_.victim, members);

    coord_.availability = s_.availability;
    double admitted_power = 0.0;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      const auto& d = active_[k];
      const bool ok = coord_.admit(protocol::Member{d.node, d.certificate_valid, g.node(d.node).egress_filtering});
      if (ok && caps[k] == 1) {
        capacity_.emplace(d.node, d.capacity);
        admitted_power += d.capacity;
      }
    }
    coord_.global_defense_power = s_.global_defense_power.value_or(admitted_power);
    engaged_units_ = admitted_power > 0.0 ? admitted_power : active_.front().capacity;

    for (std::size_t k = 0; k < active_.size(); ++k) {
      protocol::AgentState a;
      a.defender = active_[k].node;
      a.capacity = active_[k].capacity;
      a.threshold = active_[k].threshold.value_or(s_.threshold_fraction * active_[k].capacity);
      a.capable = caps[k] == 1;
      agents_.push_back(std::move(a));
    }
    auto& primary = agents_.front();
    primary.peers.push_back(s_.diverter);
    for (std::size_t k = 1; k < active_.size(); ++k) {
      if (capacity_.count(active_[k].node) != 0) primary.peers.push_back(active_[k].node);
    }

    dist_to_victim_ = topology::distances_to(g, s_.victim);

    for (const auto& l : g.links()) {
      if (l.dst == s_.victim) link_capacity_ += l.capacity;
    }
    for (const auto& b : s_.benign) {
      benign_high_ += b.rate * b.verified_fraction;
      benign_low_ += b.rate * (1.0 - b.verified_fraction);
    }

    TickInputs quiet = inputs_for(0.0, 0.0, false);
    baseline_rho_ = benign_rho(quiet);
    if (baseline_rho_ >= 1.0) {
      throw ScenarioInvalid({"benign traffic alone saturates the network (baseline utilisation >= 1)"});
    }
  }

  // Message latency: shortest latency path between the two nodes in either
  // direction; coordinator traffic uses the configured coordinator latency.
  std::int64_t message_delay_ms(NodeId from, NodeId to) const {
    if (from == protocol::kCoordinator || to == protocol::kCoordinator || to == protocol::kAllMembers) {
      return std::max<std::int64_t>(1, to_ms(s_.coordinator_latency));
    }
    const auto& g = s_.graph;
    double best = -1.0;
    const auto d1 = topology::distances_to(g, to, topology::DistanceMetric::Latency)[from.value];
    const auto d2 = topology::distances_to(g, from, topology::DistanceMetric::Latency)[to.value];
    if (d1) best = *d1;
    if (d2 && (best < 0.0 || *d2 < best)) best = *d2;
    if (best < 0.0) best = s_.coordinator_latency;
    return std::max<std::int64_t>(1, to_ms(best));
  }

  void send(protocol::Message m) {
    const std::int64_t at = now_ms_ + message_delay_ms(m.sender, m.receiver);
    messages_.push_back(std::move(m));
    schedule(at, EventKind::MessageDelivery, messages_.size() - 1);
  }

  void on_delivery(std::size_t index) {
    const auto& m = messages_[index];
    out_.messages.push_back(
        TraceEntry{now(), protocol::to_string(m.kind), endpoint_name(m.sender), endpoint_name(m.receiver), m.payload_summary()});
    if (m.receiver != s_.diverter) return;
    if (m.kind == protocol::MessageKind::LocalAlarm) {
      offload_active_ = true;
      plan_dirty_ = true;
    } else if (m.kind == protocol::MessageKind::AlarmClear) {
      offload_active_ = false;
      plan_.reset();
    }
  }

  void on_route_refresh() {
    plan_dirty_ = true;
    const double interval = topology::sample_route_interval(s_.routes, rng_);
    schedule(now_ms_ + std::max<std::int64_t>(1, to_ms(interval)), EventKind::RouteRefresh);
  }

  void on_attack_start() {
    if (quit_) return;
    const auto& atk = s_.attacker;
    std::int64_t bots = atk.bots_per_wave;
    if (bots == 0) {
      const double needed = dynamics::required_bots(engaged_units_, s_.combat);
      bots = std::max(s_.pricing.min_bots, static_cast<std::int64_t>(std::ceil(needed - 1e-9)));
    }
    const Money cost = expense::botnet_expense(bots, s_.pricing, s_.mitigation);
    cumulative_ += cost;
    out_.waves.push_back(WaveRecord{now(), bots, cost});

    wave_on_ = true;
    active_bots_ = bots;
    ++cohort_;
    wave_end_ms_ = now_ms_ + to_ms(atk.wave_duration);
    schedule(wave_end_ms_, EventKind::AttackEnd);
    schedule_mitigation();
    schedule(now_ms_ + to_ms(atk.wave_period), EventKind::AttackStart);
  }

  void schedule_mitigation() {
    const std::int64_t at = now_ms_ + to_ms(s_.mitigation.mrt * kSecondsPerHour);
    if (at < wave_end_ms_) schedule(at, EventKind::MitigationComplete);
  }

  // The victim side identified the current cohort; the knowledge is shared
  // alliance-wide and the attacker replaces the neutralised bots (the
  // replacement is what the MRT-scaled per-bot price pays for).
  void on_mitigation_complete() {
    if (!wave_on_) return;
    const protocol::BotKey key{kCohortBase + cohort_, s_.victim};
    agents_ = protocol::share_bot_knowledge(std::move(agents_), key);
    protocol::Message m;
    m.kind = protocol::MessageKind::BotKnowledge;
    m.sender = agents_.front().defender;
    m.receiver = protocol::kAllMembers;
    m.bots.push_back(key);
    send(std::move(m));
    ++cohort_;
    schedule_mitigation();
  }

  void on_attack_end() {
    wave_on_ = false;
    active_bots_ = 0;
    const AttackerLedger ledger{cumulative_, s_.attacker.reward};
    if (attacker_policy(ledger) == AttackerDecision::Quit) {
      quit_ = true;
      const double margin = expense::profit_margin(*s_.attacker.reward, cumulative_);
      out_.quit = QuitRecord{now(), cumulative_, margin};
      out_.messages.push_back(TraceEntry{now(), "AttackerQuit", endpoint_name(s_.attacker.source), "*",
                                         fmt::format("expense={} margin={:.6f}", cumulative_.to_string(), margin)});
    }
  }

  TickInputs inputs_for(double attack, double attack_dropped, bool use_plan) const {
    TickInputs in;
    in.t = now();
    in.benign_high = benign_high_;
    in.benign_low = benign_low_;
    in.attack = attack;
    in.attack_dropped_upstream = attack_dropped;
    in.victim_capacity = s_.victim_capacity;
    in.link_capacity = link_capacity_;
    in.shed_low = coord_.ra;
    in.base_latency = s_.base_latency;
    in.baseline_rho = baseline_rho_;
    in.latency_cap = s_.latency_cap;
    in.defenders.reserve(active_.size());
    for (const auto& d : active_) in.defenders.push_back(DefenderLoad{d.capacity, 0.0, 0.0});
    in.defenders.front().high = benign_high_;
    if (!use_plan) {
      in.defenders.front().low = benign_low_ + attack;
      return in;
    }
    for (std::size_t c = 0; c < plan_->collaborators.size(); ++c) {
      const auto it = std::find_if(active_.begin(), active_.end(),
                                   [&](const DefenderSpec& d) { return d.node == plan_->collaborators[c]; });
      in.defenders[static_cast<std::size_t>(it - active_.begin())].low = plan_->shares[c];
    }
    return in;
  }

  void ensure_plan(double low_total) {
    if (!plan_dirty_ && plan_ && plan_low_ == low_total) return;
    protocol::OffloadRequest req;
    req.diverter = s_.diverter;
    req.victim = s_.victim;
    req.excess = low_total;
    req.capacity = capacity_;
    if (benign_high_ > 0.0) req.pinned.emplace(active_.front().node, benign_high_);
    try {
      plan_ = protocol::orchestrate_offload(s_.graph, req);
    } catch (const allocation::InfeasibleProblem&) {
      plan_.reset();  // nobody to offload to; the alarm logic escalates
    }
    plan_low_ = low_total;
    plan_dirty_ = false;
  }

  void assert_loop_free() const {
    const auto& own = dist_to_victim_[s_.diverter.value];
    for (NodeId c : plan_->collaborators) {
      const auto& d = dist_to_victim_[c.value];
      if (!own || !d || !(*d < *own)) {
        throw std::logic_error(fmt::format("offload to '{}' would not move traffic closer to the victim",
                                           s_.graph.node(c).name));
      }
    }
  }

  void on_tick() {
    // Offered traffic.
    double attack = wave_on_ ? static_cast<double>(active_bots_) * s_.attacker.load_per_bot : 0.0;
    double attack_dropped = 0.0;
    if (attack > 0.0) {
      const protocol::Flow flow{kCohortBase + cohort_, s_.victim, attack, std::nullopt};
      const auto cls = protocol::classify(flow, agents_.front().known_bots, {}, false);
      if (cls.kind == protocol::TrafficClassKind::Drop) {
        attack_dropped = attack;
        attack = 0.0;
      }
    }
    const double low_total = benign_low_ + attack;
    const double force = benign_high_ + low_total;

    // Alarm logic at the primary defender.
    double local_capacity = 0.0;
    for (std::size_t k = 1; k < active_.size(); ++k) {
      const auto it = capacity_.find(active_[k].node);
      if (it != capacity_.end()) local_capacity += it->second;
    }
    const bool la_before = agents_.front().la;
    const bool ra_before = coord_.ra;
    auto step = protocol::alarm_step(agents_.front(), coord_, force, local_capacity, coord_.available_power());
    agents_.front() = std::move(step.agent);
    coord_ = std::move(step.coordinator);
    for (auto& action : step.actions) {
      if (action.kind == protocol::ActionKind::Send && action.message) send(std::move(*action.message));
    }
    if (la_before != agents_.front().la || ra_before != coord_.ra) plan_dirty_ = true;

    // Routing.
    bool use_plan = false;
    if (offload_active_) {
      ensure_plan(low_total);
      if (plan_) {
        assert_loop_free();
        use_plan = true;
      }
    }
    const TickInputs in = inputs_for(attack, attack_dropped, use_plan);
    MetricsRecord rec = metrics_tick(in);
    if (use_plan) {
      for (std::size_t c = 0; c < plan_->collaborators.size(); ++c) {
        if (plan_->collaborators[c] != active_.front().node) {
          coord_.credit(plan_->collaborators[c], plan_->shares[c] * s_.tick);
        }
      }
    }
    rec.active_bots = active_bots_;
    rec.expense = cumulative_;
    rec.la = agents_.front().la;
    rec.ra = coord_.ra;
    out_.records.push_back(std::move(rec));

    schedule(now_ms_ + to_ms(s_.tick), EventKind::MetricTick);
  }

  const Scenario& s_;
  Rng rng_;
  std::int64_t end_ms_;
  std::int64_t now_ms_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::vector<protocol::Message> messages_;

  std::vector<DefenderSpec> active_;
  std::vector<protocol::AgentState> agents_;
  protocol::CoordinatorState coord_;
  std::map<NodeId, double> capacity_;  // admitted, capable active defenders
  double engaged_units_ = 0.0;
  std::vector<std::optional<double>> dist_to_victim_;
  double link_capacity_ = 0.0;
  double benign_high_ = 0.0;
  double benign_low_ = 0.0;
  double baseline_rho_ = 0.0;

  bool offload_active_ = false;
  bool plan_dirty_ = true;
  std::optional<protocol::OffloadPlan> plan_;
  double plan_low_ = -1.0;

  bool wave_on_ = false;
  bool quit_ = false;
  std::int64_t active_bots_ = 0;
  std::int64_t wave_end_ms_ = 0;
  std::uint64_t cohort_ = 0;
  Money cumulative_;

  MetricsTimeSeries out_;
};

}  // namespace

MetricsTimeSeries run(const Scenario& s) {
  auto problems = s.validate();
  if (!problems.empty()) throw ScenarioInvalid(std::move(problems));
  return Simulation(s).run();
}

std::vector<MetricsTimeSeries> run_sweep(const Scenario& base, const std::vector<std::size_t>& counts) {
  std::vector<Scenario> scenarios;
  scenarios.reserve(counts.size());
  for (std::size_t k : counts) {
    scenarios.push_back(base);
    scenarios.back().defender_count_active = k;
  }
  std::vector<std::future<MetricsTimeSeries>> jobs;
  jobs.reserve(scenarios.size());
  for (const auto& sc : scenarios) jobs.push_back(std::async(std::launch::async, [&sc] { return run(sc); }));
  std::vector<MetricsTimeSeries> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

// ---------------------------------------------------------------------------
// Summaries and CSV

namespace {

template <typename F>
double mean_of(const std::vector<MetricsRecord>& rs, F f) {
  if (rs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rs) sum += f(r);
  return sum / static_cast<double>(rs.size());
}

}  // namespace

double MetricsTimeSeries::mean_primary_util() const {
  return mean_of(records, [](const MetricsRecord& r) { return r.primary_util; });
}
double MetricsTimeSeries::mean_victim_util() const {
  return mean_of(records, [](const MetricsRecord& r) { return r.victim_util; });
}
double MetricsTimeSeries::mean_latency() const {
  return mean_of(records, [](const MetricsRecord& r) { return r.latency; });
}
double MetricsTimeSeries::mean_link_util() const {
  return mean_of(records, [](const MetricsRecord& r) { return r.link_util; });
}
double MetricsTimeSeries::max_primary_util() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.primary_util);
  return m;
}
Money MetricsTimeSeries::total_expense() const { return records.empty() ? Money{} : records.back().expense; }

void write_metrics_csv(const MetricsTimeSeries& series, std::ostream& out) {
  out << "t,victim_util,primary_util,latency,link_util,active_bots,expense,la,ra\n";
  for (const auto& r : series.records) {
    out << csv::format_real(r.t) << ',' << csv::format_real(r.victim_util) << ','
        << csv::format_real(r.primary_util) << ',' << csv::format_real(r.latency) << ','
        << csv::format_real(r.link_util) << ',' << r.active_bots << ',' << r.expense.to_string() << ','
        << (r.la ? 1 : 0) << ',' << (r.ra ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const MetricsTimeSeries& series, std::ostream& out) {
  out << "time,kind,sender,receiver,payload_summary\n";
  for (const auto& m : series.messages) {
    out << csv::format_real(m.time) << ',' << m.kind << ',' << m.sender << ',' << m.receiver << ','
        << m.payload_summary << '\n';
  }
}

}  // namespace jointguard::engine
