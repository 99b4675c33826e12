#include "jointguard/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

namespace jointguard::scenario {

ScenarioError::ScenarioError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

namespace {

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

// Typed access to one YAML mapping that remembers which keys were consumed
// so leftovers can be rejected.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ScenarioError(line_of(node_), fmt::format("'{}' must be a mapping", path_));
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n || n.IsNull()) {
      throw ScenarioError(line_of(node_), fmt::format("missing required field '{}'", qualified(key)));
    }
    return n;
  }

  YAML::Node optional_child(const std::string& key) {
    seen_.insert(key);
    return node_[key];
  }

  template <typename T>
  T get(const std::string& key) {
    return convert<T>(child(key), key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    const YAML::Node n = optional_child(key);
    if (!n || n.IsNull()) return fallback;
    return convert<T>(n, key);
  }

  Money money(const std::string& key) { return parse_money(child(key), key); }

  Money money_or(const std::string& key, Money fallback) {
    const YAML::Node n = optional_child(key);
    if (!n || n.IsNull()) return fallback;
    return parse_money(n, key);
  }

  Section section(const std::string& key) { return Section(child(key), qualified(key)); }

  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (seen_.count(key) == 0) {
        throw ScenarioError(line_of(kv.first), fmt::format("unknown key '{}'", qualified(key)));
      }
    }
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  int line() const { return line_of(node_); }

 private:
  template <typename T>
  T convert(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) throw ScenarioError(line_of(n), fmt::format("'{}' must be a scalar", qualified(key)));
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ScenarioError(line_of(n), fmt::format("'{}' has an invalid value '{}'", qualified(key), n.Scalar()));
    }
  }

  Money parse_money(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) throw ScenarioError(line_of(n), fmt::format("'{}' must be a scalar", qualified(key)));
    try {
      return Money::parse(n.Scalar());
    } catch (const std::exception& e) {
      throw ScenarioError(line_of(n), fmt::format("'{}': {}", qualified(key), e.what()));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

YAML::Node parse_document(const std::string& text) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw ScenarioError(line_of(root), "document must be a mapping");
    return root;
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(e.mark.line + 1, fmt::format("syntax error: {}", e.msg));
  }
}

void check_schema_version(Section& root) {
  const YAML::Node v = root.child("schema_version");
  int version = 0;
  try {
    version = v.as<int>();
  } catch (const YAML::Exception&) {
    throw ScenarioError(line_of(v), "schema_version must be an integer");
  }
  if (version != kSchemaVersion) {
    throw ScenarioError(line_of(v), fmt::format("unsupported schema_version {} (expected {})", version, kSchemaVersion));
  }
}

topology::NodeId node_ref(const topology::NetworkGraph& g, const YAML::Node& n, const std::string& what) {
  const auto name = n.as<std::string>();
  if (auto id = g.find(name)) return *id;
  throw ScenarioError(line_of(n), fmt::format("{} refers to unknown node '{}'", what, name));
}

template <typename Fn>
void located(int line, Fn&& fn) {
  try {
    fn();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(line, e.what());
  }
}

expense::BotnetPricing read_pricing(Section sec) {
  expense::BotnetPricing p;
  p.setup_per_bot = sec.money_or("setup_per_bot", Money{});
  const bool per_bot = sec.has("rental_per_bot_per_lease");
  const bool bulk = sec.has("bulk_price") || sec.has("bulk_bots");
  if (per_bot == bulk) {
    throw ScenarioError(sec.line(),
                        "pricing needs exactly one of 'rental_per_bot_per_lease' or 'bulk_price' + 'bulk_bots'");
  }
  if (per_bot) {
    p.rental_per_bot_per_lease = sec.money("rental_per_bot_per_lease");
  } else {
    const Money total = sec.money("bulk_price");
    const auto bots = sec.get<std::int64_t>("bulk_bots");
    located(sec.line(), [&] { p.rental_per_bot_per_lease = expense::rental_from_bulk(total, bots); });
  }
  p.lease_duration = sec.get<double>("lease_hours");
  p.min_bots = sec.get<std::int64_t>("min_bots");
  sec.finish();
  located(sec.line(), [&] { p.validate(); });
  return p;
}

expense::MitigationProfile read_mitigation(Section sec) {
  expense::MitigationProfile m;
  m.mrt = sec.get<double>("mrt_hours");
  sec.finish();
  located(sec.line(), [&] { m.validate(); });
  return m;
}

void read_graph(Section sec, topology::NetworkGraph& g) {
  const YAML::Node nodes = sec.child("nodes");
  if (!nodes.IsSequence()) throw ScenarioError(line_of(nodes), "graph.nodes must be a list");
  for (const auto& item : nodes) {
    Section n(item, "graph.nodes[]");
    const auto id = n.get<std::string>("id");
    const YAML::Node role_node = n.child("role");
    const auto role = topology::parse_role(role_node.as<std::string>());
    if (!role) throw ScenarioError(line_of(role_node), fmt::format("unknown role '{}'", role_node.as<std::string>()));
    const bool egress = n.get_or<bool>("egress_filtering", false);
    n.finish();
    located(n.line(), [&] { g.add_node(id, *role, egress); });
  }
  const YAML::Node links = sec.child("links");
  if (!links.IsSequence()) throw ScenarioError(line_of(links), "graph.links must be a list");
  for (const auto& item : links) {
    Section l(item, "graph.links[]");
    const auto src = node_ref(g, l.child("src"), "link src");
    const auto dst = node_ref(g, l.child("dst"), "link dst");
    const auto capacity = l.get<double>("capacity");
    const auto latency = l.get<double>("latency");
    const bool duplex = l.get_or<bool>("duplex", false);
    l.finish();
    located(l.line(), [&] {
      if (duplex) {
        g.add_duplex_link(src, dst, capacity, latency);
      } else {
        g.add_link(src, dst, capacity, latency);
      }
    });
  }
  sec.finish();
}

}  // namespace

engine::Scenario parse_scenario(const std::string& text) {
  const YAML::Node doc = parse_document(text);
  Section root(doc, "");
  check_schema_version(root);

  engine::Scenario s;
  s.name = root.get<std::string>("name");
  read_graph(root.section("graph"), s.graph);
  auto& g = s.graph;

  {
    Section c = root.section("combat");
    s.combat.alpha1 = c.get<double>("alpha1");
    s.combat.alpha2 = c.get<double>("alpha2");
    s.combat.alpha3 = c.get<double>("alpha3");
    s.combat.alpha4 = c.get<double>("alpha4");
    c.finish();
    located(c.line(), [&] { s.combat.validate(); });
  }
  s.pricing = read_pricing(root.section("pricing"));
  s.mitigation = read_mitigation(root.section("mitigation"));

  {
    Section a = root.section("attacker");
    s.attacker.source = node_ref(g, a.child("source"), "attacker.source");
    const YAML::Node reward = a.optional_child("reward");
    if (reward && !reward.IsNull()) s.attacker.reward = a.money("reward");
    s.attacker.first_wave_at = a.get_or<double>("first_wave_at", 0.0);
    s.attacker.wave_duration = a.get<double>("wave_duration");
    s.attacker.wave_period = a.get<double>("wave_period");
    s.attacker.bots_per_wave = a.get_or<std::int64_t>("bots_per_wave", 0);
    s.attacker.load_per_bot = a.get<double>("load_per_bot");
    a.finish();
  }

  if (const YAML::Node benign = root.optional_child("benign"); benign && !benign.IsNull()) {
    if (!benign.IsSequence()) throw ScenarioError(line_of(benign), "benign must be a list");
    for (const auto& item : benign) {
      Section b(item, "benign[]");
      engine::BenignSource src;
      src.node = node_ref(g, b.child("source"), "benign.source");
      src.rate = b.get<double>("rate");
      src.verified_fraction = b.get_or<double>("verified_fraction", 0.0);
      b.finish();
      s.benign.push_back(src);
    }
  }

  {
    Section d = root.section("defenders");
    s.victim = node_ref(g, d.child("victim"), "defenders.victim");
    s.diverter = node_ref(g, d.child("diverter"), "defenders.diverter");
    s.victim_capacity = d.get<double>("victim_capacity");
    s.defender_count_active = d.get<std::size_t>("active");
    s.threshold_fraction = d.get_or<double>("threshold_fraction", s.threshold_fraction);
    s.availability = d.get_or<double>("availability", s.availability);
    if (const YAML::Node gp = d.optional_child("global_defense_power"); gp && !gp.IsNull()) {
      s.global_defense_power = d.get<double>("global_defense_power");
    }
    s.coordinator_latency = d.get_or<double>("coordinator_latency", s.coordinator_latency);
    const YAML::Node members = d.child("members");
    if (!members.IsSequence()) throw ScenarioError(line_of(members), "defenders.members must be a list");
    for (const auto& item : members) {
      Section m(item, "defenders.members[]");
      engine::DefenderSpec spec;
      spec.node = node_ref(g, m.child("node"), "defenders.members.node");
      spec.capacity = m.get<double>("capacity");
      if (const YAML::Node t = m.optional_child("threshold"); t && !t.IsNull()) spec.threshold = m.get<double>("threshold");
      spec.certificate_valid = m.get_or<bool>("certificate_valid", true);
      m.finish();
      s.defenders.push_back(spec);
    }
    d.finish();
  }

  if (const YAML::Node routes = root.optional_child("routes"); routes && !routes.IsNull()) {
    Section r(routes, "routes");
    const YAML::Node deltas = r.child("deltas");
    if (!deltas.IsSequence()) throw ScenarioError(line_of(deltas), "routes.deltas must be a list");
    s.routes.deltas.clear();
    for (const auto& v : deltas) {
      try {
        s.routes.deltas.push_back(v.as<double>());
      } catch (const YAML::Exception&) {
        throw ScenarioError(line_of(v), "routes.deltas entries must be numbers");
      }
    }
    r.finish();
  }

  if (const YAML::Node lat = root.optional_child("latency"); lat && !lat.IsNull()) {
    Section l(lat, "latency");
    s.base_latency = l.get_or<double>("base", s.base_latency);
    s.latency_cap = l.get_or<double>("cap", s.latency_cap);
    l.finish();
  }

  {
    Section r = root.section("run");
    s.duration = r.get<double>("duration");
    s.seed = r.get<std::uint64_t>("seed");
    s.tick = r.get_or<double>("tick", 1.0);
    r.finish();
  }
  root.finish();

  const auto problems = s.validate();
  if (!problems.empty()) throw ScenarioError(0, fmt::format("{}", fmt::join(problems, "; ")));
  return s;
}

engine::Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

ExpenseConfig parse_expense_config(const std::string& text) {
  const YAML::Node doc = parse_document(text);
  Section root(doc, "");
  check_schema_version(root);
  ExpenseConfig c;
  c.name = root.get<std::string>("name");
  {
    Section t = root.section("table");
    c.m = t.get<std::size_t>("m");
    c.n = t.get<std::size_t>("n");
    c.low = t.get<double>("low");
    c.high = t.get<double>("high");
    c.seed = t.get<std::uint64_t>("seed");
    t.finish();
    if (c.m < 2 || c.n < 1 || !(c.low > 0.0) || !(c.low <= c.high)) {
      throw ScenarioError(t.line(), "table needs m >= 2, n >= 1 and 0 < low <= high");
    }
  }
  c.pricing = read_pricing(root.section("pricing"));
  c.mitigation = read_mitigation(root.section("mitigation"));
  root.finish();
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

}  // namespace jointguard::scenario
