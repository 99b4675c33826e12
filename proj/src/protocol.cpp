#include "jointguard/protocol.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace jointguard::protocol {

TrafficClass classify(const Flow& flow, const KnownBots& known_bots, const std::set<Address>& verified,
                      bool granular) {
  if (known_bots.count(BotKey{flow.source, flow.destination}) != 0) {
    return {TrafficClassKind::Drop, std::nullopt};
  }
  if (verified.count(flow.source) != 0) return {TrafficClassKind::High, 100};
  if (!granular || !flow.legitimacy_score) return {TrafficClassKind::Low, std::nullopt};
  const double score = *flow.legitimacy_score;
  const int level = score >= 95.0 ? 95 : score >= 85.0 ? 85 : 75;
  return {TrafficClassKind::Low, level};
}

bool CoordinatorState::admit(const Member& member) {
  if (!member.certificate_valid || !member.egress_filtering) return false;
  registry[member.id] = member;
  reputation.emplace(member.id, 0.0);
  return true;
}

void CoordinatorState::credit(NodeId member, double work) {
  if (!is_member(member)) throw std::out_of_range(fmt::format("node {} is not an alliance member", member.value));
  if (work > 0.0) reputation[member] += work;
}

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::LocalAlarm: return "LocalAlarm";
    case MessageKind::RegionalAlarm: return "RegionalAlarm";
    case MessageKind::AlarmClear: return "AlarmClear";
    case MessageKind::HelpRequest: return "HelpRequest";
    case MessageKind::Update: return "Update";
    case MessageKind::Query: return "Query";
    case MessageKind::BotKnowledge: return "BotKnowledge";
  }
  return "Unknown";
}

const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Send: return "Send";
    case ActionKind::OffloadLowPriority: return "OffloadLowPriority";
    case ActionKind::MitigateLocally: return "MitigateLocally";
    case ActionKind::KillLowPriority: return "KillLowPriority";
    case ActionKind::OrganizeDefenseUnits: return "OrganizeDefenseUnits";
    case ActionKind::StopOffload: return "StopOffload";
  }
  return "Unknown";
}

std::string Message::payload_summary() const {
  switch (kind) {
    case MessageKind::LocalAlarm:
    case MessageKind::HelpRequest:
    case MessageKind::RegionalAlarm:
      return fmt::format("force={:.3f}", attack_force);
    case MessageKind::BotKnowledge:
      return fmt::format("bots={}", bots.size());
    case MessageKind::Update:
      return fmt::format("capability={:.3f}", capability);
    case MessageKind::AlarmClear:
    case MessageKind::Query:
      break;
  }
  return "";
}

namespace {

Action send(MessageKind kind, NodeId from, NodeId to, double force = 0.0) {
  Message m;
  m.kind = kind;
  m.sender = from;
  m.receiver = to;
  m.attack_force = force;
  return Action{ActionKind::Send, std::move(m), 0.0};
}

void clear_regional(CoordinatorState& coord, std::vector<Action>& actions) {
  if (!coord.ra) return;
  coord.ra = false;
  actions.push_back(send(MessageKind::AlarmClear, kCoordinator, kAllMembers));
}

}  // namespace

StepResult alarm_step(AgentState agent, CoordinatorState coord, double attack_force, double local_capacity,
                      double alliance_available) {
  if (attack_force < 0.0 || local_capacity < 0.0 || alliance_available < 0.0) {
    throw std::invalid_argument("alarm_step needs nonnegative forces and capacities");
  }
  std::vector<Action> actions;
  const NodeId self = agent.defender;

  if (attack_force < agent.threshold) {
    if (agent.la) {
      clear_regional(coord, actions);
      agent.la = false;
      agent.escalated = false;
      for (NodeId peer : agent.peers) actions.push_back(send(MessageKind::AlarmClear, self, peer));
      actions.push_back(Action{ActionKind::StopOffload, std::nullopt, 0.0});
    }
    return {std::move(agent), std::move(coord), std::move(actions)};
  }

  if (!agent.la) {
    agent.la = true;
    for (NodeId peer : agent.peers) actions.push_back(send(MessageKind::LocalAlarm, self, peer, attack_force));
  }
  actions.push_back(Action{ActionKind::OffloadLowPriority, std::nullopt, attack_force - agent.threshold});

  // The victim and the requested peers together cannot suppress the attack.
  const bool needs_coordinator = local_capacity <= 0.0 || attack_force > agent.capacity + local_capacity;
  if (!needs_coordinator) {
    clear_regional(coord, actions);
    agent.escalated = false;
    actions.push_back(Action{ActionKind::MitigateLocally, std::nullopt, attack_force});
    return {std::move(agent), std::move(coord), std::move(actions)};
  }

  if (!agent.escalated) {
    agent.escalated = true;
    actions.push_back(send(MessageKind::HelpRequest, self, kCoordinator, attack_force));
  }
  if (attack_force >= alliance_available) {
    if (!coord.ra) {
      coord.ra = true;
      Message alarm;
      alarm.kind = MessageKind::RegionalAlarm;
      alarm.sender = kCoordinator;
      alarm.receiver = kAllMembers;
      alarm.attack_force = attack_force;
      actions.push_back(Action{ActionKind::Send, std::move(alarm), 0.0});
    }
    actions.push_back(Action{ActionKind::KillLowPriority, std::nullopt, attack_force - alliance_available});
  } else {
    clear_regional(coord, actions);
    coord.availability = 1.0;
    actions.push_back(Action{ActionKind::OrganizeDefenseUnits, std::nullopt, attack_force});
  }
  return {std::move(agent), std::move(coord), std::move(actions)};
}

expense::CapabilityVector capability_vector(const topology::NetworkGraph& g, NodeId victim,
                                            const std::vector<NodeId>& members) {
  if (!g.contains(victim)) throw std::out_of_range("capability_vector: unknown victim");
  const auto dist = topology::distances_to(g, victim);
  std::vector<int> flags;
  flags.reserve(members.size());
  for (NodeId id : members) {
    if (!g.contains(id)) throw std::out_of_range(fmt::format("capability_vector: unknown member {}", id.value));
    const bool upstream = id != victim && dist[id.value].has_value();
    flags.push_back(upstream && g.node(id).egress_filtering ? 1 : 0);
  }
  return expense::CapabilityVector(std::move(flags));
}

OffloadPlan orchestrate_offload(const topology::NetworkGraph& g, const OffloadRequest& request,
                                topology::DistanceMetric metric) {
  if (!(request.excess >= 0.0)) throw std::invalid_argument("offload excess must be >= 0");
  const auto candidates = topology::loop_free_candidates(g, request.diverter, request.victim, metric);
  if (candidates.victim_unreachable) {
    throw allocation::InfeasibleProblem(
        fmt::format("victim '{}' is unreachable from '{}'", g.node(request.victim).name, g.node(request.diverter).name));
  }

  OffloadPlan plan;
  for (NodeId n : candidates.nodes) {
    const auto cap = request.capacity.find(n);
    if (cap == request.capacity.end() || !(cap->second > 0.0)) continue;
    if (!g.node(n).egress_filtering) continue;
    plan.collaborators.push_back(n);
  }
  if (plan.collaborators.empty()) {
    throw allocation::InfeasibleProblem(
        fmt::format("no capable loop-free collaborator downstream of '{}'", g.node(request.diverter).name));
  }

  allocation::WorkloadProblem problem;
  const std::size_t m = plan.collaborators.size();
  problem.capacity.reserve(m);
  for (NodeId n : plan.collaborators) problem.capacity.push_back(request.capacity.at(n));
  problem.attack_power.push_back(request.excess);
  problem.eligible.assign(m, std::vector<bool>{true});
  for (std::size_t k = 0; k < m; ++k) {
    const auto pin = request.pinned.find(plan.collaborators[k]);
    if (pin == request.pinned.end() || pin->second <= 0.0) continue;
    problem.attack_power.push_back(pin->second);
    for (std::size_t i = 0; i < m; ++i) problem.eligible[i].push_back(i == k);
  }

  plan.allocation = allocation::solve_exact(problem, 1e-9);
  plan.pi = plan.allocation.pi;
  plan.shares.reserve(m);
  for (std::size_t i = 0; i < m; ++i) plan.shares.push_back(plan.allocation.assign[i][0]);
  return plan;
}

std::vector<AgentState> share_bot_knowledge(std::vector<AgentState> agents, const BotKey& discovery) {
  for (auto& a : agents) a.known_bots.insert(discovery);
  return agents;
}

}  // namespace jointguard::protocol
