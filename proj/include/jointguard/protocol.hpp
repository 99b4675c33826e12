#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jointguard/allocation.hpp"
#include "jointguard/expense.hpp"
#include "jointguard/topology.hpp"

namespace jointguard::protocol {

using topology::NodeId;

// Traffic source address. Node sources use their node id; bot cohorts live
// above 2^32.
using Address = std::uint64_t;

struct BotKey {
  Address source = 0;
  NodeId victim;
  constexpr auto operator<=>(const BotKey&) const = default;
};
using KnownBots = std::set<BotKey>;

enum class TrafficClassKind { High, Low, Drop };

struct TrafficClass {
  TrafficClassKind kind = TrafficClassKind::Low;
  std::optional<int> legitimacy;  // percent; 100 for High, 95/85/75 for granular Low
};

struct Flow {
  Address source = 0;
  NodeId destination;
  double rate = 0.0;
  // Victim-side legitimacy estimate in percent, used only in granular mode.
  std::optional<double> legitimacy_score;
};

// Known (source, victim) pairs are dropped, verified sources are High, the
// rest is Low. In granular mode a Low flow with a score gets the 95/85/75
// level at or below its score (never above 95).
TrafficClass classify(const Flow& flow, const KnownBots& known_bots, const std::set<Address>& verified,
                      bool granular);

struct AgentState {
  NodeId defender;
  bool la = false;
  bool escalated = false;  // help already requested for the current alarm
  double threshold = 0.0;  // ||D_v||
  double capacity = 0.0;   // own defense power
  bool capable = true;
  std::vector<NodeId> peers;
  KnownBots known_bots;
};

struct Member {
  NodeId id;
  bool certificate_valid = false;
  bool egress_filtering = false;
};

struct CoordinatorState {
  bool ra = false;
  std::map<NodeId, Member> registry;
  std::map<NodeId, double> reputation;  // credit per unit of absorbed offload
  double global_defense_power = 0.0;    // ||D_ij||
  double availability = 1.0;            // pi

  // Admits only members with a valid certificate that filter egress traffic.
  bool admit(const Member& member);
  bool is_member(NodeId id) const { return registry.count(id) != 0; }
  void credit(NodeId member, double work);
  double available_power() const { return availability * global_defense_power; }
};

// Reserved endpoints for messages that do not target a graph node.
inline constexpr NodeId kCoordinator{0xFFFF'FFFFu};
inline constexpr NodeId kAllMembers{0xFFFF'FFFEu};

enum class MessageKind { LocalAlarm, RegionalAlarm, AlarmClear, HelpRequest, Update, Query, BotKnowledge };

const char* to_string(MessageKind kind);

struct Message {
  MessageKind kind = MessageKind::Update;
  NodeId sender;
  NodeId receiver;
  double attack_force = 0.0;  // LocalAlarm / HelpRequest
  std::vector<BotKey> bots;   // BotKnowledge
  double capability = 0.0;    // Update: capacity the sender can offer

  std::string payload_summary() const;
};

enum class ActionKind {
  Send,
  OffloadLowPriority,    // spread L-class traffic to local collaborators
  MitigateLocally,       // local community absorbs the attack
  KillLowPriority,       // regional alarm: shed L-class work
  OrganizeDefenseUnits,  // coordinator releases reserved capacity
  StopOffload,
};

const char* to_string(ActionKind kind);

struct Action {
  ActionKind kind = ActionKind::Send;
  std::optional<Message> message;
  double amount = 0.0;
};

struct StepResult {
  AgentState agent;
  CoordinatorState coordinator;
  std::vector<Action> actions;
};

// One evaluation of the alarm logic for the victim-side agent.
//   attack_force        measured force f(V_j) at the victim's defender
//   local_capacity      capacity the capable local peers can lend
//   alliance_available  pi * ||D_ij||
// The coordinator clears RA before the agent clears LA.
StepResult alarm_step(AgentState agent, CoordinatorState coord, double attack_force, double local_capacity,
                      double alliance_available);

// c_i = 1 iff member i is not the victim, can reach it and filters egress
// traffic. Throws std::out_of_range for an unknown member.
expense::CapabilityVector capability_vector(const topology::NetworkGraph& g, NodeId victim,
                                            const std::vector<NodeId>& members);

struct OffloadRequest {
  NodeId diverter;                   // upstream node that splits the traffic
  NodeId victim;
  double excess = 0.0;               // L-class load to spread
  std::map<NodeId, double> capacity;  // collaborator -> available capacity
  std::map<NodeId, double> pinned;    // non-divertible (H-class) load per collaborator
};

struct OffloadPlan {
  std::vector<NodeId> collaborators;  // ascending id
  std::vector<double> shares;         // L-class load per collaborator, sums to excess
  allocation::Allocation allocation;  // columns: excess first, then pinned loads
  double pi = 0.0;
};

// Eligible collaborators are the diverter's loop-free candidates that have a
// capacity entry and filter egress. Throws allocation::InfeasibleProblem when
// none is eligible.
OffloadPlan orchestrate_offload(const topology::NetworkGraph& g, const OffloadRequest& request,
                                topology::DistanceMetric metric = topology::DistanceMetric::Hops);

// Adds the victim-side discovery to every agent's known bots. Idempotent.
std::vector<AgentState> share_bot_knowledge(std::vector<AgentState> agents, const BotKey& discovery);

}  // namespace jointguard::protocol
