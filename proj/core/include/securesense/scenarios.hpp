#pragma once

#include <string>
#include <variant>
#include <vector>

#include "securesense/types.hpp"

namespace securesense {

/// Who runs the controller during one slot: the friendly agent (0), attacker
/// i (i >= 1), or nobody after detection (terminated).
struct Agent {
  static constexpr int kFriendly = 0;
  static constexpr int kTerminated = -1;
  int id = kFriendly;

  [[nodiscard]] static Agent friendly() { return {kFriendly}; }
  [[nodiscard]] static Agent attacker(int i) { return {i}; }
  [[nodiscard]] static Agent terminated() { return {kTerminated}; }
  [[nodiscard]] bool is_friendly() const { return id == kFriendly; }
  [[nodiscard]] bool is_attacker() const { return id > 0; }
  [[nodiscard]] bool is_terminated() const { return id == kTerminated; }
  [[nodiscard]] std::string label() const;
  friend bool operator==(Agent, Agent) = default;
};

/// Parses "F", "T" or "A<i>".
[[nodiscard]] Agent parse_agent(const std::string& label);

/// Agent in charge on the stages [kappa, kappa_plus).
struct Segment {
  Agent agent;
  int kappa = 1;
  int kappa_plus = 1;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Transitions {
  std::vector<int> hbar;  ///< segment starts followed by the horizon end
  int nT = 0;
  int kappaT = 1;         ///< start of the last segment
  std::vector<Segment> segments;
};

/// Start of slot j (1-based) on the grid 1, delta, 2 delta, ...
[[nodiscard]] int slot_start(int j, int delta);
[[nodiscard]] int slot_count(int n, int delta);

/// Segments of a label sequence with one label per slot. A T label ends the
/// horizon at its slot start; any later label must be T as well.
[[nodiscard]] Transitions derive_transitions(const std::vector<Agent>& theta, int delta, int n);

struct JumpScenario {
  std::string name;
  std::vector<Agent> theta;
  int delta = 1;
  Transitions transitions;
  double mu = 0.0;

  [[nodiscard]] int nT() const { return transitions.nT; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return transitions.segments; }
};

[[nodiscard]] JumpScenario make_scenario(std::vector<Agent> theta, int delta, int n, std::string name = {});

struct ScenarioSet {
  int n = 0;
  int delta = 1;
  int attackers = 0;
  std::vector<JumpScenario> scenarios;

  [[nodiscard]] std::size_t size() const { return scenarios.size(); }
};

/// All-F first; then for each attacker and infiltration slot, every later
/// detection slot followed by the undetected case. 1 + t N(N+1)/2 scenarios.
[[nodiscard]] ScenarioSet enumerate_typical(int n, int delta, int t);

struct NoInfiltrationMass {
  double p = 0.7;
};
struct ExplicitMeasure {
  std::vector<double> weights;
};
struct UniformMeasure {};
using MeasureSpec = std::variant<NoInfiltrationMass, ExplicitMeasure, UniformMeasure>;

/// Normalises the measure to sum 1. "No infiltration" means the all-F scenario.
[[nodiscard]] ScenarioSet assign_measures(ScenarioSet set, const MeasureSpec& spec);

}  // namespace securesense
