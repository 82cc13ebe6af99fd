#include "securesense/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace securesense {

std::string Agent::label() const {
  if (is_friendly()) return "F";
  if (is_terminated()) return "T";
  return "A" + std::to_string(id);
}

Agent parse_agent(const std::string& label) {
  if (label == "F") return Agent::friendly();
  if (label == "T") return Agent::terminated();
  if (label.size() >= 2 && label[0] == 'A') {
    int i = 0;
    const auto* end = label.data() + label.size();
    auto [ptr, ec] = std::from_chars(label.data() + 1, end, i);
    if (ec == std::errc() && ptr == end && i >= 1) return Agent::attacker(i);
  }
  throw InputError("unknown agent label '" + label + "' (expected F, T or A<i>)");
}

int slot_start(int j, int delta) { return std::max(1, (j - 1) * delta); }

int slot_count(int n, int delta) {
  if (delta < 2) throw InputError("transition interval delta must be at least 2");
  if (n < 1) throw InputError("horizon must be positive");
  return (n + delta - 1) / delta;
}

Transitions derive_transitions(const std::vector<Agent>& theta, int delta, int n) {
  const int N = slot_count(n, delta);
  if (static_cast<int>(theta.size()) != N)
    throw InputError("scenario needs " + std::to_string(N) + " labels, got " + std::to_string(theta.size()));
  if (theta.front().is_terminated()) throw InputError("scenario cannot start terminated");

  Transitions tr;
  int end = n + 1;
  for (int j = 1; j <= N; ++j) {
    const Agent a = theta[j - 1];
    if (a.is_terminated()) {
      end = slot_start(j, delta);
      for (int l = j; l < N; ++l)
        if (!theta[l].is_terminated()) throw InputError("malformed scenario: label after termination");
      break;
    }
    if (tr.segments.empty() || tr.segments.back().agent != a) {
      if (!tr.segments.empty()) tr.segments.back().kappa_plus = slot_start(j, delta);
      tr.segments.push_back({a, slot_start(j, delta), 0});
    }
  }
  tr.segments.back().kappa_plus = end;
  tr.nT = end - 1;
  tr.kappaT = tr.segments.back().kappa;
  for (const auto& s : tr.segments) tr.hbar.push_back(s.kappa);
  tr.hbar.push_back(end);
  return tr;
}

JumpScenario make_scenario(std::vector<Agent> theta, int delta, int n, std::string name) {
  JumpScenario s;
  s.transitions = derive_transitions(theta, delta, n);
  s.theta = std::move(theta);
  s.delta = delta;
  if (name.empty()) {
    for (const auto& a : s.theta) name += a.label();
  }
  s.name = std::move(name);
  return s;
}

ScenarioSet enumerate_typical(int n, int delta, int t) {
  if (t < 0) throw InputError("number of attackers must be nonnegative");
  const int N = slot_count(n, delta);
  ScenarioSet set{n, delta, t, {}};
  set.scenarios.push_back(make_scenario(std::vector<Agent>(N, Agent::friendly()), delta, n));
  for (int i = 1; i <= t; ++i) {
    for (int a = 1; a <= N; ++a) {
      auto build = [&](int detect) {
        std::vector<Agent> theta(N, Agent::friendly());
        for (int j = a; j <= N; ++j) theta[j - 1] = (detect > 0 && j >= detect) ? Agent::terminated() : Agent::attacker(i);
        set.scenarios.push_back(make_scenario(std::move(theta), delta, n));
      };
      for (int d = a + 1; d <= N; ++d) build(d);
      build(0);
    }
  }
  for (std::size_t c = 0; c < set.scenarios.size(); ++c) set.scenarios[c].name = "case" + std::to_string(c + 1);
  return set;
}

ScenarioSet assign_measures(ScenarioSet set, const MeasureSpec& spec) {
  const std::size_t count = set.scenarios.size();
  if (count == 0) throw InputError("assign_measures: empty scenario set");
  std::vector<double> w(count, 0.0);

  if (const auto* p = std::get_if<NoInfiltrationMass>(&spec)) {
    if (!(p->p >= 0.0 && p->p <= 1.0)) throw InputError("no-infiltration mass must lie in [0, 1]");
    auto is_quiet = [](const JumpScenario& s) {
      return std::all_of(s.theta.begin(), s.theta.end(), [](Agent a) { return a.is_friendly(); });
    };
    const auto quiet = static_cast<std::size_t>(std::count_if(set.scenarios.begin(), set.scenarios.end(), is_quiet));
    const std::size_t rest = count - quiet;
    for (std::size_t c = 0; c < count; ++c) {
      if (is_quiet(set.scenarios[c])) w[c] = rest ? p->p / static_cast<double>(quiet) : 1.0;
      else w[c] = quiet ? (1.0 - p->p) / static_cast<double>(rest) : 1.0;
    }
  } else if (const auto* e = std::get_if<ExplicitMeasure>(&spec)) {
    if (e->weights.size() != count)
      throw InputError("explicit measure has " + std::to_string(e->weights.size()) + " entries for " +
                       std::to_string(count) + " scenarios");
    for (std::size_t c = 0; c < count; ++c) {
      if (!(e->weights[c] >= 0.0)) throw InputError("measure entries must be nonnegative");
      w[c] = e->weights[c];
    }
  } else {
    std::fill(w.begin(), w.end(), 1.0);
  }

  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw InputError("measure is identically zero");
  for (std::size_t c = 0; c < count; ++c) set.scenarios[c].mu = w[c] / total;
  return set;
}

}  // namespace securesense
