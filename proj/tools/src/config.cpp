#include "securesense/cli/config.hpp"

#include <set>

namespace securesense::cli {

namespace {

const std::set<std::string> kTopLevel{"reference", "model", "objective", "attackers", "scenarios", "evaluation", "output"};

void reject_unknown(const io::Reader& r, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : r.json().items())
    if (!allowed.contains(key)) throw InputError(r.path() + "." + key + ": unknown field");
}

int positive(const io::Reader& r) {
  const int v = r.integer();
  if (v < 1) r.fail("must be positive");
  return v;
}

ScenarioConfig parse_scenarios(const io::Reader& r) {
  reject_unknown(r, {"delta", "attackers", "measure", "design_measure", "cases"});
  ScenarioConfig sc;
  sc.delta = r.at("delta").integer();
  if (sc.delta < 2) r.at("delta").fail("slot length must be at least 2");
  if (r.has("attackers")) {
    sc.attackers = r.at("attackers").integer();
    if (*sc.attackers < 0) r.at("attackers").fail("must be nonnegative");
  }
  if (r.has("cases")) {
    const io::Reader cases = r.at("cases");
    bool all_mu = cases.size() > 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const io::Reader c = cases.at(i);
      reject_unknown(c, {"name", "theta", "mu"});
      CaseSpec spec;
      spec.name = c.has("name") ? c.at("name").string() : "case" + std::to_string(i + 1);
      const io::Reader theta = c.at("theta");
      for (std::size_t j = 0; j < theta.size(); ++j) {
        try {
          spec.theta.push_back(parse_agent(theta.at(j).string()));
        } catch (const InputError& e) {
          theta.at(j).fail(e.what());
        }
      }
      if (c.has("mu")) spec.mu = c.at("mu").number();
      all_mu = all_mu && spec.mu.has_value();
      sc.cases.push_back(std::move(spec));
    }
    if (all_mu && !r.has("measure")) {
      ExplicitMeasure e;
      for (const auto& c : sc.cases) e.weights.push_back(*c.mu);
      sc.measure = e;
    }
  }
  if (r.has("measure")) sc.measure = parse_measure(r.at("measure"));
  if (r.has("design_measure")) sc.design_measure = parse_measure(r.at("design_measure"));
  return sc;
}

EvaluationSettings parse_evaluation(const io::Reader& r) {
  reject_unknown(r, {"trials", "seed", "threads", "tol_sdp", "tol_pinv", "trace_trials"});
  EvaluationSettings e;
  if (r.has("trials")) {
    e.trials = r.at("trials").integer();
    if (e.trials < 0) r.at("trials").fail("must be nonnegative");
  }
  if (r.has("seed")) e.seed = r.at("seed").unsigned_integer();
  if (r.has("threads")) e.threads = positive(r.at("threads"));
  if (r.has("tol_sdp")) e.tol_sdp = r.at("tol_sdp").number();
  if (r.has("tol_pinv")) e.tol_pinv = r.at("tol_pinv").number();
  if (r.has("trace_trials")) {
    e.trace_trials = r.at("trace_trials").integer();
    if (e.trace_trials < 0) r.at("trace_trials").fail("must be nonnegative");
  }
  if (!(e.tol_sdp > 0.0)) r.at("tol_sdp").fail("must be positive");
  if (!(e.tol_pinv > 0.0)) r.at("tol_pinv").fail("must be positive");
  return e;
}

}  // namespace

MeasureSpec parse_measure(const io::Reader& r) {
  if (r.json().is_string()) {
    if (r.string() == "uniform") return UniformMeasure{};
    r.fail("expected \"uniform\", {\"no_infiltration\": p} or {\"weights\": [...]}");
  }
  reject_unknown(r, {"no_infiltration", "weights"});
  if (r.has("no_infiltration") == r.has("weights")) r.fail("give exactly one of no_infiltration, weights");
  if (r.has("no_infiltration")) {
    const double p = r.at("no_infiltration").number();
    if (!(p >= 0.0 && p <= 1.0)) r.at("no_infiltration").fail("must lie in [0, 1]");
    return NoInfiltrationMass{p};
  }
  const io::Reader w = r.at("weights");
  ExplicitMeasure e;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = w.at(i).number();
    if (!(v >= 0.0)) w.at(i).fail("must be nonnegative");
    e.weights.push_back(v);
  }
  return e;
}

io::Json measure_to_json(const MeasureSpec& measure) {
  if (const auto* p = std::get_if<NoInfiltrationMass>(&measure)) return {{"no_infiltration", p->p}};
  if (const auto* e = std::get_if<ExplicitMeasure>(&measure)) return {{"weights", e->weights}};
  return "uniform";
}

ExperimentConfig reference_config(std::uint64_t seed, int n, int m, int r, int delta, int attackers) {
  ReferenceSetup setup = make_reference_setup(seed, m, r, n);
  if (attackers < 0 || attackers > static_cast<int>(setup.attackers.size()))
    throw InputError("reference setup defines " + std::to_string(setup.attackers.size()) + " attackers");
  ExperimentConfig c;
  c.model = std::move(setup.model);
  c.objective = std::move(setup.objective);
  c.attackers = std::move(setup.attackers);
  c.scenarios.delta = delta;
  c.scenarios.attackers = attackers;
  c.evaluation.seed = seed;
  c.model_source = "reference";
  return c;
}

ExperimentConfig parse_config(const io::Json& doc) {
  const io::Reader root(doc, "$");
  if (!doc.is_object()) root.fail("expected an object");
  reject_unknown(root, kTopLevel);
  if (root.has("reference") == root.has("model")) root.fail("give exactly one model source: reference or model");

  ExperimentConfig c;
  if (root.has("reference")) {
    const io::Reader ref = root.at("reference");
    reject_unknown(ref, {"seed", "n", "m", "r"});
    const int m = positive(ref.at("m"));
    if (m % 4 != 0) ref.at("m").fail("reference setup needs m divisible by 4");
    const auto seed = ref.has("seed") ? ref.at("seed").unsigned_integer() : 1;
    ReferenceSetup setup = make_reference_setup(seed, m, positive(ref.at("r")), positive(ref.at("n")));
    c.model = std::move(setup.model);
    c.objective = std::move(setup.objective);
    c.attackers = std::move(setup.attackers);
    c.model_source = "reference";
    if (root.has("objective") || root.has("attackers"))
      root.fail("reference supplies the objective and attackers; remove the explicit ones");
  } else {
    const io::Reader model = root.at("model");
    if (model.has("generator")) {
      reject_unknown(model, {"generator"});
      const io::Reader g = model.at("generator");
      reject_unknown(g, {"seed", "n", "m", "r"});
      const auto seed = g.has("seed") ? g.at("seed").unsigned_integer() : 1;
      c.model = generate_random_instance(seed, positive(g.at("m")), positive(g.at("r")), positive(g.at("n"))).model;
      c.model_source = "generator";
    } else {
      reject_unknown(model, {"A", "B", "Sigma1", "SigmaV", "horizon", "D", "SigmaW"});
      c.model = io::model_from_json(model);
      c.model_source = "inline";
    }
    c.objective = io::objective_from_json(root.at("objective"));
    if (root.has("attackers")) {
      const io::Reader atk = root.at("attackers");
      for (std::size_t i = 0; i < atk.size(); ++i) {
        reject_unknown(atk.at(i), {"QA", "RA", "lambda", "z"});
        c.attackers.push_back(io::attacker_from_json(atk.at(i)));
      }
    }
  }

  c.scenarios = parse_scenarios(root.at("scenarios"));
  if (root.has("evaluation")) c.evaluation = parse_evaluation(root.at("evaluation"));
  if (root.has("output")) c.output = root.at("output").string();

  const int defined = static_cast<int>(c.attackers.size());
  if (c.scenarios.attackers && *c.scenarios.attackers > defined)
    root.at("scenarios").at("attackers").fail("only " + std::to_string(defined) + " attackers are defined");
  for (std::size_t i = 0; i < c.scenarios.cases.size(); ++i)
    for (const Agent a : c.scenarios.cases[i].theta)
      if (a.id > defined)
        root.at("scenarios").at("cases").at(i).at("theta").fail("attacker " + a.label() + " is not defined");
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(io::read_document(path)); }

io::Json config_to_json(const ExperimentConfig& c) {
  io::Json attackers = io::Json::array();
  for (const auto& a : c.attackers) attackers.push_back(io::attacker_to_json(a));
  io::Json scenarios{{"delta", c.scenarios.delta}, {"measure", measure_to_json(c.scenarios.measure)}};
  if (c.scenarios.attackers) scenarios["attackers"] = *c.scenarios.attackers;
  if (c.scenarios.design_measure) scenarios["design_measure"] = measure_to_json(*c.scenarios.design_measure);
  if (!c.scenarios.cases.empty()) {
    io::Json cases = io::Json::array();
    for (const auto& cs : c.scenarios.cases) {
      io::Json theta = io::Json::array();
      for (const Agent a : cs.theta) theta.push_back(a.label());
      io::Json j{{"name", cs.name}, {"theta", std::move(theta)}};
      if (cs.mu) j["mu"] = *cs.mu;
      cases.push_back(std::move(j));
    }
    scenarios["cases"] = std::move(cases);
  }
  const auto& e = c.evaluation;
  return {{"model", io::model_to_json(c.model)},
          {"objective", io::objective_to_json(c.objective)},
          {"attackers", std::move(attackers)},
          {"scenarios", std::move(scenarios)},
          {"evaluation",
           {{"trials", e.trials},
            {"seed", e.seed},
            {"threads", e.threads},
            {"tol_sdp", e.tol_sdp},
            {"tol_pinv", e.tol_pinv},
            {"trace_trials", e.trace_trials}}},
          {"output", c.output}};
}

ScenarioSet build_scenarios(const ExperimentConfig& c) {
  const int n = c.model.horizon;
  ScenarioSet set;
  if (c.scenarios.cases.empty()) {
    set = enumerate_typical(n, c.scenarios.delta, c.scenarios.attackers.value_or(static_cast<int>(c.attackers.size())));
  } else {
    set.n = n;
    set.delta = c.scenarios.delta;
    set.attackers = static_cast<int>(c.attackers.size());
    for (const auto& cs : c.scenarios.cases) set.scenarios.push_back(make_scenario(cs.theta, c.scenarios.delta, n, cs.name));
  }
  return assign_measures(std::move(set), c.scenarios.measure);
}

ValidationReport check_config(const ExperimentConfig& c) {
  ValidationReport rep = validate(c.model, c.objective, c.attackers);
  const int N = c.scenarios.delta >= 2 ? slot_count(c.model.horizon, c.scenarios.delta) : 0;
  for (const auto& cs : c.scenarios.cases)
    if (static_cast<int>(cs.theta.size()) != N)
      rep.issues.push_back("case " + cs.name + " has " + std::to_string(cs.theta.size()) + " labels, the slot grid has " +
                           std::to_string(N));
  return rep;
}

}  // namespace securesense::cli
