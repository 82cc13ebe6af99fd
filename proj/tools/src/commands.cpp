#include "securesense/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "securesense/design.hpp"
#include "securesense/io.hpp"

#ifndef SECURESENSE_VERSION
#define SECURESENSE_VERSION "unknown"
#endif

namespace securesense::cli {

namespace fs = std::filesystem;

namespace {

std::string full(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string short_num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << text;
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

io::Json manifest(const std::string& command, const ExperimentConfig& c, const std::vector<std::string>& files) {
  const auto& e = c.evaluation;
  const DesignOptions d = design_options(c);
  return {{"command", command},
          {"seed", e.seed},
          {"versions",
           {{"securesense", SECURESENSE_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)}}},
          {"model_source", c.model_source},
          {"dims", {{"n", c.model.horizon}, {"m", c.model.state_dim()}, {"r", c.model.input_dim()}}},
          {"tolerances",
           {{"sdp", d.sdp.tolerance},
            {"tie_break", d.sdp.tie_break},
            {"pinv", e.tol_pinv},
            {"certification", d.certification_tolerance}}},
          {"trials", e.trials},
          {"threads", e.threads},
          {"files", files}};
}

PreparedProblem prepare(const ExperimentConfig& c) {
  return prepare_problem(c.model, c.objective, c.attackers, build_scenarios(c));
}

SensorDesign design_under(const PreparedProblem& problem, const std::optional<MeasureSpec>& belief,
                          const DesignOptions& options) {
  if (!belief) return secure_sensor_design(problem, options);
  return secure_sensor_design(problem.with_measure(*belief), options);
}

std::string rank_summary(const std::vector<int>& ranks) {
  // Run-length form: "1, 2 x98, 0".
  std::ostringstream os;
  for (std::size_t i = 0; i < ranks.size();) {
    std::size_t j = i;
    while (j < ranks.size() && ranks[j] == ranks[i]) ++j;
    if (i) os << ", ";
    os << ranks[i];
    if (j - i > 1) os << " x" << (j - i);
    i = j;
  }
  return os.str();
}

void report_design(std::ostream& out, const SensorDesign& d) {
  out << "sdp: " << d.sdp.backend << ", " << d.sdp.iterations << " iterations, relative gap " << short_num(d.sdp.relative_gap)
      << (d.sdp.converged ? "" : " (stopped before tolerance)") << '\n';
  out << "stage ranks (k = 1..n): " << rank_summary(d.ranks) << '\n';
  const auto& c = d.certification;
  out << "certification (" << c.method << "): max ||H_k - S_k|| / ||Sigma_k|| = " << short_num(c.max_relative_error)
      << (c.passed ? "  ok" : "  FAILED") << '\n';
  for (const auto& w : d.warnings) out << "warning: " << w << '\n';
}

void write_traces(const fs::path& dir, const std::string& tag, const GainSequence& gains, const PreparedProblem& p,
                  const ExperimentConfig& c, std::vector<std::string>& files) {
  const int traces = c.evaluation.trace_trials;
  if (traces <= 0) return;
  for (std::size_t s = 0; s < p.set.scenarios.size(); ++s) {
    const JumpScenario& sc = p.set.scenarios[s];
    SimulationOptions so;
    so.trials = traces;
    so.seed = c.evaluation.seed;
    so.threads = 1;
    so.pinv_tolerance = c.evaluation.tol_pinv;
    so.trace_trials = traces;
    const SimulationResult sim = simulate_closed_loop(gains, sc, p.operators[s], p.bank, p.ladder, so);
    std::ostringstream os;
    os << "trial,k,agent,x,s,u,y\n";
    auto vec = [&](const Vector& v) {
      std::string txt;
      for (Eigen::Index i = 0; i < v.size(); ++i) txt += (i ? " " : "") + full(v(i));
      return txt;
    };
    for (const auto& row : sim.trace)
      os << row.trial << ',' << row.k << ',' << row.agent.label() << ',' << vec(row.x) << ',' << vec(row.s) << ','
         << vec(row.u) << ',' << vec(row.y) << '\n';
    const std::string name = "trace_" + safe_name(tag) + "_" + safe_name(sc.name) + ".csv";
    write_text(dir / name, os.str());
    files.push_back(name);
  }
}

std::vector<NamedDesign> with_baselines(std::vector<NamedDesign> designs, const SystemModel& model) {
  designs.push_back({"classical", baseline_design(BaselineKind::Classical, model)});
  designs.push_back({"no-sensor", baseline_design(BaselineKind::NoSensor, model)});
  return designs;
}

void write_outputs(const fs::path& dir, const std::vector<EvaluationReport>& reports, std::vector<std::string>& files) {
  std::ostringstream csv, table;
  write_comparison_csv(csv, reports);
  print_comparison(table, reports);
  write_text(dir / "comparison.csv", csv.str());
  write_text(dir / "summary.txt", table.str());
  files.push_back("comparison.csv");
  files.push_back("summary.txt");
}

int cmd_generate(std::uint64_t seed, int n, int m, int r, int delta, const std::optional<std::string>& out_path,
                 std::ostream& out) {
  ExperimentConfig c = reference_config(seed, n, m, r, delta, 2);
  const std::string text = config_to_json(c).dump(2) + "\n";
  if (out_path) {
    const fs::path p(*out_path);
    if (p.has_parent_path()) ensure_dir(p.parent_path());
    write_text(p, text);
    out << "wrote " << p.string() << '\n';
  } else {
    out << text;
  }
  return kOk;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = load_config(path);
  const ValidationReport rep = check_config(c);
  if (!rep.ok()) {
    for (const auto& issue : rep.issues) err << path << ": " << issue << '\n';
    return kInputError;
  }
  const ScenarioSet set = build_scenarios(c);
  out << path << ": ok (n = " << c.model.horizon << ", m = " << c.model.state_dim() << ", r = " << c.model.input_dim()
      << ", " << c.attackers.size() << " attackers, " << set.size() << " scenarios)\n";
  return kOk;
}

ExperimentConfig load_checked(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  apply(o, c);
  const ValidationReport rep = check_config(c);
  if (!rep.ok()) {
    std::string msg = path + ": invalid model";
    for (const auto& issue : rep.issues) msg += "\n  " + issue;
    throw InputError(msg);
  }
  return c;
}

int cmd_design(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = load_checked(path, o);
  const fs::path dir(c.output);
  ensure_dir(dir);
  const PreparedProblem p = prepare(c);
  std::vector<std::string> files;
  try {
    const SensorDesign d = design_under(p, c.scenarios.design_measure, design_options(c));
    report_design(out, d);
    io::write_document((dir / "design.json").string(), io::design_to_json(d));
    files.push_back("design.json");
  } catch (const CertificationError& e) {
    err << "design: " << e.what() << '\n';
    io::write_document((dir / "manifest.json").string(), manifest("design", c, files));
    return kFailure;
  }
  io::write_document((dir / "manifest.json").string(), manifest("design", c, files));
  out << "wrote " << (dir / "design.json").string() << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& path, const std::vector<std::string>& design_paths, const Overrides& o,
                 std::ostream& out) {
  const ExperimentConfig c = load_checked(path, o);
  std::vector<NamedDesign> designs;
  for (const auto& dp : design_paths) {
    const io::Json doc = io::read_document(dp);
    const std::string tag = design_paths.size() == 1 ? "secure" : fs::path(dp).stem().string();
    designs.push_back({tag, io::gains_from_json(io::Reader(doc, dp))});
  }
  const PreparedProblem p = prepare(c);
  designs = with_baselines(std::move(designs), c.model);
  const std::vector<EvaluationReport> reports = compare(designs, p, evaluation_config(c));

  const fs::path dir(c.output);
  ensure_dir(dir);
  std::vector<std::string> files;
  write_outputs(dir, reports, files);
  for (const auto& d : designs) write_traces(dir, d.tag, d.gains, p, c, files);
  io::write_document((dir / "manifest.json").string(), manifest("evaluate", c, files));
  print_comparison(out, reports);
  return kOk;
}

ExplicitMeasure perceived_measure(const ScenarioSet& set) {
  // Case 1 keeps 0.85; attacker 1 cases share the rest; attacker 2 is believed absent.
  ExplicitMeasure e;
  std::size_t first = 0;
  for (const auto& s : set.scenarios) {
    const bool a1 = std::any_of(s.theta.begin(), s.theta.end(), [](Agent a) { return a.id == 1; });
    first += a1;
  }
  for (std::size_t i = 0; i < set.scenarios.size(); ++i) {
    const auto& th = set.scenarios[i].theta;
    if (i == 0) e.weights.push_back(0.85);
    else if (std::any_of(th.begin(), th.end(), [](Agent a) { return a.id == 1; }))
      e.weights.push_back(0.15 / static_cast<double>(first));
    else e.weights.push_back(0.0);
  }
  return e;
}

void print_checks(std::ostream& out, std::ostream& err, const std::vector<Check>& checks) {
  for (const auto& ch : checks) {
    out << (ch.passed ? "PASS " : "FAIL ") << ch.name << '\n';
    if (!ch.passed) err << "  expected: " << ch.expected << "\n  actual:   " << ch.actual << '\n';
  }
}

io::Json checks_json(const std::vector<Check>& checks) {
  io::Json a = io::Json::array();
  for (const auto& ch : checks)
    a.push_back({{"name", ch.name}, {"passed", ch.passed}, {"expected", ch.expected}, {"actual", ch.actual}});
  return a;
}

struct ReproduceArgs {
  std::string which;
  int n = 100, m = 8, r = 2, delta = 35, attackers = 2;
};

int cmd_reproduce(const ReproduceArgs& a, const Overrides& o, std::ostream& out, std::ostream& err) {
  if (a.which != "scenario1" && a.which != "scenario2") throw InputError("reproduce: expected scenario1 or scenario2");
  ExperimentConfig c = reference_config(o.seed.value_or(1), a.n, a.m, a.r, a.delta, a.attackers);
  c.scenarios.measure = NoInfiltrationMass{0.7};
  c.output = "reproduce_" + a.which;
  apply(o, c);
  const fs::path dir(c.output);
  ensure_dir(dir);

  const PreparedProblem p = prepare(c);
  out << a.which << ": n = " << a.n << ", m = " << a.m << ", r = " << a.r << ", delta = " << a.delta << ", "
      << p.set.size() << " scenarios, seed " << c.evaluation.seed << '\n';
  const DesignOptions opts = design_options(c);
  std::vector<std::string> files;
  std::vector<NamedDesign> designs;
  SensorDesign secure;
  try {
    secure = secure_sensor_design(p, opts);
  } catch (const CertificationError& e) {
    err << "design: " << e.what() << '\n';
    return kFailure;
  }
  report_design(out, secure);
  io::write_document((dir / "design.json").string(), io::design_to_json(secure));
  files.push_back("design.json");
  designs.push_back({"secure", secure.gains});

  std::vector<Check> checks;
  if (a.which == "scenario2") {
    const ExplicitMeasure belief = perceived_measure(p.set);
    SensorDesign mis;
    try {
      mis = secure_sensor_design(p.with_measure(belief), opts);
    } catch (const CertificationError& e) {
      err << "design under perceived measure: " << e.what() << '\n';
      return kFailure;
    }
    io::write_document((dir / "design_perceived.json").string(), io::design_to_json(mis));
    files.push_back("design_perceived.json");
    designs.push_back({"secure-perceived", mis.gains});
  }
  designs = with_baselines(std::move(designs), c.model);
  const std::vector<EvaluationReport> reports = compare(designs, p, evaluation_config(c));
  print_comparison(out, reports);
  write_outputs(dir, reports, files);

  auto find = [&](const std::string& tag) -> const EvaluationReport& {
    return *std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.tag == tag; });
  };
  const auto& sec = find("secure");
  const auto& cls = find("classical");
  const auto& none = find("no-sensor");
  if (a.which == "scenario1") {
    checks = scenario1_checks(sec, cls, none);
  } else {
    const auto& mis = find("secure-perceived");
    checks.push_back({"mismatched design costs at least the matched one",
                      mis.average_analytic >= sec.average_analytic - 1e-6,
                      "perceived-measure average >= " + short_num(sec.average_analytic) + " - 1e-6",
                      short_num(mis.average_analytic)});
    checks.push_back({"mismatched design still beats classical", mis.average_analytic <= cls.average_analytic,
                      "perceived-measure average <= classical average " + short_num(cls.average_analytic),
                      short_num(mis.average_analytic)});
  }
  print_checks(out, err, checks);
  io::write_document((dir / "checks.json").string(), checks_json(checks));
  files.push_back("checks.json");
  io::write_document((dir / "manifest.json").string(), manifest("reproduce " + a.which, c, files));
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& ch) { return ch.passed; });
  return ok ? kOk : kFailure;
}

void add_overrides(CLI::App* sub, Overrides& o, bool with_trials = true) {
  sub->add_option("--seed", o.seed, "Random seed");
  if (with_trials) sub->add_option("--trials", o.trials, "Monte Carlo trials per scenario (0 skips simulation)");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--tol-sdp", o.tol_sdp, "SDP relative gap tolerance");
  sub->add_option("--tol-pinv", o.tol_pinv, "Relative pseudo-inverse cutoff");
  sub->add_option("--threads", o.threads, "Simulation threads")->check(CLI::PositiveNumber);
}

}  // namespace

void apply(const Overrides& o, ExperimentConfig& c) {
  auto& e = c.evaluation;
  if (o.seed) e.seed = *o.seed;
  if (o.trials) {
    if (*o.trials < 0) throw InputError("--trials must be nonnegative");
    e.trials = *o.trials;
  }
  if (o.out) c.output = *o.out;
  if (o.tol_sdp) {
    if (!(*o.tol_sdp > 0.0)) throw InputError("--tol-sdp must be positive");
    e.tol_sdp = *o.tol_sdp;
  }
  if (o.tol_pinv) {
    if (!(*o.tol_pinv > 0.0)) throw InputError("--tol-pinv must be positive");
    e.tol_pinv = *o.tol_pinv;
  }
  if (o.threads) e.threads = *o.threads;
}

DesignOptions design_options(const ExperimentConfig& c) {
  DesignOptions d;
  d.sdp.tolerance = c.evaluation.tol_sdp;
  d.extraction.pinv_tolerance = c.evaluation.tol_pinv;
  return d;
}

EvaluationConfig evaluation_config(const ExperimentConfig& c) {
  EvaluationConfig e;
  e.trials = c.evaluation.trials;
  e.seed = c.evaluation.seed;
  e.threads = c.evaluation.threads;
  e.pinv_tolerance = c.evaluation.tol_pinv;
  return e;
}

std::vector<Check> scenario1_checks(const EvaluationReport& secure, const EvaluationReport& classical,
                                    const EvaluationReport& none) {
  std::vector<Check> out;
  const double s = secure.average_analytic, c = classical.average_analytic, z = none.average_analytic;
  out.push_back({"secure average below classical average", s < c, "secure < classical",
                 short_num(s) + " vs " + short_num(c)});
  out.push_back({"no-sensor average at least 10x both", z >= 10.0 * std::max(s, c),
                 "no-sensor >= 10 x max(secure, classical) = " + short_num(10.0 * std::max(s, c)), short_num(z)});
  std::string losses;
  for (std::size_t i = 1; i < secure.rows.size(); ++i)
    if (!(secure.rows[i].analytic < classical.rows[i].analytic))
      losses += secure.rows[i].scenario + " (" + short_num(secure.rows[i].analytic) + " vs " +
                short_num(classical.rows[i].analytic) + ") ";
  out.push_back({"secure beats classical on every attacked case", losses.empty(),
                 "secure < classical on every case after the first", losses.empty() ? "all lower" : losses});
  const double s1 = secure.rows.front().analytic, c1 = classical.rows.front().analytic;
  out.push_back({"classical beats or ties secure without infiltration", c1 <= s1 + 1e-9,
                 "classical <= secure on " + secure.rows.front().scenario, short_num(c1) + " vs " + short_num(s1)});
  return out;
}

void write_comparison_csv(std::ostream& os, const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) return;
  os << "case,mu,nT";
  for (const auto& r : reports) {
    os << ',' << r.tag << "_analytic";
    if (r.has_empirical) os << ',' << r.tag << "_empirical," << r.tag << "_stderr";
  }
  os << '\n';
  const auto& rows = reports.front().rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << rows[i].scenario << ',' << full(rows[i].mu) << ',' << rows[i].nT;
    for (const auto& r : reports) {
      os << ',' << full(r.rows[i].analytic);
      if (r.has_empirical) os << ',' << full(r.rows[i].empirical) << ',' << full(r.rows[i].std_error);
    }
    os << '\n';
  }
  os << "average,1,";
  for (const auto& r : reports) {
    os << ',' << full(r.average_analytic);
    if (r.has_empirical) os << ',' << full(r.average_empirical) << ',';
  }
  os << '\n';
}

void print_comparison(std::ostream& os, const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) return;
  int w = 12;
  for (const auto& r : reports) w = std::max(w, static_cast<int>(r.tag.size()) + 2);
  // Rounding to one decimal; drop the sign of values that round to zero.
  auto shown = [](double v) { return std::abs(v) < 0.05 ? 0.0 : v; };
  os << std::left << std::setw(10) << "Case" << std::right << std::setw(10) << "Measure";
  for (const auto& r : reports) os << std::setw(w) << r.tag;
  os << '\n' << std::fixed;
  const auto& rows = reports.front().rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << std::left << std::setw(10) << rows[i].scenario << std::right << std::setw(10) << std::setprecision(3)
       << rows[i].mu << std::setprecision(1);
    for (const auto& r : reports) os << std::setw(w) << shown(r.rows[i].analytic);
    os << '\n';
  }
  os << std::left << std::setw(10) << "Average" << std::right << std::setw(10) << "" << std::setprecision(1);
  for (const auto& r : reports) os << std::setw(w) << shown(r.average_analytic);
  os << '\n' << std::defaultfloat;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secure sensor design for controlled Gauss-Markov processes", "securesense"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SECURESENSE_VERSION);

  Overrides o;
  std::string config;
  std::vector<std::string> design_paths;
  ReproduceArgs rep;
  std::uint64_t gen_seed = 1;
  int gen_n = 100, gen_m = 8, gen_r = 2, gen_delta = 35;

  auto* generate = app.add_subcommand("generate", "Write a benchmark instance as an inline config");
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--n", gen_n, "Horizon")->check(CLI::PositiveNumber);
  generate->add_option("--m", gen_m, "State dimension (multiple of 4)")->check(CLI::PositiveNumber);
  generate->add_option("--r", gen_r, "Input dimension")->check(CLI::PositiveNumber);
  generate->add_option("--delta", gen_delta, "Slot length")->check(CLI::Range(2, 1 << 30));
  generate->add_option("--out", o.out, "Config file to write (stdout if omitted)");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a config");
  validate_cmd->add_option("--config", config, "Config file")->required();

  auto* design = app.add_subcommand("design", "Solve for the secure sensor and certify it");
  design->add_option("--config", config, "Config file")->required();
  add_overrides(design, o, false);

  auto* evaluate = app.add_subcommand("evaluate", "Compare designs with the classical and no-sensor baselines");
  evaluate->add_option("--config", config, "Config file")->required();
  evaluate->add_option("--design", design_paths, "Design file(s) written by the design command")->required();
  add_overrides(evaluate, o);

  auto* reproduce = app.add_subcommand("reproduce", "Run a benchmark scenario and check its orderings");
  reproduce->add_option("scenario", rep.which, "scenario1 or scenario2")
      ->required()
      ->check(CLI::IsMember({"scenario1", "scenario2"}));
  reproduce->add_option("--n", rep.n, "Horizon")->check(CLI::PositiveNumber);
  reproduce->add_option("--m", rep.m, "State dimension (multiple of 4)")->check(CLI::PositiveNumber);
  reproduce->add_option("--r", rep.r, "Input dimension")->check(CLI::PositiveNumber);
  reproduce->add_option("--delta", rep.delta, "Slot length")->check(CLI::Range(2, 1 << 30));
  reproduce->add_option("--attackers", rep.attackers, "Attackers that may infiltrate (0 to 2)")->check(CLI::Range(0, 2));
  add_overrides(reproduce, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*generate) return cmd_generate(gen_seed, gen_n, gen_m, gen_r, gen_delta, o.out, out);
    if (*validate_cmd) return cmd_validate(config, out, err);
    if (*design) return cmd_design(config, o, out, err);
    if (*evaluate) return cmd_evaluate(config, design_paths, o, out);
    if (*reproduce) return cmd_reproduce(rep, o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InstanceGenerationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return kFailure;
  }
  return kInputError;
}

}  // namespace securesense::cli
