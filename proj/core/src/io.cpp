#include "securesense/io.hpp"

#include <fstream>
#include <sstream>

namespace securesense::io {

Json parse_document(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (const auto cut = msg.find("syntax error"); cut != std::string::npos) msg = msg.substr(cut);
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

Json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), path);
}

void write_document(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

void Reader::fail(const std::string& what) const { throw InputError(path_ + ": " + what); }

bool Reader::has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

Reader Reader::at(const std::string& key) const {
  if (!node_.is_object()) fail("expected an object");
  auto it = node_.find(key);
  if (it == node_.end()) throw InputError(path_ + "." + key + ": missing field");
  return {*it, path_ + "." + key};
}

Reader Reader::at(std::size_t index) const {
  if (!node_.is_array()) fail("expected an array");
  if (index >= node_.size()) fail("index " + std::to_string(index) + " out of range");
  return {node_[index], path_ + "[" + std::to_string(index) + "]"};
}

std::size_t Reader::size() const {
  if (!node_.is_array()) fail("expected an array");
  return node_.size();
}

double Reader::number() const {
  if (!node_.is_number()) fail("expected a number");
  return node_.get<double>();
}

int Reader::integer() const {
  if (!node_.is_number_integer()) fail("expected an integer");
  return node_.get<int>();
}

std::uint64_t Reader::unsigned_integer() const {
  if (!node_.is_number_unsigned() && !(node_.is_number_integer() && node_.get<long long>() >= 0))
    fail("expected a nonnegative integer");
  return node_.get<std::uint64_t>();
}

std::string Reader::string() const {
  if (!node_.is_string()) fail("expected a string");
  return node_.get<std::string>();
}

Matrix Reader::matrix() const {
  if (node_.is_object()) {
    const int rows = at("rows").integer();
    const int cols = at("cols").integer();
    if (rows < 0 || cols < 0) fail("negative matrix dimension");
    const Reader data = at("data");
    if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      data.fail("expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(data.size()));
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = data.at(static_cast<std::size_t>(i) * cols + j).number();
    return M;
  }
  if (node_.is_number()) return Matrix::Constant(1, 1, number());
  if (!node_.is_array()) fail("expected a matrix ({rows, cols, data} or nested rows)");
  const std::size_t rows = size();
  if (rows == 0) return Matrix(0, 0);
  const std::size_t cols = at(0).size();
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const Reader row = at(i);
    if (row.size() != cols) row.fail("ragged matrix row");
    for (std::size_t j = 0; j < cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.at(j).number();
  }
  return M;
}

Vector Reader::vector() const {
  if (node_.is_number()) return Vector::Constant(1, number());
  const std::size_t len = size();
  Vector v(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < len; ++i) v(static_cast<Eigen::Index>(i)) = at(i).number();
  return v;
}

std::vector<Matrix> Reader::matrices() const {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).matrix());
  return out;
}

Json to_json(const Matrix& M) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json model_to_json(const SystemModel& model) {
  Json j{{"A", to_json(model.A)},
         {"B", to_json(model.B)},
         {"Sigma1", to_json(model.Sigma1)},
         {"SigmaV", to_json(model.SigmaV)},
         {"horizon", model.horizon}};
  if (model.D) j["D"] = to_json(*model.D);
  if (model.SigmaW) j["SigmaW"] = to_json(*model.SigmaW);
  return j;
}

SystemModel model_from_json(const Reader& r) {
  SystemModel model;
  model.A = r.at("A").matrix();
  model.B = r.at("B").matrix();
  model.Sigma1 = r.at("Sigma1").matrix();
  model.SigmaV = r.at("SigmaV").matrix();
  model.horizon = r.at("horizon").integer();
  if (r.has("D")) model.D = r.at("D").matrix();
  if (r.has("SigmaW")) model.SigmaW = r.at("SigmaW").matrix();
  return model;
}

Json objective_to_json(const FriendlyObjective& objective) {
  return {{"QF", to_json(objective.QF)}, {"RF", to_json(objective.RF)}};
}

FriendlyObjective objective_from_json(const Reader& r) { return {r.at("QF").matrix(), r.at("RF").matrix()}; }

Json attacker_to_json(const AttackerSpec& a) {
  return {{"QA", to_json(a.QA)}, {"RA", to_json(a.RA)}, {"lambda", a.lambda}, {"z", to_json(a.z)}};
}

AttackerSpec attacker_from_json(const Reader& r) {
  return {r.at("QA").matrix(), r.at("RA").matrix(), r.at("lambda").number(), r.at("z").vector()};
}

Json design_to_json(const SensorDesign& d) {
  Json gains = Json::array(), S = Json::array(), stages = Json::array();
  for (const auto& L : d.gains) gains.push_back(to_json(L));
  for (const auto& Sk : d.S) S.push_back(to_json(Sk));
  for (const auto& p : d.projections)
    stages.push_back({{"rank", p.rank}, {"eigenvalues", to_json(p.eigenvalues)}, {"idempotency_defect", p.idempotency_defect}});
  const auto& c = d.certification;
  return {{"gains", std::move(gains)},
          {"S", std::move(S)},
          {"ranks", d.ranks},
          {"stages", std::move(stages)},
          {"warnings", d.warnings},
          {"sdp",
           {{"backend", d.sdp.backend},
            {"iterations", d.sdp.iterations},
            {"converged", d.sdp.converged},
            {"relative_gap", d.sdp.relative_gap},
            {"primal_infeasibility", d.sdp.primal_infeasibility},
            {"lower_bound", d.sdp.lower_bound}}},
          {"certification",
           {{"passed", c.passed},
            {"method", c.method},
            {"max_relative_error", c.max_relative_error},
            {"achieved_objective", c.achieved_objective},
            {"sdp_objective", c.sdp_objective},
            {"lower_bound", c.lower_bound}}}};
}

GainSequence gains_from_json(const Reader& r) { return r.at("gains").matrices(); }

}  // namespace securesense::io
