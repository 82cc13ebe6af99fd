#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "securesense/design.hpp"
#include "securesense/model.hpp"
#include "securesense/types.hpp"

namespace securesense::io {

using Json = nlohmann::json;

/// Parses JSON text; syntax errors become InputError with "source:line:column".
[[nodiscard]] Json parse_document(const std::string& text, const std::string& source);
[[nodiscard]] Json read_document(const std::string& path);
void write_document(const std::string& path, const Json& doc);

/// Typed access to a JSON object; every error names the dotted field path.
class Reader {
 public:
  Reader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {}

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] Reader at(const std::string& key) const;
  [[nodiscard]] Reader at(std::size_t index) const;
  [[nodiscard]] std::size_t size() const;

  [[nodiscard]] double number() const;
  [[nodiscard]] int integer() const;
  [[nodiscard]] std::uint64_t unsigned_integer() const;
  [[nodiscard]] std::string string() const;
  [[nodiscard]] Matrix matrix() const;
  [[nodiscard]] Vector vector() const;
  [[nodiscard]] std::vector<Matrix> matrices() const;

  [[nodiscard]] const Json& json() const { return node_; }
  [[nodiscard]] const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  const Json& node_;
  std::string path_;
};

/// {"rows": r, "cols": c, "data": [row-major]}; doubles print round-trip exact.
[[nodiscard]] Json to_json(const Matrix& M);
[[nodiscard]] Json to_json(const Vector& v);

[[nodiscard]] Json model_to_json(const SystemModel& model);
[[nodiscard]] SystemModel model_from_json(const Reader& r);
[[nodiscard]] Json objective_to_json(const FriendlyObjective& objective);
[[nodiscard]] FriendlyObjective objective_from_json(const Reader& r);
[[nodiscard]] Json attacker_to_json(const AttackerSpec& attacker);
[[nodiscard]] AttackerSpec attacker_from_json(const Reader& r);

[[nodiscard]] Json design_to_json(const SensorDesign& design);
/// Gains only; enough to evaluate a stored design.
[[nodiscard]] GainSequence gains_from_json(const Reader& r);

}  // namespace securesense::io
