#pragma once

// JSON documents for processes, models and verdicts, a small JSON-schema
// validator and atomic file output.
//
// Complex numbers are [re, im]; matrices are row-major nested arrays.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qclassical/channels.hpp"
#include "qclassical/checkers.hpp"
#include "qclassical/errors.hpp"
#include "qclassical/fuzz.hpp"
#include "qclassical/models.hpp"
#include "qclassical/process.hpp"

namespace qclassical {

using Json = nlohmann::json;

/// Malformed or inconsistent input; `where` is "line L, column C" for syntax
/// errors and a JSON pointer into the document otherwise.
class InputError : public Error {
 public:
  InputError(std::string where, const std::string& message)
      : Error(where + ": " + message), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

Json to_json(Complex z);
Json to_json(const ComplexMatrix& m);
Json to_json(const Superoperator& map);
Json to_json(const Observable& obs);
Json to_json(const Intervention& intervention);
Json to_json(const Verdict& verdict);
Json to_json(const Implication& implication);
Json to_json(const FuzzClassReport& report);

/// Process document with `observables`, `observable`, `preparations` and
/// `expected` entries.
Json model_to_json(const ModelInstance& model);

ComplexMatrix matrix_from_json(const Json& j, const std::string& path);
Superoperator superoperator_from_json(const Json& j, const std::string& path);
Observable observable_from_json(const Json& j, const std::string& path);
Intervention intervention_from_json(const Json& j, const std::string& path);

/// Validates against the shipped schema, then builds the model. Every
/// failure becomes an InputError pointing into the document.
ModelInstance model_from_json(const Json& doc);

/// Parses text; syntax errors become InputError with line and column.
Json parse_json(const std::string& text);

/// Returns one "path: message" entry per violation (empty when valid).
/// Supports type, properties, required, additionalProperties, items, enum,
/// minimum, minItems, maxItems and local $ref.
std::vector<std::string> validate_schema(const Json& doc, const Json& schema);

/// The process schema shipped in schema/process.schema.json.
const Json& process_schema();

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace qclassical
