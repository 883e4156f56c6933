#include "qclassical/io.hpp"

#include <cmath>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "qclassical/schema_data.hpp"

namespace qclassical {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw InputError(path, std::string("missing '") + key + "'");
  return j.at(key);
}

std::size_t size_at(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InputError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

/// Runs `body`, turning library errors into InputError at `path`.
template <class F>
auto at_path(const std::string& path, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(path, e.what());
  }
}

bool same_preparations(const std::vector<Intervention>& a, const std::vector<Intervention>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto* ma = std::get_if<MapIntervention>(&a[i]);
    const auto* mb = std::get_if<MapIntervention>(&b[i]);
    if (!ma || !mb || ma->map.matrix() != mb->map.matrix()) return false;
  }
  return true;
}

Json preparations_to_json(const PreparationSet& set, std::size_t dim) {
  return std::visit(
      Overloaded{
          [](const SinglePreparation& s) {
            return Json{{"kind", "single"}, {"preparation", to_json(s.preparation)}};
          },
          [&](const BasisSpanningPreparations& s) {
            Json j{{"kind", "spanning"}};
            if (!same_preparations(s.preparations, spanning_preparations(dim).preparations)) {
              Json list = Json::array();
              for (const Intervention& i : s.preparations) list.push_back(to_json(i));
              j["preparations"] = std::move(list);
            }
            return j;
          },
          [](const AllDiagonalPreparations& d) {
            return Json{{"kind", "diagonal"}, {"observable", d.observable}};
          },
      },
      set);
}

PreparationSet preparations_from_json(const Json& j, std::size_t dim, const std::string& path) {
  const std::string kind = member(j, "kind", path).get<std::string>();
  if (kind == "single") {
    return SinglePreparation{intervention_from_json(member(j, "preparation", path), path + "/preparation")};
  }
  if (kind == "spanning") {
    if (!j.contains("preparations")) return spanning_preparations(dim);
    BasisSpanningPreparations set;
    const Json& list = j.at("preparations");
    for (std::size_t i = 0; i < list.size(); ++i) {
      set.preparations.push_back(
          intervention_from_json(list[i], path + "/preparations/" + std::to_string(i)));
    }
    return set;
  }
  if (kind == "diagonal") {
    return AllDiagonalPreparations{j.contains("observable") ? size_at(j.at("observable"), path + "/observable") : 0};
  }
  throw InputError(path + "/kind", "unknown preparation kind '" + kind + "'");
}

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

bool type_matches(const Json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "boolean") return doc.is_boolean();
  if (type == "integer") return doc.is_number_integer();
  if (type == "number") return doc.is_number();
  if (type == "null") return doc.is_null();
  return false;
}

void validate_node(const Json& doc, const Json& schema, const Json& root, const std::string& path,
                   std::vector<std::string>& errors) {
  const std::string here = path.empty() ? "/" : path;
  if (schema.contains("$ref")) {
    const std::string ref = schema.at("$ref").get<std::string>();
    if (ref.rfind("#", 0) != 0) {
      errors.push_back(here + ": unsupported $ref " + ref);
      return;
    }
    validate_node(doc, root.at(Json::json_pointer(ref.substr(1))), root, path, errors);
    return;
  }
  if (schema.contains("type")) {
    const Json& type = schema.at("type");
    bool ok = false;
    if (type.is_array()) {
      for (const Json& t : type) ok = ok || type_matches(doc, t.get<std::string>());
    } else {
      ok = type_matches(doc, type.get<std::string>());
    }
    if (!ok) {
      errors.push_back(here + ": expected " + type.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const Json& v : schema.at("enum")) found = found || v == doc;
    if (!found) errors.push_back(here + ": value " + doc.dump() + " not in " + schema.at("enum").dump());
  }
  if (schema.contains("minimum") && doc.is_number() &&
      doc.get<double>() < schema.at("minimum").get<double>()) {
    errors.push_back(here + ": below minimum " + schema.at("minimum").dump());
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>()) {
      errors.push_back(here + ": fewer than " + schema.at("minItems").dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema.at("maxItems").get<std::size_t>()) {
      errors.push_back(here + ": more than " + schema.at("maxItems").dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        validate_node(doc[i], schema.at("items"), root, path + "/" + std::to_string(i), errors);
      }
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const Json& key : schema.at("required")) {
        if (!doc.contains(key.get<std::string>())) {
          errors.push_back(here + ": missing required property '" + key.get<std::string>() + "'");
        }
      }
    }
    const Json empty = Json::object();
    const Json& properties = schema.contains("properties") ? schema.at("properties") : empty;
    for (const auto& [key, value] : doc.items()) {
      const std::string child = path + "/" + key;
      if (properties.contains(key)) {
        validate_node(value, properties.at(key), root, child, errors);
      } else if (schema.contains("additionalProperties")) {
        const Json& extra = schema.at("additionalProperties");
        if (extra.is_boolean()) {
          if (!extra.get<bool>()) errors.push_back(child + ": unexpected property");
        } else {
          validate_node(value, extra, root, child, errors);
        }
      }
    }
  }
}

}  // namespace

Json to_json(Complex z) { return Json::array({number(z.real()), number(z.imag())}); }

Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Superoperator& map) {
  return Json{{"dim_in", map.dim_in()},
              {"dim_out", map.dim_out()},
              {"matrix", to_json(map.matrix())},
              {"cp", map.completely_positive()},
              {"tp", map.trace_preserving()}};
}

Json to_json(const Observable& obs) {
  Json outcomes = Json::array();
  for (const ObservableOutcome& o : obs.outcomes()) {
    outcomes.push_back(Json{{"eigenvalue", o.eigenvalue}, {"projector", to_json(o.projector)}});
  }
  return Json{{"outcomes", std::move(outcomes)}};
}

Json to_json(const Intervention& intervention) {
  return std::visit(
      Overloaded{
          [](const OutcomeIntervention& o) {
            return Json{{"kind", "outcome"}, {"observable", o.observable}, {"outcome", o.outcome}};
          },
          [](const DephaseIntervention& d) {
            return Json{{"kind", "dephase"}, {"observable", d.observable}};
          },
          [](const IdentityIntervention&) { return Json{{"kind", "identity"}}; },
          [](const MapIntervention& m) { return Json{{"kind", "map"}, {"map", to_json(m.map)}}; },
      },
      intervention);
}

Json to_json(const Verdict& verdict) {
  Json j{{"check", verdict.check},
         {"holds", verdict.holds},
         {"tolerance", number(verdict.tolerance)},
         {"max_violation", number(verdict.max_violation)}};
  if (verdict.witness) {
    j["witness"] = Json{{"pattern", verdict.witness->pattern},
                        {"lhs", to_json(verdict.witness->lhs)},
                        {"rhs", to_json(verdict.witness->rhs)},
                        {"distance", number(verdict.witness->distance)}};
  }
  return j;
}

Json to_json(const Implication& implication) {
  return Json{{"implication", implication.theorem},
              {"premise", implication.premise},
              {"conclusion", implication.conclusion},
              {"violated", implication.violated}};
}

Json to_json(const FuzzClassReport& report) {
  return Json{{"class", report.name},
              {"theorem", report.theorem},
              {"instances", report.instances},
              {"premise_true", report.premise_true},
              {"violations", report.violations},
              {"violating_instances", report.violating_instances}};
}

Json model_to_json(const ModelInstance& model) {
  Json doc;
  doc["name"] = model.name;
  const std::size_t dim = system_dim(model.process);
  std::visit(Overloaded{
                 [&](const DilatedProcess& p) {
                   doc["type"] = "dilated";
                   doc["dim_s"] = p.dim_s();
                   doc["dim_e"] = p.dim_e();
                   doc["initial_state"] = to_json(p.initial_se().matrix());
                   Json us = Json::array();
                   for (const ComplexMatrix& u : p.unitaries()) us.push_back(to_json(u));
                   doc["unitaries"] = std::move(us);
                 },
                 [&](const MarkovProcess& p) {
                   doc["type"] = "markov";
                   doc["dim_s"] = p.dim_s();
                   doc["initial_state"] = to_json(p.initial_s().matrix());
                   Json maps = Json::array();
                   for (const Superoperator& m : p.maps()) maps.push_back(to_json(m));
                   doc["maps"] = std::move(maps);
                 },
                 [&](const MixedUnitaryProcess& p) {
                   doc["type"] = "mixed";
                   doc["dim_s"] = p.dim_s();
                   doc["initial_state"] = to_json(p.initial_s().matrix());
                   Json branches = Json::array();
                   for (const auto& b : p.branches()) {
                     Json us = Json::array();
                     for (const ComplexMatrix& u : b.unitaries) us.push_back(to_json(u));
                     branches.push_back(Json{{"weight", b.weight}, {"unitaries", std::move(us)}});
                   }
                   doc["branches"] = std::move(branches);
                 },
             },
             model.process);
  if (!time_grid(model.process).empty()) doc["times"] = time_grid(model.process).times();
  doc["observables"] = Json::array({to_json(model.observable)});
  doc["observable"] = 0;
  doc["preparations"] = preparations_to_json(model.preparations, dim);
  if (!model.expected.empty()) {
    Json expected = Json::object();
    for (const auto& [check, value] : model.expected) expected[check] = value;
    doc["expected"] = std::move(expected);
  }
  return doc;
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InputError(path, "expected a matrix");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "/" + std::to_string(r);
    if (!j[r].is_array() || j[r].size() != cols) throw InputError(row_path, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& z = j[r][c];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
        throw InputError(row_path + "/" + std::to_string(c), "expected [re, im]");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          Complex(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

Superoperator superoperator_from_json(const Json& j, const std::string& path) {
  const std::size_t dim_in = size_at(member(j, "dim_in", path), path + "/dim_in");
  const std::size_t dim_out = size_at(member(j, "dim_out", path), path + "/dim_out");
  ComplexMatrix m = matrix_from_json(member(j, "matrix", path), path + "/matrix");
  if (m.rows() != static_cast<Eigen::Index>(dim_out * dim_out) ||
      m.cols() != static_cast<Eigen::Index>(dim_in * dim_in)) {
    throw InputError(path + "/matrix", "shape does not match dim_in/dim_out");
  }
  return at_path(path, [&] { return Superoperator::from_matrix(dim_in, dim_out, std::move(m)); });
}

Observable observable_from_json(const Json& j, const std::string& path) {
  const Json& outcomes = member(j, "outcomes", path);
  std::vector<std::pair<double, ComplexMatrix>> list;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::string p = path + "/outcomes/" + std::to_string(i);
    list.emplace_back(member(outcomes[i], "eigenvalue", p).get<double>(),
                      matrix_from_json(member(outcomes[i], "projector", p), p + "/projector"));
  }
  return at_path(path, [&] { return Observable::from_projectors(std::move(list)); });
}

Intervention intervention_from_json(const Json& j, const std::string& path) {
  const std::string kind = member(j, "kind", path).get<std::string>();
  if (kind == "identity") return IdentityIntervention{};
  if (kind == "map") return MapIntervention{superoperator_from_json(member(j, "map", path), path + "/map")};
  if (kind == "dephase") {
    return DephaseIntervention{size_at(member(j, "observable", path), path + "/observable")};
  }
  if (kind == "outcome") {
    return OutcomeIntervention{size_at(member(j, "observable", path), path + "/observable"),
                               size_at(member(j, "outcome", path), path + "/outcome")};
  }
  throw InputError(path + "/kind", "unknown intervention kind '" + kind + "'");
}

ModelInstance model_from_json(const Json& doc) {
  const std::vector<std::string> errors = validate_schema(doc, process_schema());
  if (!errors.empty()) {
    const std::string& first = errors.front();
    const auto colon = first.find(": ");
    throw InputError(first.substr(0, colon), first.substr(colon + 2));
  }
  const std::string type = doc.at("type").get<std::string>();
  const std::size_t dim_s = doc.at("dim_s").get<std::size_t>();
  const TimeGrid times = at_path("/times", [&] {
    return doc.contains("times") ? TimeGrid(doc.at("times").get<std::vector<double>>()) : TimeGrid();
  });
  const ComplexMatrix initial = matrix_from_json(doc.at("initial_state"), "/initial_state");

  auto list_of_matrices = [&](const Json& list, const std::string& path) {
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.push_back(matrix_from_json(list[i], path + "/" + std::to_string(i)));
    }
    return out;
  };

  auto process = [&]() -> Process {
    if (type == "dilated") {
      const std::size_t dim_e = doc.contains("dim_e") ? doc.at("dim_e").get<std::size_t>() : 1;
      if (initial.rows() != static_cast<Eigen::Index>(dim_s * dim_e)) {
        throw InputError("/initial_state", "expected a joint state of dimension dim_s * dim_e");
      }
      const DensityMatrix rho = at_path("/initial_state", [&] { return DensityMatrix::from_matrix(initial); });
      std::vector<ComplexMatrix> us = list_of_matrices(member(doc, "unitaries", "/"), "/unitaries");
      return at_path("/unitaries", [&] { return DilatedProcess(dim_s, dim_e, rho, std::move(us), times); });
    }
    if (initial.rows() != static_cast<Eigen::Index>(dim_s)) {
      throw InputError("/initial_state", "expected a state of dimension dim_s");
    }
    const DensityMatrix rho = at_path("/initial_state", [&] { return DensityMatrix::from_matrix(initial); });
    if (type == "markov") {
      const Json& list = member(doc, "maps", "/");
      std::vector<Superoperator> maps;
      for (std::size_t i = 0; i < list.size(); ++i) {
        maps.push_back(superoperator_from_json(list[i], "/maps/" + std::to_string(i)));
      }
      return at_path("/maps", [&] { return MarkovProcess(rho, std::move(maps), times); });
    }
    const Json& list = member(doc, "branches", "/");
    std::vector<MixedUnitaryProcess::Branch> branches;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = "/branches/" + std::to_string(i);
      branches.push_back({list[i].at("weight").get<double>(),
                          list_of_matrices(list[i].at("unitaries"), p + "/unitaries")});
    }
    return at_path("/branches", [&] { return MixedUnitaryProcess(rho, std::move(branches), times); });
  }();

  std::vector<Observable> observables;
  const Json& list = doc.at("observables");
  for (std::size_t i = 0; i < list.size(); ++i) {
    observables.push_back(observable_from_json(list[i], "/observables/" + std::to_string(i)));
  }
  const std::size_t index = doc.contains("observable") ? doc.at("observable").get<std::size_t>() : 0;
  if (index >= observables.size()) throw InputError("/observable", "index out of range");
  if (observables[index].dim() != dim_s) {
    throw InputError("/observables/" + std::to_string(index), "dimension does not match dim_s");
  }

  PreparationSet preparations = SinglePreparation{IdentityIntervention{}};
  if (doc.contains("preparations")) {
    preparations = preparations_from_json(doc.at("preparations"), dim_s, "/preparations");
  }
  std::map<std::string, bool> expected;
  if (doc.contains("expected")) {
    for (const auto& [key, value] : doc.at("expected").items()) expected[key] = value.get<bool>();
  }
  return {doc.value("name", std::string()), std::move(process), observables[index],
          std::move(preparations), std::move(expected)};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(location(text, e.byte), "malformed JSON");
  }
}

std::vector<std::string> validate_schema(const Json& doc, const Json& schema) {
  std::vector<std::string> errors;
  validate_node(doc, schema, schema, "", errors);
  return errors;
}

const Json& process_schema() {
  static const Json schema = Json::parse(detail::kProcessSchema);
  return schema;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path target = std::filesystem::absolute(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path temp =
      target.parent_path() / ("." + target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + temp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw Error("cannot rename into " + target.string() + ": " + ec.message());
  }
}

}  // namespace qclassical
