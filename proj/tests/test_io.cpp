#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qclassical/cli.hpp"
#include "qclassical/io.hpp"
#include "qclassical/random.hpp"

using namespace qclassical;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qclassical");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "qclassical-io-test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string expect_input_error(const Json& doc) {
  try {
    model_from_json(doc);
  } catch (const InputError& e) {
    return e.where();
  }
  FAIL("no InputError");
  return {};
}

}  // namespace

TEST_CASE("complex matrices round trip bit for bit") {
  Rng rng(1);
  const ComplexMatrix u = haar_unitary(3, rng);
  const Json j = to_json(u);
  const ComplexMatrix back = matrix_from_json(parse_json(j.dump()), "/m");
  CHECK((back.array() == u.array()).all());
}

TEST_CASE("builtin models round trip") {
  for (const char* name : {"counterexample-1", "counterexample-2", "counterexample-3", "lorentzian-dephasing"}) {
    CAPTURE(name);
    const ModelInstance m = build_model(name);
    const std::string first = model_to_json(m).dump();
    const ModelInstance back = model_from_json(parse_json(first));
    CHECK(model_to_json(back).dump() == first);
    CHECK(back.expected == m.expected);
  }
}

TEST_CASE("random processes round trip") {
  Rng rng(2);
  ModelInstance m{"random", random_dilated_process(2, 2, 3, rng), Observable::sigma_x(),
                  SinglePreparation{MapIntervention{random_cptp(2, rng)}}, {}};
  const std::string text = model_to_json(m).dump();
  const ModelInstance back = model_from_json(parse_json(text));
  CHECK(model_to_json(back).dump() == text);
  InterventionSequence seq;
  seq.observables = {Observable::sigma_x()};
  seq.steps = {DephaseIntervention{0}, IdentityIntervention{}, OutcomeIntervention{0, 1}};
  CHECK((evaluate(m.process, seq).matrix().array() == evaluate(back.process, seq).matrix().array()).all());
}

TEST_CASE("schema violations point into the document") {
  const Json good = model_to_json(build_counterexample(1));
  Json doc = good;
  doc.erase("observables");
  CHECK(expect_input_error(doc) == "/");
  doc = good;
  doc["type"] = "quantum";
  CHECK(expect_input_error(doc) == "/type");
  doc = good;
  doc["maps"][1]["matrix"][0][0] = "x";
  CHECK(expect_input_error(doc) == "/maps/1/matrix/0/0");
  doc = good;
  doc["surprise"] = 1;
  CHECK(expect_input_error(doc) == "/surprise");
  doc = good;
  doc["dim_s"] = 0;
  CHECK(expect_input_error(doc) == "/dim_s");
}

TEST_CASE("semantic errors point into the document") {
  const Json good = model_to_json(build_counterexample(1));
  Json doc = good;
  doc["initial_state"][0][0] = Json::array({2.0, 0.0});
  CHECK(expect_input_error(doc) == "/initial_state");
  doc = good;
  doc["observable"] = 5;
  CHECK(expect_input_error(doc) == "/observable");
  doc = good;
  doc["maps"][0]["matrix"][0][0] = Json::array({7.0, 0.0});
  CHECK(expect_input_error(doc).rfind("/maps", 0) == 0);
  doc = good;
  doc["times"] = Json::array({0.0, 2.0, 1.0, 3.0});
  CHECK(expect_input_error(doc) == "/times");
}

TEST_CASE("syntax errors report line and column") {
  try {
    parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}");
    FAIL("no error");
  } catch (const InputError& e) {
    CHECK(e.where() == "line 3, column 8");
  }
}

TEST_CASE("schema validator basics") {
  const Json schema = Json::parse(R"({"type":"object","required":["n"],"properties":{"n":{"type":"integer","minimum":1}}})");
  CHECK(validate_schema(Json::parse(R"({"n":2})"), schema).empty());
  CHECK(validate_schema(Json::parse(R"({"n":0})"), schema).size() == 1);
  CHECK(validate_schema(Json::parse(R"({"n":1.5})"), schema).size() == 1);
  CHECK(validate_schema(Json::parse(R"({})"), schema).size() == 1);
  CHECK(process_schema().contains("definitions"));
}

TEST_CASE("verdict serialisation") {
  const ModelInstance m = build_counterexample(1);
  const Json j = to_json(check_classicality(m.process, m.observable, m.preparations));
  CHECK(j.at("check") == "classical");
  CHECK(j.at("holds") == false);
  CHECK(j.at("witness").contains("pattern"));
  CHECK(j.at("witness").contains("lhs"));
  CHECK(j.at("witness").at("distance").get<double>() == doctest::Approx(0.25));
  const Json holds = to_json(check_incoherence(m.process, m.observable, m.preparations));
  CHECK(!holds.contains("witness"));
  const Json inf = to_json(check_invertibility(std::get<MarkovProcess>(build_counterexample(2).process)));
  CHECK(inf.at("witness").at("distance") == "inf");
}

TEST_CASE("cli: check against shipped expectations") {
  const fs::path path = scratch_dir() / "ce1.json";
  REQUIRE(cli({"counterexample", "--which", "1", "--output", path.string()}).code == kExitOk);
  const CliResult r = cli({"check", "--input", path.string(), "--checks", "classical,incoherent"});
  CHECK(r.code == kExitOk);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<Json> verdicts;
  while (std::getline(lines, line)) verdicts.push_back(Json::parse(line));
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].at("check") == "classical");
  CHECK(verdicts[0].at("holds") == false);
  CHECK(verdicts[1].at("holds") == true);
}

TEST_CASE("cli: mismatched expectations exit 1") {
  Json doc = model_to_json(build_counterexample(1));
  doc["expected"]["classical"] = true;
  const fs::path path = write_file("mismatch.json", doc.dump());
  CHECK(cli({"check", "--input", path.string(), "--checks", "classical"}).code == kExitMismatch);
}

TEST_CASE("cli: input errors exit 2") {
  CHECK(cli({"check", "--input", write_file("broken.json", "{\"type\": ").string()}).code == kExitInputError);
  CHECK(cli({"check", "--input", (scratch_dir() / "missing.json").string()}).code == kExitInputError);
  CHECK(cli({"check", "--model", "counterexample-1", "--checks", "bogus"}).code == kExitInputError);
  CHECK(cli({"check", "--model", "counterexample-1", "--checks", "invertible"}).code == kExitOk);
  CHECK(cli({"check", "--model", "lorentzian-dephasing", "--checks", "invertible"}).code == kExitInputError);
  CHECK(cli({"check", "--model", "counterexample-1", "--tolerance", "-1"}).code == kExitInputError);
  CHECK(cli({"counterexample", "--which", "4"}).code == kExitInputError);
  CHECK(cli({"fuzz"}).code == kExitInputError);
  CHECK(cli({"frobnicate"}).code == kExitInputError);
  CHECK(cli({"dephasing-model", "--s", "-1"}).code == kExitInputError);
  Json doc = model_to_json(build_counterexample(1));
  doc["type"] = 3;
  const CliResult r = cli({"check", "--input", write_file("bad-type.json", doc.dump()).string()});
  CHECK(r.err.find("/type") != std::string::npos);
}

TEST_CASE("cli: every builtin model matches its expectations") {
  for (const char* name : {"counterexample-1", "counterexample-2", "counterexample-3", "lorentzian-dephasing"}) {
    CAPTURE(name);
    CHECK(cli({"check", "--model", name}).code == kExitOk);
    CHECK(cli({"check", "--model", name, "--checks", "pipeline"}).code == kExitOk);
  }
}

TEST_CASE("cli: reports are deterministic") {
  const CliResult a = cli({"check", "--model", "counterexample-3"});
  const CliResult b = cli({"check", "--model", "counterexample-3"});
  CHECK(a.out == b.out);
  const CliResult f1 = cli({"fuzz", "--seed", "7", "--count", "20", "--threads", "1"});
  const CliResult f2 = cli({"fuzz", "--seed", "7", "--count", "20", "--threads", "3"});
  CHECK(f1.code == kExitOk);
  CHECK(f1.out == f2.out);
}

TEST_CASE("cli: dephasing trajectory CSV") {
  const fs::path path = scratch_dir() / "fig.csv";
  REQUIRE(cli({"dephasing-model", "--gamma", "1", "--s", "1", "--x0", "1", "--t-max", "5", "--dt", "0.01",
               "--output", path.string()})
              .code == kExitOk);
  std::istringstream csv(read_file(path));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,x_exact,x_ncgd");
  std::size_t rows = 0;
  bool found = false;
  while (std::getline(csv, line)) {
    ++rows;
    double t = 0, x = 0, xt = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &xt) == 3);
    if (std::abs(t - 3.0) < 1e-9) {
      found = true;
      CHECK(std::abs(x - 0.5 * (std::exp(-1.0) + std::exp(-3.0))) < 1e-12);
      CHECK(std::abs(xt - std::exp(-3.0)) < 1e-12);
    }
  }
  CHECK(rows == 501);
  CHECK(found);
}

TEST_CASE("atomic writes replace the target") {
  const fs::path path = scratch_dir() / "atomic.txt";
  write_atomic(path, "first");
  write_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& entry : fs::directory_iterator(scratch_dir())) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}
