#include "qclassical/cli.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qclassical/checkers.hpp"
#include "qclassical/fuzz.hpp"
#include "qclassical/io.hpp"
#include "qclassical/models.hpp"

namespace qclassical {

namespace {

constexpr std::array<const char*, 7> kCheckNames{
    "classical", "incoherent", "ncgd", "invertible", "markov", "projector_identity", "pipeline"};

bool known_check(const std::string& name) {
  return std::find(kCheckNames.begin(), kCheckNames.end(), name) != kCheckNames.end();
}

void emit(const RunConfig& config, const std::string& content, std::ostream& out) {
  if (config.output_path.empty() || config.output_path == "-") {
    out << content;
  } else {
    write_atomic(config.output_path, content);
  }
}

ModelInstance load_model(const RunConfig& config) {
  if (config.model) {
    try {
      return build_model(*config.model);
    } catch (const IndexError& e) {
      throw InputError("--model", e.what());
    }
  }
  if (!config.input_path) throw InputError("--input", "an input file or --model is required");
  std::ifstream in(*config.input_path, std::ios::binary);
  if (!in) throw InputError(*config.input_path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(parse_json(buffer.str()));
}

const MarkovProcess& require_markov(const ModelInstance& model, const std::string& check) {
  const auto* markov = std::get_if<MarkovProcess>(&model.process);
  if (!markov) throw InputError("/type", "check '" + check + "' requires a markov process");
  return *markov;
}

Verdict projector_identity_verdict(const MarkovProcess& process, const Observable& obs, double tol) {
  Verdict total{"projector_identity", true, tol, 0.0, {}};
  for (std::size_t k = 0; k < process.steps(); ++k) {
    Verdict v = check_projector_identity(process.maps()[k], obs, obs, tol);
    total.max_violation = std::max(total.max_violation, v.max_violation);
    if (!v.holds && total.holds) {
      total.holds = false;
      total.witness = v.witness;
      total.witness->pattern = "map=" + std::to_string(k + 1) + " " + total.witness->pattern;
    }
  }
  return total;
}

int run_check(const RunConfig& config, std::ostream& out) {
  const ModelInstance model = load_model(config);
  std::vector<std::string> checks = config.checks;
  if (checks.empty()) {
    for (const char* name : kCheckNames) {
      if (model.expected.count(name)) checks.emplace_back(name);
    }
    if (checks.empty()) checks = {"classical", "incoherent"};
  }
  for (const std::string& c : checks) {
    if (!known_check(c)) throw InputError("--checks", "unknown check '" + c + "'");
  }

  const double tol = config.tolerance;
  std::ostringstream report;
  bool mismatch = false;
  auto write = [&](const Verdict& v) {
    Json line = to_json(v);
    if (auto it = model.expected.find(v.check); it != model.expected.end()) {
      line["expected"] = it->second;
      mismatch = mismatch || it->second != v.holds;
    }
    report << line.dump() << '\n';
  };

  for (const std::string& c : checks) {
    if (c == "classical") {
      write(check_classicality(model.process, model.observable, model.preparations, {}, tol));
    } else if (c == "incoherent") {
      write(check_incoherence(model.process, model.observable, model.preparations, {}, tol));
    } else if (c == "ncgd") {
      write(check_ncgd(model.process, model.observable, tol));
    } else if (c == "invertible") {
      write(check_invertibility(require_markov(model, c)));
    } else if (c == "markov") {
      write(check_markovianity(model.process, tol));
    } else if (c == "projector_identity") {
      write(projector_identity_verdict(require_markov(model, c), model.observable, tol));
    } else if (c == "pipeline") {
      PipelineOptions options;
      options.tolerance = tol;
      const PipelineReport pipeline =
          check_theorem_pipeline(model.process, model.observable, model.preparations, options);
      for (const Implication& i : pipeline.implications) report << to_json(i).dump() << '\n';
      mismatch = mismatch || pipeline.violated();
    }
  }
  emit(config, report.str(), out);
  return mismatch ? kExitMismatch : kExitOk;
}

int run_counterexample(const RunConfig& config, std::ostream& out) {
  if (!config.model) throw InputError("--which", "a counterexample index or --model is required");
  ModelInstance model = [&] {
    try {
      return build_model(*config.model);
    } catch (const IndexError& e) {
      throw InputError("--which", e.what());
    }
  }();
  RunConfig target = config;
  if (target.output_path.empty()) target.output_path = "data/" + model.name + ".json";
  emit(target, model_to_json(model).dump(2) + "\n", out);
  return kExitOk;
}

int run_dephasing(const RunConfig& config, std::ostream& out) {
  std::vector<TrajectoryRow> rows;
  try {
    rows = trajectory_rows(config.gamma, config.s, config.x0, config.t_max, config.dt);
  } catch (const ModelParameterError& e) {
    throw InputError("dephasing-model", e.what());
  }
  std::ostringstream csv;
  write_trajectory_csv(csv, rows);
  emit(config, csv.str(), out);
  return kExitOk;
}

int run_fuzz_command(const RunConfig& config, std::ostream& out) {
  if (!config.seed) throw InputError("--seed", "fuzz requires a seed");
  for (const std::string& c : config.checks) {
    if (c != "pipeline") throw InputError("--checks", "fuzz supports only 'pipeline'");
  }
  const FuzzReport report = run_fuzz(*config.seed, config.count, config.threads);
  std::ostringstream lines;
  std::size_t violations = 0;
  for (const FuzzClassReport& c : report.classes) {
    lines << to_json(c).dump() << '\n';
    violations += c.violations;
  }
  lines << Json{{"seed", report.seed}, {"violations", violations}}.dump() << '\n';
  emit(config, lines.str(), out);
  return report.violated() ? kExitMismatch : kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (!(config.tolerance > 0.0)) throw InputError("--tolerance", "must be positive");
    switch (config.command) {
      case Command::Check: return run_check(config, out);
      case Command::Counterexample: return run_counterexample(config, out);
      case Command::DephasingModel: return run_dephasing(config, out);
      case Command::Fuzz: return run_fuzz_command(config, out);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classicality, incoherence and NCGD checks for multi-time quantum processes"};
  app.require_subcommand(1);
  RunConfig config;
  std::string checks;
  std::string input;
  std::string model;
  int which = 0;
  std::uint64_t seed = 0;

  auto* check = app.add_subcommand("check", "Run checkers on a process description or builtin model");
  check->add_option("--input", input, "Process JSON file");
  check->add_option("--model", model, "Builtin model: counterexample-1/2/3, lorentzian-dephasing");
  check->add_option("--checks", checks,
                    "Comma list: classical,incoherent,ncgd,invertible,markov,projector_identity,pipeline");
  check->add_option("--tolerance", config.tolerance, "Absolute tolerance");
  check->add_option("--output", config.output_path, "Report path (JSON lines)");

  auto* counter = app.add_subcommand("counterexample", "Export a builtin model as JSON");
  counter->add_option("--which", which, "Counterexample index 1, 2 or 3");
  counter->add_option("--model", model, "Builtin model name");
  counter->add_option("--output", config.output_path, "Output path (default data/<name>.json)");

  auto* dephasing = app.add_subcommand("dephasing-model", "Trajectory CSV for the dephasing model");
  dephasing->add_option("--gamma", config.gamma, "Dephasing rate");
  dephasing->add_option("--s", config.s, "Dephasing time");
  dephasing->add_option("--x0", config.x0, "Initial <sigma_x>");
  dephasing->add_option("--t-max", config.t_max, "Last time");
  dephasing->add_option("--dt", config.dt, "Time step");
  dephasing->add_option("--output", config.output_path, "CSV path");

  auto* fuzz = app.add_subcommand("fuzz", "Seeded theorem fuzzing");
  auto* seed_option = fuzz->add_option("--seed", seed, "Base seed")->required();
  fuzz->add_option("--count", config.count, "Instances per class");
  fuzz->add_option("--checks", checks, "Only 'pipeline'");
  fuzz->add_option("--threads", config.threads, "Worker threads (default QCLASSICAL_THREADS)");
  fuzz->add_option("--output", config.output_path, "Report path (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  }

  std::stringstream list(checks);
  for (std::string item; std::getline(list, item, ',');) {
    if (!item.empty()) config.checks.push_back(item);
  }
  if (!input.empty()) config.input_path = input;
  if (!model.empty()) config.model = model;

  if (check->parsed()) {
    config.command = Command::Check;
  } else if (counter->parsed()) {
    config.command = Command::Counterexample;
    if (which != 0) config.model = "counterexample-" + std::to_string(which);
  } else if (dephasing->parsed()) {
    config.command = Command::DephasingModel;
  } else {
    config.command = Command::Fuzz;
    if (seed_option->count() > 0) config.seed = seed;
  }
  return run(config, out, err);
}

}  // namespace qclassical
