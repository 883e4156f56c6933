#pragma once

// Batch front-end: check, counterexample, dephasing-model and fuzz commands.
// Exit status 0 on success or matching verdicts, 1 on a verdict mismatch or
// theorem violation, 2 on input errors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qclassical {

enum class Command { Check, Counterexample, DephasingModel, Fuzz };

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitInputError = 2;

struct RunConfig {
  Command command = Command::Check;
  std::optional<std::string> input_path;
  std::optional<std::string> model;
  /// Empty or "-" writes to the output stream.
  std::string output_path;
  double tolerance = 1e-9;
  std::vector<std::string> checks;
  std::optional<std::uint64_t> seed;
  std::size_t count = 10000;
  std::size_t threads = 0;
  double gamma = 1.0;
  double s = 1.0;
  double x0 = 1.0;
  double t_max = 5.0;
  double dt = 0.01;
};

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qclassical
