#pragma once

// Seeded property fuzzing of the theorem implications over random instances.
// Instance i of a class is drawn from its own generator seeded by
// (base seed, class, i), so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qclassical {

enum class FuzzClass {
  ClassicalImpliesIncoherent,  ///< (a) random dilations, non-degenerate observable
  BlockTriangularClassical,    ///< (b) block-triangular invertible Markov families
  IncoherentImpliesNcgd,       ///< (c) block-triangular and generic Markov families
  NcgdImpliesDiagonal,         ///< (d) block-triangular, non-creating and generic families
};

struct FuzzClassReport {
  FuzzClass kind = FuzzClass::ClassicalImpliesIncoherent;
  std::string name;
  std::string theorem;
  std::size_t instances = 0;
  std::size_t premise_true = 0;
  std::size_t violations = 0;
  std::vector<std::size_t> violating_instances;  ///< first few indices
};

struct FuzzReport {
  std::uint64_t seed = 0;
  std::vector<FuzzClassReport> classes;

  bool violated() const;
};

/// Worker count: QCLASSICAL_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t fuzz_thread_count();

FuzzClassReport run_fuzz_class(FuzzClass kind, std::uint64_t seed, std::size_t count,
                               std::size_t threads = 0);
/// All four classes with `count` instances each.
FuzzReport run_fuzz(std::uint64_t seed, std::size_t count, std::size_t threads = 0);

}  // namespace qclassical
