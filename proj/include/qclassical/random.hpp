#pragma once

// Seeded generators for property tests and the theorem fuzz harness.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "qclassical/channels.hpp"
#include "qclassical/linalg.hpp"
#include "qclassical/process.hpp"

namespace qclassical {

using Rng = std::mt19937_64;

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
ComplexMatrix haar_unitary(std::size_t dim, Rng& rng);
/// Random full-rank density matrix from the Hilbert-Schmidt ensemble.
DensityMatrix random_density_matrix(std::size_t dim, Rng& rng);
/// Random pure state.
DensityMatrix random_pure_state(std::size_t dim, Rng& rng);
/// Random CPTP map: Stinespring dilation with a Haar unitary on
/// system kron ancilla, ancilla dimension equal to the system dimension.
Superoperator random_cptp(std::size_t dim, Rng& rng);
/// Random permutation matrix times random diagonal phases.
ComplexMatrix random_phase_permutation(std::size_t dim, Rng& rng);
/// Random column-stochastic matrix (Dirichlet(1) columns).
RealMatrix random_stochastic_matrix(std::size_t dim, Rng& rng);

/// `map` expressed in the basis given by the columns of `basis`:
/// X -> V map(V^dagger X V) V^dagger.
Superoperator rotate_map(const Superoperator& map, const ComplexMatrix& basis);

/// CPTP map whose output populations (in the columns of `basis`) do not
/// depend on input coherences: a convex mixture of a measure-and-prepare map
/// and phase-permutation unitaries. With `invertible` the mixing keeps both
/// diagonal blocks non-singular (checked; regenerated otherwise).
Superoperator random_block_triangular_map(std::size_t dim, const ComplexMatrix& basis, Rng& rng,
                                          bool invertible = true);

/// CPTP map that never creates coherence from diagonal inputs but may detect
/// coherence: measure-and-prepare onto the basis composed with an arbitrary
/// channel acting only after a full dephasing, mixed with a generic unitary
/// channel conjugated so that the diagonal is mapped to the diagonal.
Superoperator random_noncreating_map(std::size_t dim, const ComplexMatrix& basis, Rng& rng);

/// Dilation with a random product initial state and Haar unitaries on
/// system kron environment.
DilatedProcess random_dilated_process(std::size_t dim_s, std::size_t dim_e, std::size_t steps,
                                      Rng& rng);
/// Dilation whose unitaries are environment-controlled phase permutations in
/// `basis`; the system statistics in that basis are classical.
DilatedProcess random_controlled_permutation_process(std::size_t dim_s, std::size_t dim_e,
                                                     std::size_t steps, const ComplexMatrix& basis,
                                                     Rng& rng);

}  // namespace qclassical
