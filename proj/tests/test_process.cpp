#include <doctest.h>

#include <cmath>

#include "qclassical/errors.hpp"
#include "qclassical/models.hpp"
#include "qclassical/process.hpp"
#include "qclassical/random.hpp"

using namespace qclassical;

namespace {

InterventionSequence identity_sequence(std::size_t steps) {
  InterventionSequence seq;
  seq.steps.assign(steps, IdentityIntervention{});
  return seq;
}

Intervention random_intervention(std::size_t dim, Rng& rng) {
  switch (rng() % 4) {
    case 0: return IdentityIntervention{};
    case 1: return DephaseIntervention{0};
    case 2: return OutcomeIntervention{0, static_cast<std::size_t>(rng() % dim)};
    default: return MapIntervention{random_cptp(dim, rng)};
  }
}

Observable random_obs(std::size_t dim, Rng& rng) {
  std::vector<double> values(dim);
  for (std::size_t i = 0; i < dim; ++i) values[i] = static_cast<double>(i);
  return Observable::from_basis(haar_unitary(dim, rng), values);
}

}  // namespace

TEST_CASE("time grid must increase strictly") {
  CHECK_NOTHROW(TimeGrid({0.0, 1.0, 2.5}));
  CHECK_THROWS(TimeGrid({0.0, 1.0, 1.0}));
}

TEST_CASE("dilated process validation") {
  Rng rng(1);
  const DensityMatrix joint = random_density_matrix(4, rng);
  CHECK_THROWS_AS(DilatedProcess(2, 2, joint, {2.0 * identity(4)}), NotUnitaryError);
  CHECK_THROWS_AS(DilatedProcess(2, 2, joint, {identity(3)}), DimensionError);
  CHECK_THROWS_AS(DilatedProcess(2, 2, joint, {identity(4)}, TimeGrid({0.0})), SequenceError);
  CHECK_THROWS_AS(DilatedProcess(8, 16, random_density_matrix(2, rng), {}), DimensionError);
}

TEST_CASE("markov process requires CPTP maps") {
  Rng rng(2);
  CHECK_THROWS_AS(MarkovProcess(random_density_matrix(2, rng), {projector_superop(Observable::sigma_z(), 0)}),
                  NotCompletelyPositiveError);
}

TEST_CASE("all-identity sequences keep unit trace") {
  Rng rng(3);
  const DilatedProcess p = random_dilated_process(2, 3, 4, rng);
  for (std::size_t k = 1; k <= 4; ++k) {
    CHECK(evaluate(truncate(p, k), identity_sequence(k)).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sequence length and dimension mismatches are rejected") {
  Rng rng(4);
  const Process p = random_dilated_process(2, 2, 3, rng);
  CHECK_THROWS_AS(evaluate(p, identity_sequence(2)), SequenceError);
  InterventionSequence seq = identity_sequence(3);
  seq.steps[1] = MapIntervention{Superoperator::identity(3)};
  CHECK_THROWS_AS(evaluate(p, seq), DimensionError);
  seq = identity_sequence(3);
  seq.preparation = DephaseIntervention{0};
  seq.observables = {Observable::sigma_z()};
  CHECK_THROWS_AS(evaluate(p, seq), SequenceError);
  seq = identity_sequence(3);
  seq.preparation = MapIntervention{projector_superop(Observable::sigma_z(), 0)};
  CHECK_THROWS_AS(evaluate(p, seq), NotCompletelyPositiveError);
}

TEST_CASE("counterexample 1 probabilities") {
  const ModelInstance m = build_counterexample(1);
  const Intervention prep = std::get<SinglePreparation>(m.preparations).preparation;
  const MeasuredOutcome uuu[] = {{0, 0}, {1, 0}, {2, 0}};
  const MeasuredOutcome udu[] = {{0, 0}, {1, 1}, {2, 0}};
  const MeasuredOutcome u_u[] = {{0, 0}, {2, 0}};
  CHECK(std::abs(joint_probability(m.process, m.observable, prep, uuu) - 0.125) < 1e-12);
  CHECK(std::abs(joint_probability(m.process, m.observable, prep, udu) - 0.125) < 1e-12);
  CHECK(std::abs(joint_probability(m.process, m.observable, prep, u_u)) < 1e-12);
}

TEST_CASE("single measurement on the maximally mixed state") {
  const MarkovProcess p(DensityMatrix::maximally_mixed(2), {Superoperator::identity(2)});
  const MeasuredOutcome up[] = {{0, 0}};
  CHECK(joint_probability(p, Observable::sigma_z(), IdentityIntervention{}, up) == doctest::Approx(0.5));
}

TEST_CASE("joint probability steps must increase") {
  const ModelInstance m = build_counterexample(1);
  const MeasuredOutcome bad[] = {{1, 0}, {0, 0}};
  CHECK_THROWS_AS(joint_probability(m.process, m.observable, IdentityIntervention{}, bad), SequenceError);
}

TEST_CASE("counterexample 3 two-time statistics equal the diagonal of the state at t1") {
  const ModelInstance m = build_counterexample(3);
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix rho = random_density_matrix(4, rng).matrix();
    const Intervention prep = MapIntervention{Superoperator::replacement(4, rho)};
    for (std::size_t r1 = 0; r1 < 2; ++r1) {
      for (std::size_t r2 = 0; r2 < 2; ++r2) {
        const MeasuredOutcome both[] = {{0, r1}, {1, r2}};
        const double p = joint_probability(m.process, m.observable, prep, both);
        CHECK(std::abs(p - rho(2 * r1 + r2, 2 * r1 + r2).real()) < 1e-12);
      }
      // Marginal at t2 alone: sum_j rho_{j r2, j r2}.
      const MeasuredOutcome second[] = {{1, r1}};
      const double marginal = joint_probability(m.process, m.observable, prep, second);
      CHECK(std::abs(marginal - (rho(r1, r1) + rho(2 + r1, 2 + r1)).real()) < 1e-12);
    }
  }
}

TEST_CASE("probabilities sum to one over all outcome tuples") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Process p = random_dilated_process(2, 2, 3, rng);
    const Observable obs = random_obs(2, rng);
    double total = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t c = 0; c < 2; ++c) {
          const MeasuredOutcome o[] = {{0, a}, {1, b}, {2, c}};
          total += joint_probability(p, obs, IdentityIntervention{}, o);
        }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("summing outcomes at a step equals dephasing there") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Process p = random_dilated_process(2, 2, 3, rng);
    InterventionSequence seq = identity_sequence(3);
    seq.observables = {random_obs(2, rng)};
    for (auto& s : seq.steps) s = random_intervention(2, rng);
    const std::size_t k = rng() % 3;
    ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
    for (std::size_t r = 0; r < 2; ++r) {
      seq.steps[k] = OutcomeIntervention{0, r};
      sum += evaluate(p, seq).matrix();
    }
    seq.steps[k] = DephaseIntervention{0};
    CHECK(max_abs_entry(sum - evaluate(p, seq).matrix()) < 1e-12);
  }
}

TEST_CASE("markov evaluation: stepwise and factorised paths agree") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Superoperator> maps;
    for (int k = 0; k < 4; ++k) maps.push_back(random_cptp(2, rng));
    const MarkovProcess p(random_density_matrix(2, rng), maps);
    InterventionSequence seq = identity_sequence(4);
    seq.observables = {random_obs(2, rng)};
    for (auto& s : seq.steps) s = random_intervention(2, rng);
    seq.preparation = MapIntervention{random_cptp(2, rng)};
    CHECK(max_abs_entry(evaluate(p, seq).matrix() - evaluate_factorized(p, seq)) < 1e-12);
  }
}

TEST_CASE("markov causality: later interventions do not change the earlier state") {
  Rng rng(9);
  std::vector<Superoperator> maps;
  for (int k = 0; k < 3; ++k) maps.push_back(random_cptp(2, rng));
  const MarkovProcess p(random_density_matrix(2, rng), maps);
  InterventionSequence head = identity_sequence(1);
  const ComplexMatrix early = evaluate(truncate(p, 1), head).matrix();
  for (int trial = 0; trial < 5; ++trial) {
    InterventionSequence seq = identity_sequence(3);
    seq.steps[1] = MapIntervention{random_cptp(2, rng)};
    seq.steps[2] = MapIntervention{random_cptp(2, rng)};
    // Tracing out the future of a CPTP tail leaves the trace only; the state
    // at t1 comes from the one-step truncation regardless of the tail.
    CHECK(evaluate(p, seq).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_abs_entry(evaluate(truncate(p, 1), head).matrix() - early) == 0.0);
  }
}

TEST_CASE("markov family composition: Lambda_{2,1} Lambda_{1,0} = Lambda_{2,0}") {
  Rng rng(10);
  const DilatedProcess d = random_dilated_process(2, 1, 2, rng);
  const MarkovProcess m = markov_from_dilation(d);
  CHECK(m.derived());
  const Superoperator l20 = reduced_map(d, 2);
  CHECK(max_abs_entry(compose(m.maps()[1], m.maps()[0]).matrix() - l20.matrix()) < 1e-12);
  CHECK(max_abs_entry(m.map_between(2, 0).matrix() - l20.matrix()) < 1e-12);
}

TEST_CASE("closed-system dilation: derived maps are unitary channels and evaluation agrees") {
  Rng rng(11);
  const DilatedProcess d = random_dilated_process(2, 1, 3, rng);
  const MarkovProcess m = markov_from_dilation(d);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(max_abs_entry(m.maps()[k].matrix() - unitary_channel(d.unitaries()[k]).matrix()) < 1e-12);
  }
  for (int trial = 0; trial < 10; ++trial) {
    InterventionSequence seq = identity_sequence(3);
    seq.observables = {random_obs(2, rng)};
    for (auto& s : seq.steps) s = random_intervention(2, rng);
    CHECK(max_abs_entry(evaluate(d, seq).matrix() - evaluate(m, seq).matrix()) < 1e-12);
  }
}

TEST_CASE("markov_from_dilation rejects correlated initial states") {
  Rng rng(12);
  const DilatedProcess d(2, 2, random_density_matrix(4, rng), {haar_unitary(4, rng)});
  CHECK_THROWS_AS(markov_from_dilation(d), NotDerivableError);
}

TEST_CASE("markov_from_dilation rejects singular reduced maps") {
  // Swap with an environment in a fixed state erases the system, so
  // Lambda_{1,0} cannot be inverted when building Lambda_{2,1}.
  ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  const DensityMatrix joint = DensityMatrix::from_matrix(
      tensor_product(0.5 * identity(2), outer(basis_ket(2, 0))));
  const DilatedProcess d(2, 2, joint, {swap, identity(4)});
  CHECK_THROWS_AS(markov_from_dilation(d), NotInvertibleError);
}

TEST_CASE("dephasing model: derived maps have the Bloch decay action") {
  const MixedUnitaryProcess p = dephasing_model_process(1.0, 1.0, 1.0, {0.0, 1.0, 2.0, 3.0});
  const MarkovProcess m = markov_from_dilation(p);
  for (std::size_t k = 1; k <= 3; ++k) {
    const ComplexMatrix out = m.map_between(k, 0).apply(0.5 * (identity(2) + 0.6 * pauli_x() + 0.8 * pauli_z()));
    const double decay = std::exp(-static_cast<double>(k));
    CHECK(std::abs((pauli_x() * out).trace().real() - 0.6 * decay) < 1e-12);
    CHECK(std::abs((pauli_z() * out).trace().real() - 0.8) < 1e-12);
  }
}

TEST_CASE("dephasing model: dilated and derived evaluations differ after a dephasing") {
  const MixedUnitaryProcess p = dephasing_model_process(1.0, 1.0, 1.0, {0.0, 1.0, 2.0, 3.0});
  const MarkovProcess m = markov_from_dilation(p);
  InterventionSequence seq = identity_sequence(3);
  seq.observables = {Observable::sigma_x()};
  seq.steps[0] = DephaseIntervention{0};
  const double dilated = (pauli_x() * evaluate(p, seq).matrix()).trace().real();
  const double derived = (pauli_x() * evaluate(m, seq).matrix()).trace().real();
  CHECK(std::abs(dilated - 0.5 * (std::exp(-1.0) + std::exp(-3.0))) < 1e-12);
  CHECK(std::abs(derived - std::exp(-3.0)) < 1e-12);
}

TEST_CASE("mixed-unitary process agrees with its dilation") {
  Rng rng(13);
  std::vector<MixedUnitaryProcess::Branch> branches;
  for (double w : {0.2, 0.3, 0.5}) {
    branches.push_back({w, {haar_unitary(2, rng), haar_unitary(2, rng)}});
  }
  const MixedUnitaryProcess p(random_density_matrix(2, rng), branches);
  const DilatedProcess d = p.to_dilated();
  for (int trial = 0; trial < 10; ++trial) {
    InterventionSequence seq = identity_sequence(2);
    seq.observables = {random_obs(2, rng)};
    for (auto& s : seq.steps) s = random_intervention(2, rng);
    CHECK(max_abs_entry(evaluate(p, seq).matrix() - evaluate(d, seq).matrix()) < 1e-12);
  }
  CHECK_THROWS_AS(MixedUnitaryProcess(random_density_matrix(2, rng), {{0.5, {identity(2)}}}),
                  InvalidStateError);
}
