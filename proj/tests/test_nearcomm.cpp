#include "doctest.h"

#include "acnum/linalg.hpp"
#include "acnum/nearcomm.hpp"
#include "acnum/random.hpp"

#include <Eigen/SVD>

#include <cmath>

using namespace acnum;

namespace {

// Orthogonal projection onto {X : [X,B] = [X,B^*] = 0} from the null space
// of the stacked commutator maps on column-major vec(X).
CMatrix oracle_projection(const CMatrix& a, const CMatrix& b) {
  const Index d = a.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix l(2 * d * d, d * d);
  l.topRows(d * d) = kron(id, b) - kron(b.transpose(), id);
  l.bottomRows(d * d) = kron(id, CMatrix(b.adjoint())) - kron(b.conjugate(), id);
  Eigen::JacobiSVD<CMatrix> svd(l, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, sv(0))) ++rank;
  const CMatrix n = svd.matrixV().rightCols(d * d - rank);
  return unvec(n * (n.adjoint() * vec(a)), d);
}

CMatrix diag(std::initializer_list<Complex> v) {
  CMatrix d = CMatrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
  Index i = 0;
  for (Complex x : v) d(i, i) = x, ++i;
  return d;
}

double max_constraint(const CMatrix& x, const CMatrix& b) {
  return std::max(hs_norm(commutator(x, b)), hs_norm(commutator(x, b.adjoint())));
}

}  // namespace

TEST_CASE("defect") {
  const CMatrix z = diag({1, Complex(0, 1), -1});
  CHECK(defect(z, z * z) == 0.0);
  CHECK(defect(pauli_x(), pauli_z()) == doctest::Approx(2 * hs_norm(commutator(pauli_x(), pauli_z()))));
  CHECK_THROWS_AS(defect(pauli_x(), identity(3)), DimensionError);
}

TEST_CASE("commutant projection: closed forms") {
  Rng rng(Seed{70});
  const CMatrix a = gaussian_matrix(4, rng);
  CHECK(hs_norm(commutant_projection(a, identity(4)) - a) < 1e-14);
  // Distinct diagonal B keeps the diagonal of A.
  const CMatrix b = diag({1, 2, Complex(0, 3), -1});
  CHECK(hs_norm(commutant_projection(a, b) - CMatrix(a.diagonal().asDiagonal())) < 1e-12);
  // Normal B with a repeated eigenvalue: block pinching in its eigenbasis.
  const CMatrix u = haar_unitary(4, rng);
  const CMatrix nb = u * diag({2, 2, Complex(0, 1), -1}) * u.adjoint();
  CMatrix aw = u.adjoint() * a * u;
  CMatrix pinched = CMatrix::Zero(4, 4);
  pinched.topLeftCorner(2, 2) = aw.topLeftCorner(2, 2);
  pinched(2, 2) = aw(2, 2);
  pinched(3, 3) = aw(3, 3);
  CHECK(hs_norm(commutant_projection(a, nb) - u * pinched * u.adjoint()) < 1e-10);
  // A generic B generates everything: only scalars commute.
  const CMatrix g = gaussian_matrix(4, rng);
  CHECK(hs_norm(commutant_projection(a, g) - normalized_trace(a) * identity(4)) < 1e-10);
}

TEST_CASE("commutant projection agrees with the nullspace oracle") {
  Rng rng(Seed{71});
  std::vector<CMatrix> bs;
  bs.push_back(kron(haar_unitary(3, rng), identity(2)));              // commutant 1 (x) M_2
  bs.push_back(kron(identity(3), gaussian_matrix(2, rng)));           // commutant M_3 (x) 1
  const CMatrix v = haar_unitary(6, rng);
  bs.push_back(v * kron(diag({1, 2, 3}), identity(2)) * v.adjoint());  // multiplicity two
  CMatrix blocks = CMatrix::Zero(6, 6);
  blocks.topLeftCorner(2, 2) = gaussian_matrix(2, rng);
  blocks.bottomRightCorner(4, 4) = kron(identity(2), gaussian_matrix(2, rng));
  bs.push_back(blocks);
  bs.push_back(gaussian_matrix(6, rng));
  for (const CMatrix& b : bs) {
    const CMatrix a = gaussian_matrix(6, rng);
    const CMatrix x = commutant_projection(a, b);
    CHECK(hs_norm(x - oracle_projection(a, b)) <= 1e-9);
    CHECK(max_constraint(x, b) <= 1e-10);
  }
}

TEST_CASE("commutant projection is an idempotent, scale covariant contraction") {
  Rng rng(Seed{72});
  for (Index d : {2, 5, 8, 16}) {
    const CMatrix u = haar_unitary(d, rng);
    CMatrix dd = CMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) dd(i, i) = static_cast<double>(i % 3);
    const CMatrix b = u * dd * u.adjoint();
    const CMatrix a = gaussian_matrix(d, rng);
    const CMatrix x = commutant_projection(a, b);
    CHECK(max_constraint(x, b) <= 1e-10);
    CHECK(hs_norm(commutant_projection(x, b) - x) <= 1e-10);
    CHECK(hs_norm(x) <= hs_norm(a) + 1e-12);
    // a - x is orthogonal to the commutant.
    CHECK(std::abs(hs_inner(a - x, x)) <= 1e-10);
    const Complex c(0.3, -2.0);
    CHECK(hs_norm(commutant_projection(c * a, b) - c * x) <= 1e-12 * std::max(1.0, hs_norm(c * x)));
  }
}

TEST_CASE("descent: commuting input is already optimal") {
  Rng rng(Seed{73});
  const CMatrix u = haar_unitary(5, rng);
  const CMatrix a = u * diag({1, 2, 3, 4, 5}) * u.adjoint();
  const CMatrix b = u * diag({Complex(0, 1), 1, -1, 2, 0.5}) * u.adjoint();
  const DescentTrace t = alternating_descent(a, b, 10, 4, Seed{74});
  CHECK(t.converged);
  CHECK(t.sweeps_used == 1);
  CHECK(t.distance_sq <= 1e-20);
  CHECK(t.monotone_ok);
  CHECK(t.restarts == 5);
  CHECK(t.run_objectives.size() == 5);
}

TEST_CASE("descent: normal pair plus a perturbation is recovered") {
  for (Index d : {4, 12, 32})
    for (double delta : {1e-3, 1e-2}) {
      Rng rng(Seed{static_cast<std::uint64_t>(75 + d)});
      const CMatrix u = haar_unitary(d, rng);
      CMatrix da = CMatrix::Zero(d, d), db = CMatrix::Zero(d, d);
      for (Index i = 0; i < d; ++i) {
        da(i, i) = Complex(rng.normal(), rng.normal()) * 0.5;
        db(i, i) = Complex(rng.normal(), rng.normal()) * 0.5;
      }
      const CMatrix e1 = gaussian_matrix(d, rng), e2 = gaussian_matrix(d, rng);
      const CMatrix a = u * da * u.adjoint() + (delta / hs_norm(e1)) * e1;
      const CMatrix b = u * db * u.adjoint() + (delta / hs_norm(e2)) * e2;
      const DescentTrace t = alternating_descent(a, b, 100, 4, Seed{76});
      CHECK(t.monotone_ok);
      CHECK(t.distance_sum <= 5 * delta);
      CHECK(max_constraint(t.a_final, t.b_final) <= 1e-10 * std::max(1.0, hs_norm(t.a_final)));
      CHECK(t.distance_sq == doctest::Approx(std::pow(hs_norm(a - t.a_final), 2) + std::pow(hs_norm(b - t.b_final), 2)));
    }
}

TEST_CASE("descent is monotone on random contractions") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(Seed{100 + s});
    const Index d = 2 + static_cast<Index>(rng.below(10));
    const CMatrix a = random_unit_ball(d, rng), b = random_unit_ball(d, rng);
    const DescentTrace t = alternating_descent(a, b, 30, 6, Seed{200 + s});
    CHECK(t.monotone_ok);
    CHECK(t.best_run < t.restarts);
    for (double o : t.run_objectives) CHECK(t.distance_sq <= o);
  }
}

TEST_CASE("contraction pairs from unitary logarithms") {
  Rng rng(Seed{77});
  for (Index d : {2, 8, 24}) {
    const CMatrix u1 = haar_unitary(d, rng), u2 = haar_unitary(d, rng);
    const CMatrix v1 = haar_unitary(d, rng), v2 = haar_unitary(d, rng);
    const ContractionPair p = contraction_pair_from_unitaries(u1, u2, v1, v2);
    CHECK(op_norm(p.a, 1e-12) <= 1 + 1e-8);
    CHECK(op_norm(p.b, 1e-12) <= 1 + 1e-8);
    CHECK(hs_norm(p.a - unitary_log(u1) - Complex(0, 1) * unitary_log(u2)) < 1e-14);
  }
  // Commuting unitaries give a commuting pair.
  const CMatrix w = haar_unitary(4, rng);
  auto conj = [&](std::initializer_list<Complex> v) { return CMatrix(w * diag(v) * w.adjoint()); };
  const Complex i(0, 1);
  const ContractionPair c = contraction_pair_from_unitaries(conj({1, i, -1, -i}), conj({i, i, 1, -1}), conj({-1, 1, i, 1}),
                                                conj({1, -i, -i, i}));
  CHECK(defect(c.a, c.b) <= 1e-13);
  CHECK_THROWS_AS(contraction_pair_from_unitaries(2.0 * identity(2), identity(2), identity(2), identity(2)), DomainError);
}

TEST_CASE("witness contraction pair") {
  const ContractionPair p = witness_contraction_pair(1, 0.1, 1, 2, Seed{78});
  CHECK(p.a.rows() == 3 * 1 * 4 * 2 * 3);
  CHECK(op_norm(p.a, 1e-12) <= 1 + 1e-8);
  CHECK(op_norm(p.b, 1e-12) <= 1 + 1e-8);
  // Same seed, same pair.
  CHECK(witness_contraction_pair(1, 0.1, 1, 2, Seed{78}).b == p.b);
  CHECK_THROWS_AS(witness_contraction_pair(6, 0.1, 1, 1, Seed{1}), DomainError);
  CHECK_THROWS_AS(witness_contraction_pair(2, 0.1, 3, 1, Seed{1}), DomainError);
  CHECK_THROWS_AS(witness_contraction_pair(2, 0.1, 1, 7, Seed{1}), DomainError);
}
