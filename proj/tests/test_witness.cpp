#include "doctest.h"

#include "acnum/linalg.hpp"
#include "acnum/random.hpp"
#include "acnum/subalgebra.hpp"
#include "acnum/witness.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdint>

using namespace acnum;

namespace {

// u acting on qubits (qa, qb) of an N-qubit register, pair index
// 2 bit(qa) + bit(qb); qubit q is bit N-1-q. Built entry by entry.
CMatrix two_qubit_embed(const CMatrix& u, std::size_t total, std::size_t qa, std::size_t qb) {
  const Index dim = Index{1} << total;
  const Index ma = Index{1} << (total - 1 - qa), mb = Index{1} << (total - 1 - qb);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) {
      if ((r & ~(ma | mb)) != (c & ~(ma | mb))) continue;
      const Index ar = 2 * ((r & ma) ? 1 : 0) + ((r & mb) ? 1 : 0);
      const Index ac = 2 * ((c & ma) ? 1 : 0) + ((c & mb) ? 1 : 0);
      out(r, c) = u(ar, ac);
    }
  return out;
}

CMatrix theta_unitary(std::size_t n, double t) {
  CMatrix w = identity(Index{1} << (2 * n));
  for (std::size_t k = 0; k < n; ++k) w = w * two_qubit_embed(u_t(t), 2 * n, k, n + k);
  return w;
}

const CMatrix& pauli(int i) {
  static const CMatrix ps[4] = {identity(2), pauli_x(), pauli_y(), pauli_z()};
  return ps[i];
}

// Component of x of tensor length exactly i, from its Pauli expansion.
std::vector<CMatrix> pauli_length_components(std::size_t n, const CMatrix& x) {
  const Index dim = Index{1} << n;
  std::vector<CMatrix> f(n + 1, CMatrix::Zero(dim, dim));
  std::size_t strings = 1;
  for (std::size_t i = 0; i < n; ++i) strings *= 4;
  for (std::size_t s = 0; s < strings; ++s) {
    CMatrix p = identity(1);
    std::size_t len = 0, rest = s;
    for (std::size_t q = 0; q < n; ++q) {
      const int letter = static_cast<int>(rest % 4);
      rest /= 4;
      if (letter != 0) ++len;
      p = kron(p, pauli(letter));
    }
    f[len] += hs_inner(p, x) * p;
  }
  return f;
}

double op_norm_dense(const CMatrix& x) { return Eigen::JacobiSVD<CMatrix>(x).singularValues()(0); }

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("basic witness pieces") {
  CHECK(x_ni(2, 0).diagonal().real() == Eigen::Vector4d(1, 1, -1, -1));
  CHECK(x_ni(2, 1).diagonal().real() == Eigen::Vector4d(1, -1, 1, -1));
  const CMatrix p = singlet_projection();
  CHECK(hs_norm(p * p - p) < 1e-15);
  CHECK(std::abs(normalized_trace(p) - 0.25) < 1e-15);
  // The singlet is antisymmetric under the swap.
  CMatrix swap = CMatrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1;
  CHECK(hs_norm(swap * p + p) < 1e-15);
  CHECK(is_unitary(u_t(0.3), 1e-14));
  CHECK(hs_norm(u_t(0.0) - identity(4)) < 1e-15);
  CHECK(rho(0.0) == doctest::Approx(1.0));
  CHECK(rho(M_PI) == doctest::Approx(0.0));
}

TEST_CASE("theta agrees with a dense conjugation") {
  Rng rng(Seed{60});
  for (std::size_t n : {1, 2, 3}) {
    const double t = 0.37;
    const CMatrix w = theta_unitary(n, t);
    const CMatrix x = gaussian_matrix(Index{1} << (2 * n), rng);
    CHECK(hs_norm(theta_apply(n, t, x) - w * x * w.adjoint()) < 1e-12);
  }
}

TEST_CASE("deformation identities on 2x2 pairs") {
  Rng rng(Seed{61});
  for (int i = 0; i < 200; ++i) {
    const double t = (2 * rng.uniform() - 1) * M_PI;
    const DeformResiduals r = deform_identity_checks(t, gaussian_matrix(2, rng), gaussian_matrix(2, rng));
    CHECK(r.singlet_compression <= 1e-12);
    CHECK(r.trace_formula <= 1e-12);
    CHECK(r.expectation <= 1e-12);
  }
}

TEST_CASE("length projections agree with the Pauli expansion") {
  Rng rng(Seed{62});
  for (std::size_t n : {1, 2, 3}) {
    const CMatrix x = gaussian_matrix(Index{1} << n, rng);
    const auto oracle = pauli_length_components(n, x);
    const LengthDecomposition d = length_projections(n, x, 1);
    REQUIRE(d.f.size() == n + 1);
    CMatrix sum = CMatrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i <= n; ++i) {
      CHECK(hs_norm(d.f[i] - oracle[i]) < 1e-12);
      sum += d.f[i];
    }
    CHECK(hs_norm(sum - x) < 1e-12);
    CHECK(hs_norm(d.e_l - oracle[0] - oracle[1]) < 1e-12);
  }
}

TEST_CASE("conditional expectation onto theta(M_n x 1) matches the generic projection") {
  const std::size_t n = 2;
  const double t = 0.4;
  const Index dim = 4;
  std::vector<CMatrix> spanning;
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j)
      spanning.push_back(theta_apply(n, t, kron(matrix_unit(dim, i, j), identity(dim))));
  const SubalgebraBasis q = SubalgebraBasis::from_spanning(dim * dim, spanning);
  Rng rng(Seed{63});
  for (int i = 0; i < 20; ++i) {
    const CMatrix x = gaussian_matrix(dim, rng);
    const ThetaExpectation e = cond_expect_theta(n, t, x);
    REQUIRE(e.value.rows() == dim * dim);
    CHECK(hs_norm(e.value - cond_expect(kron(x, identity(dim)), q)) <= 1e-9);
    CHECK(std::abs(e.norm_sq - e.formula_sq) <= 1e-9);
    CHECK(e.min_bound_slack >= -1e-9);
  }
}

TEST_CASE("theta norm identity and deformation bound without materializing") {
  Rng rng(Seed{64});
  const double t = 0.2;
  const double r = rho(t);
  for (std::size_t n : {6, 8}) {
    const CMatrix x = gaussian_matrix(Index{1} << n, rng);
    const ThetaExpectation e = cond_expect_theta(n, t, x);
    CHECK(e.value.size() == 0);
    const auto f = length_projections(n, x, 0).f;
    double s = 0;
    for (std::size_t i = 0; i <= n; ++i) s += std::pow(r, 2.0 * i) * std::pow(hs_norm(f[i]), 2);
    CHECK(e.formula_sq == doctest::Approx(s).epsilon(1e-12));
    CHECK(e.min_bound_slack >= -1e-9);
  }
}

TEST_CASE("almost commutation audit") {
  for (double t : {0.05, 0.1, 0.2}) {
    const WitnessFamily fam = build_witness_family(2, t);
    const AlmostCommuteAudit dense = almost_commute_audit(fam, true);
    const AlmostCommuteAudit local = almost_commute_audit(fam, false);
    CHECK(dense.all_ok);
    CHECK(local.all_ok);
    CHECK(dense.core_ok);
    CHECK(std::abs(dense.max_op - local.max_op) <= 1e-12);
    CHECK(std::abs(dense.max_hs - local.max_hs) <= 1e-12);
    CHECK(dense.max_op <= 4 * t + 1e-9);
    CHECK(dense.max_hs <= dense.max_op + 1e-9);
    // Independent dense evaluation of every commutator.
    double worst = 0;
    for (const CMatrix& u : fam.dense_u())
      for (const CMatrix& v : fam.dense_v()) worst = std::max(worst, op_norm_dense(u * v - v * u));
    CHECK(std::abs(worst - dense.max_op) <= 1e-12);
  }
  const WitnessFamily big = build_witness_family(8, 0.1);
  const AlmostCommuteAudit a = almost_commute_audit(big, false);
  CHECK(a.all_ok);
  CHECK(a.max_op <= 0.4 + 1e-9);
  CHECK_THROWS_AS(build_witness_family(11, 0.1), DomainError);
}

TEST_CASE("deformed generators are the theta images") {
  const std::size_t n = 2;
  const double t = 0.3;
  const WitnessFamily fam = build_witness_family(n, t);
  const auto deformed = fam.deformed_generators();
  REQUIRE(deformed.size() == 3 * n);
  for (std::size_t i = 0; i < deformed.size(); ++i) {
    const CMatrix plain = fam.v_generators[i].dense(n);
    CHECK(hs_norm(deformed[i].dense(n) - theta_apply(n, t, plain)) < 1e-12);
    CHECK(is_unitary(deformed[i].dense(n), 1e-12));
  }
}

TEST_CASE("binary entropy") {
  CHECK(entropy_h(0.5) == doctest::Approx(1.0));
  CHECK(entropy_h(0.25) == doctest::Approx(0.25 * 2 + 0.75 * std::log2(4.0 / 3.0)));
  CHECK_THROWS_AS(entropy_h(0.0), DomainError);
}

TEST_CASE("Hamming ball bound against direct binomial sums") {
  for (std::size_t n = 1; n <= 20; ++n)
    for (int s = 1; s <= 10; ++s) {
      const double delta = 0.05 * s;
      const HammingCheck h = hamming_bound_check(n, delta);
      std::uint64_t sum = 0;
      for (std::size_t i = 0; i <= n && static_cast<double>(i) <= delta * n + 1e-9; ++i) sum += binom(n, i);
      CHECK(h.sum == sum);
      CHECK(h.bound == doctest::Approx(std::pow(2.0, entropy_h(delta) * n)).epsilon(1e-12));
      CHECK(h.holds);
    }
  // Far beyond 64-bit range the big-integer sum stays exact.
  const HammingCheck large = hamming_bound_check(200, 0.5);
  CHECK(large.sum > boost::multiprecision::cpp_int(1) << 190);
  CHECK(large.holds);
}

TEST_CASE("diagonal expectation identity") {
  Rng rng(Seed{65});
  for (int i = 0; i < 30; ++i) {
    const std::size_t d = 64;
    std::vector<int> p(d), labels(d);
    const int cells = 1 + static_cast<int>(rng.below(8));
    for (std::size_t j = 0; j < d; ++j) {
      p[j] = static_cast<int>(rng.below(2));
      labels[j] = static_cast<int>(rng.below(static_cast<std::uint64_t>(cells)));
    }
    const DiagExpectCheck c = diag_expect_identity(p, labels);
    // Direct formula: sum over cells of tau(p q) tau((1-p) q) / tau(q).
    double f = 0;
    for (int cell = 0; cell < cells; ++cell) {
      double in = 0, out = 0;
      for (std::size_t j = 0; j < d; ++j)
        if (labels[j] == cell) (p[j] ? in : out) += 1.0 / d;
      if (in + out > 0) f += in * out / (in + out);
    }
    CHECK(c.formula_side == doctest::Approx(f).epsilon(1e-12));
    CHECK(c.residual <= 1e-12);
  }
}

TEST_CASE("dimension bounds and crossing") {
  const double t = 0.2, eps = 1.0 / 32;
  const DimBoundReport r = dim_bounds(100, t, eps);
  const double rr = rho(t);
  std::size_t l = 1;
  while (std::pow(rr, 2.0 * l) > 1 - 8 * eps) ++l;
  CHECK(r.l == l);
  CHECK(r.l_cap == doctest::Approx(64 * eps / (t * t) + 1));
  CHECK(static_cast<double>(r.l) <= r.l_cap);
  CHECK(r.log2_upper == doctest::Approx(1 + r.l_cap * std::log2(600.0)));
  CHECK(r.log2_lower == doctest::Approx(100 - entropy_h(4 * eps) * 100 - 3));
  CHECK_FALSE(r.crossed);

  const std::size_t n = crossing_search(t, eps, 5000);
  REQUIRE(n > 0);
  CHECK(dim_bounds(n, t, eps).crossed);
  CHECK_FALSE(dim_bounds(n - 1, t, eps).crossed);
  CHECK(crossing_search(t, eps, n - 1) == 0);

  CHECK_THROWS_AS(dim_bounds(10, 0.0, eps), DomainError);
  CHECK_THROWS_AS(dim_bounds(10, 1.0, eps), DomainError);
  CHECK_THROWS_AS(dim_bounds(10, t, 0.0625), DomainError);
}
