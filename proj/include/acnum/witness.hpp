// witness.hpp - qubit-chain witness of almost commuting unitaries that stay
// far from commuting ones, with its deformation identities and dimension
// bounds.
//
// M_n is the n-qubit algebra (dim 2^n). M_n (x) M_n has legs
// (L_0..L_{n-1}, R_0..R_{n-1}), L_0 outermost; qubit q of a 2^N-dim index is
// bit N-1-q. The deformation pairs leg L_k with R_k (interleaving) and
// conjugates each pair by u_t = P + e^{it}(1 - P), P the singlet projection,
// with L_k as the outer factor of the 4-dim pair space.

#pragma once

#include "acnum/linalg.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace acnum {

inline constexpr std::size_t kWitnessDenseCap = 5;
inline constexpr std::size_t kWitnessLegLocalCap = 10;

struct WitnessParams {
  std::size_t n = 1;
  double t = 0.0;
};

/// sigma_z on qubit i (0-based) of M_n.
CMatrix x_ni(std::size_t n, std::size_t i);
CMatrix singlet_projection();
CMatrix u_t(double t);
double rho(double t);

/// Conjugation of every pair (L_k, R_k) by u_t, applied leg-locally to a
/// 4^n-dim matrix.
CMatrix theta_apply(std::size_t n, double t, const CMatrix& x);

struct DeformResiduals {
  double singlet_compression = 0.0;  // ||P (x(x)1) P - tau(x) P||_2
  double trace_formula = 0.0;        // |tau((x(x)1) u (y(x)1) u^*) - rho tau(xy) - (1-rho) tau(x) tau(y)|
  double expectation = 0.0;          // ||E(x0 (x) 1) - rho u (x0(x)1) u^*||_2, x0 = x - tau(x)
};

/// The expectation onto u_t (M_2 (x) 1) u_t^* is computed by the generic
/// subalgebra projection, independently of the closed form.
DeformResiduals deform_identity_checks(double t, const CMatrix& x, const CMatrix& y);

struct LengthDecomposition {
  std::vector<CMatrix> f;  // f[i]: component of tensor length exactly i
  CMatrix e_l;             // sum_{i <= l} f[i]
};

/// Generating-function sweep over the qubits: each leg splits into its
/// scalar part and traceless part.
LengthDecomposition length_projections(std::size_t n, const CMatrix& x, std::size_t l);

struct ThetaExpectation {
  CMatrix value;          // E(x (x) 1) onto theta(M_n (x) 1); empty above the dense cap
  double norm_sq = 0.0;   // ||value||_2^2 when materialized
  double formula_sq = 0.0;  // sum rho^{2i} ||f_i(x)||^2
  /// Deformation bound slack min over l of
  /// (1-rho^{2l}) ||e_l x||^2 + rho^{2l} ||x||^2 - formula_sq.
  double min_bound_slack = 0.0;
};

ThetaExpectation cond_expect_theta(std::size_t n, double t, const CMatrix& x);

/// A unitary supported on one pair (L_k, R_k): local (x) identity.
struct PairLocalOperator {
  std::size_t pair = 0;
  CMatrix local;  // 4x4
  std::string label;

  CMatrix dense(std::size_t n) const;
  bool is_diagonal() const;
};

struct WitnessFamily {
  WitnessParams params;
  TensorLegs legs;
  std::vector<PairLocalOperator> u_set;  // sigma_z on L_i
  /// Undeformed generators (sigma_z on L_i, sigma_x on R_i, sigma_z on R_i)
  /// followed by their deformed images in the same order.
  std::vector<PairLocalOperator> v_generators;

  std::vector<PairLocalOperator> deformed_generators() const;
  std::vector<CMatrix> dense_u() const;
  std::vector<CMatrix> dense_v() const;
};

/// Throws DomainError above the leg-local cap.
WitnessFamily build_witness_family(std::size_t n, double t);

struct CommutatorRecord {
  std::size_t u_index = 0;
  std::size_t v_index = 0;
  double comm_hs = 0.0;
  double comm_op = 0.0;
  double bound_4t = 0.0;
  bool ok = false;
};

struct AlmostCommuteAudit {
  std::vector<CommutatorRecord> records;
  double max_hs = 0.0;
  double max_op = 0.0;
  double core_norm = 0.0;  // ||(s(x)1) - u_t (s(x)1) u_t^*|| in dim 4
  bool core_ok = false;
  bool all_ok = false;
  bool dense = false;
};

/// Dense evaluation (diagonal fast path for [U,V]) up to the dense cap when
/// `dense` is set, leg-local evaluation otherwise.
AlmostCommuteAudit almost_commute_audit(const WitnessFamily& family, bool dense = true);

double entropy_h(double delta);

struct HammingCheck {
  boost::multiprecision::cpp_int sum;
  double bound = 0.0;
  bool holds = false;
};

/// sum_{i <= floor(delta n)} C(n, i) against 2^{H(delta) n}, delta in (0, 1/2].
HammingCheck hamming_bound_check(std::size_t n, double delta);

struct DiagExpectCheck {
  double projection_side = 0.0;  // ||p - E_C(p)||_2^2 via the generic projection
  double formula_side = 0.0;     // sum_j tau(p q_j) tau((1-p) q_j) / tau(q_j)
  double residual = 0.0;
};

/// p: 0/1 diagonal; labels: partition cell of each coordinate.
DiagExpectCheck diag_expect_identity(const std::vector<int>& p_diag, const std::vector<int>& labels);

struct DimBoundReport {
  std::size_t n = 0;
  double t = 0.0;
  double eps = 0.0;
  std::size_t l = 0;           // least l >= 1 with rho^{2l} <= 1 - 8 eps
  double l_cap = 0.0;          // 64 eps / t^2 + 1
  double log2_upper = 0.0;     // log2 of 2 (6n)^{l_cap}
  double log2_lower = 0.0;     // n - H(4 eps) n - 3
  bool crossed = false;        // lower > upper
};

/// Throws DomainError unless t in (0, pi/4] and eps in (0, 1/16).
DimBoundReport dim_bounds(std::size_t n, double t, double eps);
/// Least n <= n_max with lower > upper; 0 when none.
std::size_t crossing_search(double t, double eps, std::size_t n_max);

}  // namespace acnum
