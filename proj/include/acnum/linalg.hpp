// linalg.hpp - dense complex matrix kernel: normalized trace and norms,
// Kronecker placements, Hermitian functional calculus, polar decomposition,
// unitary logarithm, nullspaces and Krylov eigenvalue estimates.
//
// All matrices are square unless stated otherwise. The trace is normalized
// (tau(1) = 1) and the Hilbert-Schmidt norm is the one induced by it, so
// ||u||_2 = 1 for every unitary u regardless of dimension.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acnum {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Ordered leg dimensions of a tensor factorization. Leg 0 is the outermost
/// Kronecker factor, so a matrix kron(a0, a1, ...) has a0 acting on leg 0.
struct TensorLegs {
  std::vector<Index> dims;

  TensorLegs() = default;
  explicit TensorLegs(std::vector<Index> d);

  Index total() const;
  std::size_t size() const { return dims.size(); }
  /// Distance in the flat index between consecutive values of leg `leg`.
  Index stride(std::size_t leg) const;

  static TensorLegs qubits(std::size_t count);
};

void require_square(const CMatrix& x, const std::string& what);
void require_same_dim(const CMatrix& a, const CMatrix& b, const std::string& what);
bool all_finite(const CMatrix& x);
bool is_unitary(const CMatrix& u, double tol = 1e-10);
bool is_hermitian(const CMatrix& h, double tol = 1e-10);
CMatrix identity(Index dim);

Complex normalized_trace(const CMatrix& x);
/// tau(x^* y); conjugate-linear in the first argument.
Complex hs_inner(const CMatrix& x, const CMatrix& y);
double hs_norm(const CMatrix& x);
/// tau(|x|), computed from the eigenvalues of x^* x.
double trace_norm(const CMatrix& x);

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iterations = 100000;
  int restarts = 3;
};

/// Largest singular value by power iteration on x^* x. Starts are the
/// all-ones vector followed by fixed-seed Gaussian vectors; the maximum over
/// starts is returned.
double op_norm(const CMatrix& x, const PowerIterationOptions& opts = {});
double op_norm(const CMatrix& x, double tol);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(std::span<const CMatrix> factors);
/// 1 (x) ... (x) x (x) ... (x) 1 with x placed on `position`.
CMatrix embed_leg(const CMatrix& x, const TensorLegs& legs, std::size_t position);
CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// f(h) for Hermitian h (the anti-Hermitian part is discarded).
CMatrix hermitian_function(const CMatrix& h, const std::function<Complex(double)>& f);
/// (x^* x)^{1/2}
CMatrix abs_value(const CMatrix& x);
/// exp(i * scale * h) for Hermitian h.
CMatrix exp_i_hermitian(const CMatrix& h, double scale);

/// Unitary factor u of x = u |x|. On ker(x) the singular vectors are paired in
/// index order, so the completion is deterministic.
CMatrix polar_unitary(const CMatrix& x);

/// Hermitian h with spectrum in (-1/2, 1/2] and exp(2 pi i h) = u.
/// The eigenvalue -1 maps to +1/2.
CMatrix unitary_log(const CMatrix& u, double unitarity_tol = 1e-10);

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix matrix_unit(Index dim, Index row, Index col);

/// Orthonormal basis (columns) of ker(a). Singular values at or below
/// rel_tol * sigma_max count as zero. Tall inputs are QR-reduced first.
CMatrix nullspace(const CMatrix& a, double rel_tol = 1e-10);

/// Orthonormalizes the columns of `vectors` against an existing orthonormal
/// set, keeping only directions whose residual exceeds rel_tol times the
/// original norm. Two passes of modified Gram-Schmidt.
class OrthonormalSet {
 public:
  explicit OrthonormalSet(Index ambient, double rel_tol = 1e-10);

  /// Returns true when v contributed a new direction.
  bool add(const CVector& v);
  Index size() const { return static_cast<Index>(columns_.size()); }
  Index ambient() const { return ambient_; }
  const CVector& column(Index i) const { return columns_[static_cast<std::size_t>(i)]; }
  CMatrix matrix() const;

 private:
  Index ambient_;
  double rel_tol_;
  std::vector<CVector> columns_;
};

using LinearOperator = std::function<CVector(const CVector&)>;

struct KrylovResult {
  double value = 0.0;
  double residual = 0.0;  // ||A y - theta y|| for the returned Ritz pair
  int iterations = 0;
  CVector vector;
};

/// Largest eigenvalue of a Hermitian operator by Lanczos with full
/// reorthogonalization, restarted from the current Ritz vector when
/// `max_krylov` steps do not reach residual <= tol * |theta|.
KrylovResult top_eigenvalue(const LinearOperator& apply, const CVector& start,
                            double tol = 1e-12, int max_krylov = 200,
                            int max_restarts = 50);

// Column-major vectorization, matching Eigen storage: vec(x)[i + n j] = x(i, j).
CVector vec(const CMatrix& x);
CMatrix unvec(const CVector& v, Index dim);

}  // namespace acnum
