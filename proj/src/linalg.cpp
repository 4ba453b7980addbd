#include "acnum/linalg.hpp"

#include "acnum/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acnum {

TensorLegs::TensorLegs(std::vector<Index> d) : dims(std::move(d)) {
  for (Index leg : dims)
    if (leg < 1) throw DimensionError("TensorLegs: leg dimensions must be positive");
}

Index TensorLegs::total() const {
  Index t = 1;
  for (Index d : dims) t *= d;
  return t;
}

Index TensorLegs::stride(std::size_t leg) const {
  if (leg >= dims.size()) throw DimensionError("TensorLegs::stride: leg out of range");
  Index s = 1;
  for (std::size_t k = leg + 1; k < dims.size(); ++k) s *= dims[k];
  return s;
}

TensorLegs TensorLegs::qubits(std::size_t count) {
  return TensorLegs(std::vector<Index>(count, 2));
}

void require_square(const CMatrix& x, const std::string& what) {
  if (x.rows() != x.cols() || x.rows() < 1)
    throw DimensionError(what + ": expected a non-empty square matrix");
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const std::string& what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows()) throw DimensionError(what + ": dimension mismatch");
}

bool all_finite(const CMatrix& x) { return x.allFinite(); }

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const CMatrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CMatrix identity(Index dim) { return CMatrix::Identity(dim, dim); }

Complex normalized_trace(const CMatrix& x) {
  require_square(x, "normalized_trace");
  return x.trace() / static_cast<double>(x.rows());
}

Complex hs_inner(const CMatrix& x, const CMatrix& y) {
  require_same_dim(x, y, "hs_inner");
  // tau(x^* y) = (1/n) sum conj(x_ij) y_ij
  return x.conjugate().cwiseProduct(y).sum() / static_cast<double>(x.rows());
}

double hs_norm(const CMatrix& x) {
  require_square(x, "hs_norm");
  return x.norm() / std::sqrt(static_cast<double>(x.rows()));
}

double trace_norm(const CMatrix& x) {
  require_square(x, "trace_norm");
  // Singular values directly: sqrt of eigenvalues of x^* x turns 1e-16 into 1e-8.
  const Eigen::BDCSVD<CMatrix> svd(x);
  if (svd.info() != Eigen::Success) throw ConvergenceError("trace_norm: SVD failed");
  return svd.singularValues().sum() / static_cast<double>(x.rows());
}

namespace {

template <typename Mat>
double power_iterate(const Mat& x, const PowerIterationOptions& opts) {
  const Index n = x.cols();
  double best = 0.0;
  for (int start = 0; start < std::max(1, opts.restarts); ++start) {
    CVector v;
    if (start == 0) {
      v = CVector::Ones(n);
    } else {
      Rng rng(Seed{0x5eedULL + static_cast<std::uint64_t>(start)});
      v = gaussian_vector(n, rng);
    }
    v.normalize();
    double prev = -1.0;
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      const CVector w = x * v;
      const double lambda = w.squaredNorm();
      if (lambda == 0.0) {
        converged = true;
        prev = 0.0;
        break;
      }
      CVector next = x.adjoint() * w;
      const double nn = next.norm();
      if (nn == 0.0) {
        converged = true;
        prev = lambda;
        break;
      }
      v = next / nn;
      if (prev >= 0.0 && std::abs(lambda - prev) <= 2.0 * opts.tol * lambda) {
        prev = lambda;
        converged = true;
        break;
      }
      prev = lambda;
    }
    if (!converged) throw ConvergenceError("op_norm: power iteration did not converge");
    best = std::max(best, std::sqrt(std::max(prev, 0.0)));
  }
  return best;
}

}  // namespace

double op_norm(const CMatrix& x, const PowerIterationOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("op_norm: tol must be positive");
  if (x.size() == 0) return 0.0;
  if (x.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Index nnz = (x.array() != Complex(0.0, 0.0)).count();
  if (x.rows() >= 128 && nnz * 10 < x.size()) {
    Eigen::SparseMatrix<Complex> sp = x.sparseView();
    sp.makeCompressed();
    return power_iterate(sp, opts);
  }
  return power_iterate(x, opts);
}

double op_norm(const CMatrix& x, double tol) {
  PowerIterationOptions o;
  o.tol = tol;
  return op_norm(x, o);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Index p = b.rows(), q = b.cols();
  CMatrix out(a.rows() * p, a.cols() * q);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * p, j * q, p, q) = a(i, j) * b;
  return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const CMatrix& f : factors) out = kron(out, f);
  return out;
}

CMatrix embed_leg(const CMatrix& x, const TensorLegs& legs, std::size_t position) {
  require_square(x, "embed_leg");
  if (position >= legs.size()) throw DimensionError("embed_leg: position out of range");
  if (x.rows() != legs.dims[position])
    throw DimensionError("embed_leg: matrix does not match leg dimension");
  Index left = 1;
  for (std::size_t k = 0; k < position; ++k) left *= legs.dims[k];
  const Index right = legs.stride(position);
  return kron(kron(identity(left), x), identity(right));
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

CMatrix hermitian_function(const CMatrix& h, const std::function<Complex(double)>& f) {
  require_square(h, "hermitian_function");
  const CMatrix sym = (h + h.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  if (es.info() != Eigen::Success) throw ConvergenceError("hermitian_function: eigensolver failed");
  CVector fd(sym.rows());
  for (Index i = 0; i < fd.size(); ++i) fd(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * fd.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix abs_value(const CMatrix& x) {
  return hermitian_function(x.adjoint() * x,
                            [](double l) { return Complex(std::sqrt(std::max(0.0, l)), 0.0); });
}

CMatrix exp_i_hermitian(const CMatrix& h, double scale) {
  return hermitian_function(h, [scale](double l) { return std::polar(1.0, scale * l); });
}

CMatrix polar_unitary(const CMatrix& x) {
  require_square(x, "polar_unitary");
  Eigen::BDCSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMatrix unitary_log(const CMatrix& u, double unitarity_tol) {
  require_square(u, "unitary_log");
  if (!is_unitary(u, unitarity_tol)) throw DomainError("unitary_log: input is not unitary");
  Eigen::ComplexSchur<CMatrix> schur(u);
  if (schur.info() != Eigen::Success) throw ConvergenceError("unitary_log: Schur failed");
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();
  CVector phases(u.rows());
  for (Index i = 0; i < phases.size(); ++i) {
    double theta = std::arg(t(i, i)) / (2.0 * std::numbers::pi);
    if (theta <= -0.5) theta += 1.0;
    phases(i) = theta;
  }
  CMatrix h = q * phases.asDiagonal() * q.adjoint();
  return (h + h.adjoint()) * 0.5;
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

CMatrix matrix_unit(Index dim, Index row, Index col) {
  if (row < 0 || col < 0 || row >= dim || col >= dim)
    throw DimensionError("matrix_unit: index out of range");
  CMatrix m = CMatrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return m;
}

CMatrix nullspace(const CMatrix& a, double rel_tol) {
  const Index cols = a.cols();
  if (cols == 0) return CMatrix(0, 0);
  CMatrix square;
  if (a.rows() > cols) {
    Eigen::HouseholderQR<CMatrix> qr(a);
    square = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  } else {
    square = CMatrix::Zero(cols, cols);
    square.topRows(a.rows()) = a;
  }
  Eigen::BDCSVD<CMatrix> svd(square, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  Index rank = 0;
  if (top > 0.0)
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * top) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

OrthonormalSet::OrthonormalSet(Index ambient, double rel_tol)
    : ambient_(ambient), rel_tol_(rel_tol) {}

bool OrthonormalSet::add(const CVector& v) {
  if (v.size() != ambient_) throw DimensionError("OrthonormalSet::add: wrong vector length");
  const double original = v.norm();
  if (original == 0.0) return false;
  CVector r = v;
  for (int pass = 0; pass < 2; ++pass)
    for (const CVector& c : columns_) r -= c.dot(r) * c;
  const double left = r.norm();
  if (left <= rel_tol_ * original) return false;
  columns_.push_back(r / left);
  return true;
}

CMatrix OrthonormalSet::matrix() const {
  CMatrix m(ambient_, size());
  for (Index i = 0; i < size(); ++i) m.col(i) = columns_[static_cast<std::size_t>(i)];
  return m;
}

KrylovResult top_eigenvalue(const LinearOperator& apply, const CVector& start, double tol,
                            int max_krylov, int max_restarts) {
  if (!(tol > 0.0)) throw DomainError("top_eigenvalue: tol must be positive");
  const Index n = start.size();
  const int m_cap = static_cast<int>(std::min<Index>(n, std::max(2, max_krylov)));
  KrylovResult best;
  CVector q0 = start;
  if (q0.norm() == 0.0) throw DomainError("top_eigenvalue: zero start vector");
  int total = 0;
  for (int restart = 0; restart <= max_restarts; ++restart) {
    std::vector<CVector> basis;
    std::vector<double> alpha, beta;
    basis.push_back(q0.normalized());
    CVector w;
    bool exhausted = false;
    for (int j = 0; j < m_cap; ++j) {
      w = apply(basis.back());
      ++total;
      const double a = basis.back().dot(w).real();
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        for (const CVector& b : basis) w -= b.dot(w) * b;
      const double bnorm = w.norm();
      if (bnorm <= 1e-14 * std::max(1.0, std::abs(a)) ||
          static_cast<Index>(basis.size()) == n) {
        exhausted = true;
        beta.push_back(bnorm);
        break;
      }
      beta.push_back(bnorm);
      if (j + 1 < m_cap) basis.push_back(w / bnorm);
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Index top = m - 1;
    const double theta = es.eigenvalues()(top);
    const Eigen::VectorXd y = es.eigenvectors().col(top);
    CVector ritz = CVector::Zero(n);
    for (int i = 0; i < m; ++i) ritz += y(i) * basis[static_cast<std::size_t>(i)];
    ritz.normalize();
    const CVector r = apply(ritz) - theta * ritz;
    ++total;
    best.value = theta;
    best.residual = r.norm();
    best.vector = ritz;
    best.iterations = total;
    if (exhausted || best.residual <= tol * std::max(std::abs(theta), 1e-300)) return best;
    q0 = ritz;
  }
  throw ConvergenceError("top_eigenvalue: Lanczos did not converge");
}

CVector vec(const CMatrix& x) {
  return Eigen::Map<const CVector>(x.data(), x.size());
}

CMatrix unvec(const CVector& v, Index dim) {
  if (v.size() != dim * dim) throw DimensionError("unvec: length is not dim^2");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

}  // namespace acnum
