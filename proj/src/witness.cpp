#include "acnum/witness.hpp"

#include "acnum/subalgebra.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>

namespace acnum {

namespace {

// Bit of qubit q in an index over `qubits` qubits (qubit 0 is the top bit).
Index qubit_mask(std::size_t qubits, std::size_t q) {
  return Index{1} << (qubits - 1 - q);
}

Index pow_index(Index base, std::size_t e) {
  Index r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

// Pair space index a = 2 * (bit a_hi) + (bit a_lo).
std::array<Index, 4> pair_rows(Index base, Index hi, Index lo) {
  return {base, base | lo, base | hi, base | hi | lo};
}

// out = (u on the two bits) * x, acting on rows.
CMatrix left_pair(const CMatrix& x, const CMatrix& u, Index hi, Index lo) {
  CMatrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    if (r & (hi | lo)) continue;
    const auto idx = pair_rows(r, hi, lo);
    for (int a = 0; a < 4; ++a) {
      auto row = out.row(idx[static_cast<std::size_t>(a)]);
      row = u(a, 0) * x.row(idx[0]);
      for (int b = 1; b < 4; ++b) row += u(a, b) * x.row(idx[static_cast<std::size_t>(b)]);
    }
  }
  return out;
}

// Replace qubit q of y by its normalized partial trace times the identity.
CMatrix leg_average(const CMatrix& y, std::size_t qubits, std::size_t q) {
  const Index m = qubit_mask(qubits, q);
  CMatrix out = CMatrix::Zero(y.rows(), y.cols());
  for (Index c = 0; c < y.cols(); ++c) {
    if (c & m) continue;
    for (Index r = 0; r < y.rows(); ++r) {
      if (r & m) continue;
      const Complex s = 0.5 * (y(r, c) + y(r | m, c | m));
      out(r, c) = s;
      out(r | m, c | m) = s;
    }
  }
  return out;
}

double op_norm_exact(const CMatrix& x) {
  Eigen::JacobiSVD<CMatrix> svd(x);
  return svd.singularValues()(0);
}

}  // namespace

CMatrix x_ni(std::size_t n, std::size_t i) {
  if (n < 1 || i >= n) throw DimensionError("x_ni: qubit index out of range");
  const Index d = pow_index(2, n);
  const Index m = qubit_mask(n, i);
  CMatrix x = CMatrix::Zero(d, d);
  for (Index r = 0; r < d; ++r) x(r, r) = (r & m) ? -1.0 : 1.0;
  return x;
}

CMatrix singlet_projection() {
  CVector s = CVector::Zero(4);
  s(1) = M_SQRT1_2;   // e1 (x) e2
  s(2) = -M_SQRT1_2;  // e2 (x) e1
  return s * s.adjoint();
}

CMatrix u_t(double t) {
  const CMatrix p = singlet_projection();
  return p + std::polar(1.0, t) * (identity(4) - p);
}

double rho(double t) { return (1.0 + std::cos(t)) / 2.0; }

CMatrix theta_apply(std::size_t n, double t, const CMatrix& x) {
  if (n < 1 || n > kWitnessDenseCap) throw DomainError("theta_apply: n outside the dense cap");
  const Index d = pow_index(4, n);
  if (x.rows() != d || x.cols() != d) throw DimensionError("theta_apply: dimension must be 4^n");
  const CMatrix u = u_t(t);
  CMatrix y = x;
  for (std::size_t k = 0; k < n; ++k) {
    const Index hi = qubit_mask(2 * n, k);
    const Index lo = qubit_mask(2 * n, n + k);
    y = left_pair(y, u, hi, lo);
    y = left_pair(y.adjoint(), u, hi, lo).adjoint();
  }
  return y;
}

DeformResiduals deform_identity_checks(double t, const CMatrix& x, const CMatrix& y) {
  if (x.rows() != 2 || x.cols() != 2 || y.rows() != 2 || y.cols() != 2)
    throw DimensionError("deform_identity_checks: x and y must be 2x2");
  const CMatrix p = singlet_projection();
  const CMatrix u = u_t(t);
  const CMatrix one = identity(2);
  const CMatrix x1 = kron(x, one);
  DeformResiduals r;
  r.singlet_compression = hs_norm(p * x1 * p - normalized_trace(x) * p);
  const Complex lhs = normalized_trace(x1 * u * kron(y, one) * u.adjoint());
  const double rh = rho(t);
  const Complex rhs = rh * normalized_trace(x * y) + (1.0 - rh) * normalized_trace(x) * normalized_trace(y);
  r.trace_formula = std::abs(lhs - rhs);
  const CMatrix x0 = x - normalized_trace(x) * one;
  std::vector<CMatrix> span;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) span.push_back(u * kron(matrix_unit(2, i, j), one) * u.adjoint());
  const SubalgebraBasis d = SubalgebraBasis::from_spanning(4, span);
  const CMatrix x01 = kron(x0, one);
  r.expectation = hs_norm(d.project(x01) - rh * u * x01 * u.adjoint());
  return r;
}

LengthDecomposition length_projections(std::size_t n, const CMatrix& x, std::size_t l) {
  if (n < 1 || n > 2 * kWitnessLegLocalCap) throw DomainError("length_projections: n out of range");
  if (l > n) throw DomainError("length_projections: l out of range");
  const Index d = pow_index(2, n);
  if (x.rows() != d || x.cols() != d) throw DimensionError("length_projections: dimension must be 2^n");
  // After q legs, parts[c] holds the component with exactly c traceless legs
  // among the first q.
  std::vector<CMatrix> parts{x};
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<CMatrix> next(parts.size() + 1, CMatrix::Zero(d, d));
    for (std::size_t c = 0; c < parts.size(); ++c) {
      const CMatrix avg = leg_average(parts[c], n, q);
      next[c] += avg;
      next[c + 1] += parts[c] - avg;
    }
    parts = std::move(next);
  }
  LengthDecomposition out;
  out.f = std::move(parts);
  out.e_l = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i <= l; ++i) out.e_l += out.f[i];
  return out;
}

ThetaExpectation cond_expect_theta(std::size_t n, double t, const CMatrix& x) {
  const LengthDecomposition dec = length_projections(n, x, n);
  const double rh = rho(t);
  ThetaExpectation out;
  std::vector<double> sq;
  for (const CMatrix& f : dec.f) sq.push_back(std::pow(hs_norm(f), 2));
  for (std::size_t i = 0; i <= n; ++i) out.formula_sq += std::pow(rh, 2.0 * i) * sq[i];
  const double x_sq = std::pow(hs_norm(x), 2);
  out.min_bound_slack = std::numeric_limits<double>::infinity();
  double el_sq = sq[0];
  for (std::size_t l = 1; l <= n; ++l) {
    el_sq += sq[l];
    const double r2l = std::pow(rh, 2.0 * l);
    out.min_bound_slack = std::min(out.min_bound_slack, (1.0 - r2l) * el_sq + r2l * x_sq - out.formula_sq);
  }
  if (n <= kWitnessDenseCap) {
    const CMatrix one = identity(x.rows());
    out.value = CMatrix::Zero(x.rows() * x.rows(), x.rows() * x.rows());
    for (std::size_t i = 0; i <= n; ++i) {
      if (sq[i] == 0.0) continue;
      out.value += std::pow(rh, static_cast<double>(i)) * theta_apply(n, t, kron(dec.f[i], one));
    }
    out.norm_sq = std::pow(hs_norm(out.value), 2);
  }
  return out;
}

CMatrix PairLocalOperator::dense(std::size_t n) const {
  if (n > kWitnessDenseCap) throw DomainError("PairLocalOperator::dense: n above the dense cap");
  if (pair >= n) throw DimensionError("PairLocalOperator::dense: pair index out of range");
  const Index d = pow_index(4, n);
  const Index hi = qubit_mask(2 * n, pair);
  const Index lo = qubit_mask(2 * n, n + pair);
  CMatrix out = CMatrix::Zero(d, d);
  for (Index base = 0; base < d; ++base) {
    if (base & (hi | lo)) continue;
    const auto idx = pair_rows(base, hi, lo);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]) = local(a, b);
  }
  return out;
}

bool PairLocalOperator::is_diagonal() const {
  return (local - CMatrix(local.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
}

std::vector<PairLocalOperator> WitnessFamily::deformed_generators() const {
  const std::size_t half = v_generators.size() / 2;
  return {v_generators.begin() + static_cast<std::ptrdiff_t>(half), v_generators.end()};
}

std::vector<CMatrix> WitnessFamily::dense_u() const {
  std::vector<CMatrix> out;
  for (const auto& u : u_set) out.push_back(u.dense(params.n));
  return out;
}

std::vector<CMatrix> WitnessFamily::dense_v() const {
  std::vector<CMatrix> out;
  for (const auto& v : v_generators) out.push_back(v.dense(params.n));
  return out;
}

WitnessFamily build_witness_family(std::size_t n, double t) {
  if (n < 1 || n > kWitnessLegLocalCap) throw DomainError("build_witness_family: n outside [1, 10]");
  WitnessFamily f;
  f.params = {n, t};
  f.legs = TensorLegs::qubits(2 * n);
  const CMatrix one = identity(2);
  const CMatrix zl = kron(pauli_z(), one);
  const CMatrix xr = kron(one, pauli_x());
  const CMatrix zr = kron(one, pauli_z());
  const CMatrix u = u_t(t);
  for (std::size_t i = 0; i < n; ++i) f.u_set.push_back({i, zl, "sz_L" + std::to_string(i)});
  std::vector<PairLocalOperator> g;
  for (std::size_t i = 0; i < n; ++i) g.push_back({i, zl, "sz_L" + std::to_string(i)});
  for (std::size_t i = 0; i < n; ++i) g.push_back({i, xr, "sx_R" + std::to_string(i)});
  for (std::size_t i = 0; i < n; ++i) g.push_back({i, zr, "sz_R" + std::to_string(i)});
  f.v_generators = g;
  for (const auto& op : g) f.v_generators.push_back({op.pair, u * op.local * u.adjoint(), "theta(" + op.label + ")"});
  return f;
}

AlmostCommuteAudit almost_commute_audit(const WitnessFamily& family, bool dense) {
  const std::size_t n = family.params.n;
  const double bound = 4.0 * std::abs(family.params.t);
  AlmostCommuteAudit a;
  a.dense = dense && n <= kWitnessDenseCap;
  a.records.reserve(family.u_set.size() * family.v_generators.size());
  for (std::size_t vi = 0; vi < family.v_generators.size(); ++vi) {
    const PairLocalOperator& v = family.v_generators[vi];
    CMatrix dv;
    if (a.dense) dv = v.dense(n);
    for (std::size_t ui = 0; ui < family.u_set.size(); ++ui) {
      const PairLocalOperator& u = family.u_set[ui];
      CommutatorRecord rec;
      rec.u_index = ui;
      rec.v_index = vi;
      rec.bound_4t = bound;
      if (a.dense) {
        // u is diagonal: [u, v]_ab = (u_a - u_b) v_ab.
        const CVector ud = u.dense(n).diagonal();
        CMatrix c(dv.rows(), dv.cols());
        for (Index col = 0; col < c.cols(); ++col)
          for (Index row = 0; row < c.rows(); ++row) c(row, col) = (ud(row) - ud(col)) * dv(row, col);
        rec.comm_hs = hs_norm(c);
        rec.comm_op = rec.comm_hs == 0.0 ? 0.0 : op_norm(c);
      } else if (u.pair == v.pair) {
        const CMatrix c = commutator(u.local, v.local);
        rec.comm_hs = hs_norm(c);
        rec.comm_op = op_norm_exact(c);
      }
      rec.ok = rec.comm_op <= bound + 1e-9 && rec.comm_hs <= rec.comm_op + 1e-9;
      a.max_hs = std::max(a.max_hs, rec.comm_hs);
      a.max_op = std::max(a.max_op, rec.comm_op);
      a.records.push_back(rec);
    }
  }
  const CMatrix s = kron(pauli_z(), identity(2));
  const CMatrix ut = u_t(family.params.t);
  a.core_norm = op_norm_exact(s - ut * s * ut.adjoint());
  a.core_ok = a.core_norm <= 2.0 * std::abs(family.params.t) + 1e-9;
  a.all_ok = a.core_ok && std::all_of(a.records.begin(), a.records.end(), [](const auto& r) { return r.ok; });
  return a;
}

double entropy_h(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("entropy_h: delta must lie in (0, 1)");
  return -delta * std::log2(delta) - (1.0 - delta) * std::log2(1.0 - delta);
}

HammingCheck hamming_bound_check(std::size_t n, double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) throw DomainError("hamming_bound_check: delta must lie in (0, 1/2]");
  // Grid values such as 0.15 * 20 land a hair below the integer in binary.
  const auto top = static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
  HammingCheck h;
  boost::multiprecision::cpp_int binom = 1;
  for (std::size_t i = 0; i <= top && i <= n; ++i) {
    h.sum += binom;
    binom = binom * (n - i) / (i + 1);
  }
  h.bound = std::pow(2.0, entropy_h(delta) * static_cast<double>(n));
  h.holds = h.sum.convert_to<long double>() <= static_cast<long double>(h.bound);
  return h;
}

DiagExpectCheck diag_expect_identity(const std::vector<int>& p_diag, const std::vector<int>& labels) {
  if (p_diag.size() != labels.size() || labels.empty())
    throw DimensionError("diag_expect_identity: p and labels must have the same positive length");
  const Index d = static_cast<Index>(labels.size());
  CMatrix p = CMatrix::Zero(d, d);
  struct Cell {
    double in = 0.0, out = 0.0;
  };
  std::map<int, Cell> cells;
  for (Index i = 0; i < d; ++i) {
    const int v = p_diag[static_cast<std::size_t>(i)];
    if (v != 0 && v != 1) throw DomainError("diag_expect_identity: p must be a 0/1 diagonal");
    p(i, i) = v;
    Cell& c = cells[labels[static_cast<std::size_t>(i)]];
    (v ? c.in : c.out) += 1.0 / static_cast<double>(d);
  }
  DiagExpectCheck r;
  const SubalgebraBasis c = SubalgebraBasis::diagonal_partition(labels);
  r.projection_side = std::pow(hs_norm(p - c.project(p)), 2);
  for (const auto& [label, cell] : cells) r.formula_side += cell.in * cell.out / (cell.in + cell.out);
  r.residual = std::abs(r.projection_side - r.formula_side);
  return r;
}

DimBoundReport dim_bounds(std::size_t n, double t, double eps) {
  if (n < 1) throw DomainError("dim_bounds: n must be positive");
  if (!(t > 0.0 && t <= M_PI / 4.0)) throw DomainError("dim_bounds: t must lie in (0, pi/4]");
  if (!(eps > 0.0 && eps < 1.0 / 16.0)) throw DomainError("dim_bounds: eps must lie in (0, 1/16)");
  DimBoundReport r;
  r.n = n;
  r.t = t;
  r.eps = eps;
  const double rh = rho(t);
  const double target = 1.0 - 8.0 * eps;
  // Start from the logarithmic estimate and settle on the least l exactly.
  auto ok = [&](std::size_t l) { return std::pow(rh, 2.0 * static_cast<double>(l)) <= target; };
  std::size_t l = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(target) / (2.0 * std::log(rh)))));
  while (l > 1 && ok(l - 1)) --l;
  while (!ok(l)) ++l;
  r.l = l;
  r.l_cap = 64.0 * eps / (t * t) + 1.0;
  r.log2_upper = 1.0 + r.l_cap * std::log2(6.0 * static_cast<double>(n));
  r.log2_lower = static_cast<double>(n) * (1.0 - entropy_h(4.0 * eps)) - 3.0;
  r.crossed = r.log2_lower > r.log2_upper;
  return r;
}

std::size_t crossing_search(double t, double eps, std::size_t n_max) {
  for (std::size_t n = 1; n <= n_max; ++n)
    if (dim_bounds(n, t, eps).crossed) return n;
  return 0;
}

}  // namespace acnum
