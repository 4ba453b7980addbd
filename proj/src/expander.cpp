#include "acnum/expander.hpp"

#include "acnum/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acnum {

UnitaryTuple UnitaryTuple::make(std::vector<CMatrix> members, double tol) {
  if (members.empty()) throw DimensionError("UnitaryTuple: empty tuple");
  const Index d = members.front().rows();
  for (const CMatrix& m : members) {
    require_square(m, "UnitaryTuple");
    if (m.rows() != d) throw DimensionError("UnitaryTuple: members differ in dimension");
    if (!is_unitary(m, tol)) throw DomainError("UnitaryTuple: member is not unitary");
  }
  return UnitaryTuple{d, std::move(members)};
}

CMatrix moment_apply(const UnitaryTuple& u, const CMatrix& x) {
  if (x.rows() != u.dim || x.cols() != u.dim) throw DimensionError("moment_apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(u.dim, u.dim);
  for (const CMatrix& m : u.members) out.noalias() += m * x * m.adjoint();
  return out;
}

CMatrix moment_apply_adjoint(const UnitaryTuple& u, const CMatrix& x) {
  if (x.rows() != u.dim || x.cols() != u.dim) throw DimensionError("moment_apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(u.dim, u.dim);
  for (const CMatrix& m : u.members) out.noalias() += m.adjoint() * x * m;
  return out;
}

namespace {

void remove_trace(CMatrix& x) {
  const Complex t = normalized_trace(x);
  x.diagonal().array() -= t;
}

}  // namespace

RestrictedNorm restricted_norm(const UnitaryTuple& u, double tol, Seed seed, int starts) {
  if (!(tol > 0.0)) throw DomainError("restricted_norm: tol must be positive");
  if (starts < 1) throw DomainError("restricted_norm: need at least one start");
  const Index d = u.dim;
  RestrictedNorm out;
  if (d == 1) return out;  // the traceless subspace is {0}
  const LinearOperator gram = [&](const CVector& v) {
    CMatrix x = unvec(v, d);
    remove_trace(x);
    CMatrix y = moment_apply(u, x);
    remove_trace(y);
    CMatrix z = moment_apply_adjoint(u, y);
    remove_trace(z);
    return vec(z);
  };
  Rng rng(seed);
  for (int s = 0; s < starts; ++s) {
    CMatrix x0 = gaussian_matrix(d, rng);
    remove_trace(x0);
    const KrylovResult k = top_eigenvalue(gram, vec(x0), tol);
    const double value = std::sqrt(std::max(0.0, k.value));
    if (value > out.value) out.value = value;
    out.residual = std::max(out.residual, k.residual);
    out.iterations += k.iterations;
  }
  return out;
}

GapSearchResult find_gap_pair(Index n, double eps, int max_trials, Seed seed, double tol) {
  if (n < 2) throw DimensionError("find_gap_pair: n must be at least 2");
  const double threshold = 2.0 * std::sqrt(2.0) + 2.0 * eps;
  if (!(eps > 0.0) || !(threshold < 3.0)) throw DomainError("find_gap_pair: need eps > 0 and 2sqrt2 + 2eps < 3");
  if (max_trials < 1) throw DomainError("find_gap_pair: max_trials must be positive");

  struct Trial {
    CMatrix p1, p2;
    RestrictedNorm norm;
  };
  GapSearchResult res;
  res.best_norm = std::numeric_limits<double>::infinity();
  const std::size_t batch = std::max<std::size_t>(1, worker_count());
  for (std::size_t first = 0; first < static_cast<std::size_t>(max_trials); first += batch) {
    const std::size_t count = std::min(batch, static_cast<std::size_t>(max_trials) - first);
    std::vector<Trial> trials(count);
    parallel_for(count, [&](std::size_t j) {
      const Seed s = seed.child(first + j);
      Rng rng(s);
      const CMatrix a = haar_unitary(n, rng);
      const CMatrix b = haar_unitary(n, rng);
      const CMatrix w = haar_unitary(n, rng);
      Trial& t = trials[j];
      t.p1 = w.adjoint() * a;
      t.p2 = w.adjoint() * b;
      t.norm = restricted_norm(UnitaryTuple{n, {t.p1, t.p2, identity(n)}}, tol, s.child(0x6e6f726dULL));
    });
    for (std::size_t j = 0; j < count; ++j) {
      const Trial& t = trials[j];
      res.trials_used = static_cast<int>(first + j + 1);
      res.best_norm = std::min(res.best_norm, t.norm.value);
      if (t.norm.value <= threshold) {
        res.found = true;
        res.u1 = t.p1;
        res.u2 = t.p2;
        res.best_norm = t.norm.value;
        res.certificate.restricted_norm_value = t.norm.value;
        res.certificate.kappa = 1.0 / (3.0 - t.norm.value);
        res.certificate.trials = res.trials_used;
        res.certificate.max_residual = t.norm.residual;
        return res;
      }
    }
  }
  res.failure = "no trial reached restricted norm <= 2sqrt2 + 2eps";
  return res;
}

CertificateCheck gap_certificate_check(const CMatrix& u1, const CMatrix& u2, double kappa,
                                       std::size_t trials, Seed seed) {
  require_same_dim(u1, u2, "gap_certificate_check");
  const Index d = u1.rows();
  std::vector<CMatrix> xs{u1, u2, u2.adjoint() * u1};
  const Index units = std::min<Index>(d, 8);
  for (Index i = 0; i < units; ++i)
    for (Index j = 0; j < units; ++j) xs.push_back(matrix_unit(d, i, j));
  Rng rng(seed);
  for (std::size_t s = 0; s < trials; ++s) {
    CMatrix x = gaussian_matrix(d, rng);
    remove_trace(x);
    xs.push_back(std::move(x));
  }
  CertificateCheck c;
  c.worst_margin = std::numeric_limits<double>::infinity();
  for (const CMatrix& x : xs) {
    CMatrix centered = x;
    remove_trace(centered);
    const double lhs = hs_norm(centered);
    const double comm = hs_norm(commutator(u1, x)) + hs_norm(commutator(u2, x));
    const double margin = kappa * comm - lhs;
    c.worst_margin = std::min(c.worst_margin, margin);
    if (margin < -1e-9) ++c.violations;
    if (comm > 0.0) c.tightest_kappa = std::max(c.tightest_kappa, lhs / comm);
    ++c.samples;
  }
  return c;
}

bool gap_hypothesis_holds(const CMatrix& u1, const CMatrix& u2, double kappa, double tol) {
  if (!is_unitary(u1, 1e-10) || !is_unitary(u2, 1e-10) || u1.rows() != u2.rows()) return false;
  const Index d = u1.rows();
  const RestrictedNorm r = restricted_norm(UnitaryTuple{d, {u1, u2, identity(d)}}, tol);
  if (!(r.value < 3.0)) return false;
  return kappa >= 1.0 / (3.0 - r.value) * (1.0 - 1e-9);
}

CornerCheck corner_check(const CMatrix& u1, const CMatrix& u2, double kappa, const CMatrix& v,
                         const CMatrix& x) {
  require_same_dim(u1, x, "corner_check");
  require_same_dim(v, x, "corner_check");
  CornerCheck c;
  c.lhs = hs_norm(x);
  c.rhs = 1e5 * std::pow(kappa, 6) * (hs_norm(u1 * x * v - x) + hs_norm(u2 * x * v - x));
  c.margin = c.rhs - c.lhs;
  c.hypothesis_verified = gap_hypothesis_holds(u1, u2, kappa);
  c.holds = c.hypothesis_verified && c.margin >= -1e-9;
  return c;
}

}  // namespace acnum
