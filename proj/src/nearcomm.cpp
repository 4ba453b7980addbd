#include "acnum/nearcomm.hpp"

#include "acnum/gap_unitaries.hpp"
#include "acnum/parallel.hpp"
#include "acnum/subalgebra.hpp"
#include "acnum/witness.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace acnum {

double defect(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b, "defect");
  return hs_norm(commutator(a, b)) + hs_norm(commutator(a, b.adjoint()));
}

namespace {

constexpr Index kFallbackCap = 32;

using Cluster = std::vector<Index>;

std::vector<Cluster> cluster_sorted(const Eigen::VectorXd& vals, double tol) {
  std::vector<Cluster> out;
  for (Index i = 0; i < vals.size(); ++i) {
    if (out.empty() || vals(i) - vals(i - 1) > tol) out.emplace_back();
    out.back().push_back(i);
  }
  return out;
}

// Commutant of {h_1, h_2} described by an eigenbasis w, clusters of columns
// and, per connected group of clusters, unitaries identifying each cluster
// with the group's root.
struct CommutantShape {
  CMatrix w;
  std::vector<Cluster> clusters;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<CMatrix> align;  // per cluster: X_c = align^* Y align
  bool ok = false;
};

// Splits the space into pieces on which every generator compresses to a
// scalar. Each level diagonalizes a fresh random combination of the
// compressed terms and cuts only at large gaps, so eigenvectors stay
// accurate even when the full spectrum has close eigenvalues.
class Splitter {
 public:
  Splitter(const std::vector<CMatrix>& gens, std::vector<CMatrix> terms, std::vector<double> gnorm, double tau)
      : gens_(gens), terms_(std::move(terms)), gnorm_(std::move(gnorm)), tau_(tau), rng_(Seed{0x6e6561ULL}) {}

  void split(const CMatrix& v) {
    if (v.cols() == 1 || scalar_on(v)) {
      leaves.push_back(v);
      return;
    }
    for (int attempt = 0; attempt < 4; ++attempt) {
      const Index r = v.cols();
      CMatrix k = CMatrix::Zero(r, r);
      for (const CMatrix& t : terms_) k += rng_.normal() * (v.adjoint() * t * v);
      k = 0.5 * (k + k.adjoint());
      k.diagonal().array() -= k.trace() / static_cast<double>(r);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
      const Eigen::VectorXd& lam = es.eigenvalues();
      double maxgap = 0.0;
      for (Index i = 1; i < r; ++i) maxgap = std::max(maxgap, lam(i) - lam(i - 1));
      if (maxgap <= 1e-13 * std::max(1.0, lam.cwiseAbs().maxCoeff())) continue;
      Index start = 0;
      for (Index i = 1; i <= r; ++i) {
        if (i < r && lam(i) - lam(i - 1) < 0.1 * maxgap) continue;
        split(v * es.eigenvectors().middleCols(start, i - start));
        start = i;
      }
      return;
    }
    leaves.push_back(v);
  }

  std::vector<CMatrix> leaves;

 private:
  bool scalar_on(const CMatrix& v) const {
    for (std::size_t gi = 0; gi < gens_.size(); ++gi) {
      CMatrix blk = v.adjoint() * gens_[gi] * v;
      blk.diagonal().array() -= blk.trace() / static_cast<double>(blk.rows());
      if (blk.norm() > tau_ * gnorm_[gi]) return false;
    }
    return true;
  }

  const std::vector<CMatrix>& gens_;
  std::vector<CMatrix> terms_;
  std::vector<double> gnorm_;
  double tau_;
  Rng rng_;
};

// tau: relative size below which compressions count as scalar and blocks as zero.
CommutantShape commutant_shape(const std::vector<CMatrix>& gens, double tau) {
  const Index d = gens.front().rows();
  CommutantShape s;
  const CMatrix& h1 = gens[0];
  const CMatrix& h2 = gens[1];
  std::vector<CMatrix> all{h1, h2, h1 * h2 + h2 * h1, Complex(0, 1) * (h1 * h2 - h2 * h1), h1 * h1, h2 * h2};
  // Terms at rounding level (e.g. the commutator of two nearly scalar
  // generators) would pick a random basis once normalized; drop them.
  const double gs = std::max(hs_norm(h1), hs_norm(h2));
  const double natural[] = {gs, gs, gs * gs, gs * gs, gs * gs, gs * gs};
  std::vector<CMatrix> terms;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double n = hs_norm(all[i]);
    if (n > 1e-12 * natural[i]) terms.push_back(all[i] / n);
  }

  std::vector<double> gnorm;
  for (const CMatrix& g : gens) gnorm.push_back(g.norm());

  Splitter sp(gens, std::move(terms), gnorm, tau);
  sp.split(identity(d));
  s.w.resize(d, d);
  Index col = 0;
  for (const CMatrix& leaf : sp.leaves) {
    Cluster c;
    for (Index j = 0; j < leaf.cols(); ++j) c.push_back(col + j);
    s.w.middleCols(col, leaf.cols()) = leaf;
    col += leaf.cols();
    s.clusters.push_back(std::move(c));
  }

  std::vector<CMatrix> gww;
  for (const CMatrix& g : gens) gww.push_back(s.w.adjoint() * g * s.w);
  auto rotate = [&](Index off, Index r, const CMatrix& u) {
    s.w.middleCols(off, r) = (s.w.middleCols(off, r) * u).eval();
    for (CMatrix& m : gww) {
      m.middleCols(off, r) = (m.middleCols(off, r) * u).eval();
      m.middleRows(off, r) = (u.adjoint() * m.middleRows(off, r)).eval();
    }
  };
  // Sizes of runs of (descending) values whose consecutive gaps are <= tol.
  auto runs = [](const Eigen::VectorXd& v, double tol) {
    std::vector<Index> sizes{1};
    for (Index i = 1; i < v.size(); ++i) {
      if (v(i - 1) - v(i) > tol) sizes.push_back(0);
      ++sizes.back();
    }
    return sizes;
  };
  auto split_cluster = [&](std::size_t c, const std::vector<Index>& sizes) {
    const Index off = s.clusters[c].front();
    std::vector<Cluster> parts;
    Index at = off;
    for (Index n : sizes) {
      Cluster p;
      for (Index j = 0; j < n; ++j) p.push_back(at + j);
      at += n;
      parts.push_back(std::move(p));
    }
    s.clusters.erase(s.clusters.begin() + static_cast<std::ptrdiff_t>(c));
    s.clusters.insert(s.clusters.begin() + static_cast<std::ptrdiff_t>(c), parts.begin(), parts.end());
  };

  // Weak couplings move the compressions only at second order, so a leaf
  // may still straddle several multiplicity spaces. Refine until every
  // non-negligible block between leaves is a multiple of a unitary.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t c = 0; c < s.clusters.size() && !changed; ++c)
      for (std::size_t e = c + 1; e < s.clusters.size() && !changed; ++e)
        for (std::size_t gi = 0; gi < gens.size() && !changed; ++gi) {
          const Index oc = s.clusters[c].front(), oe = s.clusters[e].front();
          const Index rc = static_cast<Index>(s.clusters[c].size()), re = static_cast<Index>(s.clusters[e].size());
          const CMatrix m = gww[gi].block(oc, oe, rc, re);
          if (m.norm() <= tau * gnorm[gi]) continue;
          Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
          const Eigen::VectorXd& sv = svd.singularValues();
          const double tol = 1e-8 * sv(0) + tau * gnorm[gi];
          if (rc == re && sv(0) - sv(sv.size() - 1) <= tol) continue;
          Eigen::VectorXd left = Eigen::VectorXd::Zero(rc), right = Eigen::VectorXd::Zero(re);
          left.head(sv.size()) = sv;
          right.head(sv.size()) = sv;
          const auto ls = runs(left, tol), rs = runs(right, tol);
          if (ls.size() == 1 && rs.size() == 1) return s;
          const CMatrix u = svd.matrixU(), v = svd.matrixV();
          rotate(oc, rc, u);
          rotate(oe, re, v);
          split_cluster(e, rs);  // e > c: split it first so c's index stays valid
          split_cluster(c, ls);
          changed = true;
        }
  }

  // Glue clusters along nonzero off-diagonal blocks, strongest links first
  // (a maximum spanning tree) so alignments are not taken from weak blocks.
  const std::size_t nc = s.clusters.size();
  std::vector<Index> offset(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    offset[c] = s.clusters[c].front();
    for (std::size_t j = 0; j < s.clusters[c].size(); ++j)
      if (s.clusters[c][j] != offset[c] + static_cast<Index>(j)) return s;  // clusters are contiguous runs
  }
  auto block = [&](std::size_t gi, std::size_t c, std::size_t e) {
    return gww[gi].block(offset[c], offset[e], static_cast<Index>(s.clusters[c].size()),
                         static_cast<Index>(s.clusters[e].size()));
  };
  // weight(c, e): strongest generator block relative to its generator.
  std::vector<double> weight(nc * nc, 0.0);
  std::vector<std::size_t> strongest(nc * nc, 0);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t e = c + 1; e < nc; ++e)
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const double r = block(gi, c, e).norm() / gnorm[gi];
        if (r > weight[c * nc + e]) {
          weight[c * nc + e] = weight[e * nc + c] = r;
          strongest[c * nc + e] = strongest[e * nc + c] = gi;
        }
      }
  s.align.assign(nc, CMatrix());
  std::vector<bool> seen(nc, false);
  std::vector<double> best(nc);
  std::vector<std::size_t> from(nc);
  for (std::size_t root = 0; root < nc; ++root) {
    if (seen[root]) continue;
    std::vector<std::size_t> group{root};
    seen[root] = true;
    s.align[root] = identity(static_cast<Index>(s.clusters[root].size()));
    for (std::size_t e = 0; e < nc; ++e) {
      best[e] = weight[root * nc + e];
      from[e] = root;
    }
    for (;;) {
      std::size_t e = nc;
      double w = tau;
      for (std::size_t j = 0; j < nc; ++j)
        if (!seen[j] && best[j] > w) {
          w = best[j];
          e = j;
        }
      if (e == nc) break;
      const std::size_t c = from[e];
      const std::size_t gi = strongest[c * nc + e];
      const CMatrix m = block(gi, c, e);
      if (m.rows() != m.cols()) return s;
      Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv(0) - sv(sv.size() - 1) > 1e-8 * sv(0) + tau * gnorm[gi]) return s;
      // m = sigma * um; X_c m = m X_e gives X_e = um^* X_c um.
      s.align[e] = s.align[c] * (svd.matrixU() * svd.matrixV().adjoint());
      seen[e] = true;
      group.push_back(e);
      for (std::size_t j = 0; j < nc; ++j)
        if (!seen[j] && weight[e * nc + j] > best[j]) {
          best[j] = weight[e * nc + j];
          from[j] = e;
        }
    }
    s.groups.push_back(group);
  }
  s.ok = true;
  return s;
}

CMatrix apply_shape(const CommutantShape& s, const CMatrix& a) {
  const Index d = a.rows();
  const CMatrix aw = s.w.adjoint() * a * s.w;
  CMatrix xw = CMatrix::Zero(d, d);
  for (const auto& group : s.groups) {
    const Index r = static_cast<Index>(s.clusters[group.front()].size());
    CMatrix y = CMatrix::Zero(r, r);
    for (std::size_t c : group) {
      const Cluster& cl = s.clusters[c];
      CMatrix blk(r, r);
      for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j) blk(i, j) = aw(cl[static_cast<std::size_t>(i)], cl[static_cast<std::size_t>(j)]);
      y += s.align[c] * blk * s.align[c].adjoint();
    }
    y /= static_cast<double>(group.size());
    for (std::size_t c : group) {
      const Cluster& cl = s.clusters[c];
      const CMatrix blk = s.align[c].adjoint() * y * s.align[c];
      for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j) xw(cl[static_cast<std::size_t>(i)], cl[static_cast<std::size_t>(j)]) = blk(i, j);
    }
  }
  return s.w * xw * s.w.adjoint();
}

bool commutes_with(const CMatrix& x, const std::vector<CMatrix>& gens) {
  const double xn = hs_norm(x);
  for (const CMatrix& g : gens)
    if (hs_norm(commutator(x, g)) > 1e-10 * std::max(1.0, xn) * std::max(1.0, hs_norm(g))) return false;
  return true;
}

CMatrix frame_projection(const CMatrix& a, const CMatrix& b, const CommutantShape& s) {
  const Index d = a.rows();
  if (d > kFallbackCap) throw ConvergenceError("commutant_projection: structure did not verify above the dense cap");
  // Every commuting X is block diagonal over the clusters of w.
  std::vector<CVector> cols;
  for (const Cluster& c : s.clusters)
    for (Index i : c)
      for (Index j : c) cols.push_back(vec(s.w.col(i) * s.w.col(j).adjoint()));
  CMatrix frame(d * d, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) frame.col(static_cast<Index>(i)) = cols[i];
  const CMatrix f = refine_commuting(frame, d, {b}, 1e-10);
  return unvec(f * (f.adjoint() * vec(a)), d);
}

}  // namespace

namespace {

// Projected matrices carry weak couplings and near-degeneracies at many
// scales, so one threshold cannot decide the structure. Every threshold's
// projection is a candidate, as is `hint` (a point known to be feasible in
// exact arithmetic); the nearest one commuting to tolerance wins.
CMatrix project_nearest(const CMatrix& a, const CMatrix& b, const CMatrix* hint) {
  require_same_dim(a, b, "commutant_projection");
  const Index d = a.rows();
  if (d <= 1) return a;
  // Scalar parts do not change the commutant. A traceless part at rounding
  // level (the imaginary part of a Hermitian b, say) is set to exactly zero,
  // otherwise its noise would be measured against its own tiny norm.
  std::vector<CMatrix> gens{0.5 * (b + b.adjoint()), Complex(0, -0.5) * (b - b.adjoint())};
  const double bn = b.norm();
  bool trivial = true;
  for (CMatrix& g : gens) {
    g.diagonal().array() -= g.trace() / static_cast<double>(d);
    if (g.norm() <= 1e-13 * bn) g.setZero();
    trivial = trivial && g.norm() == 0.0;
  }
  if (trivial) return a;
  CMatrix best;
  double best_dist = std::numeric_limits<double>::infinity();
  if (hint != nullptr && commutes_with(*hint, gens)) {
    best = *hint;
    best_dist = hs_norm(a - best);
  }
  CommutantShape s;
  for (double tau : {1e-9, 1e-10, 1e-11, 1e-12}) {
    s = commutant_shape(gens, tau);
    if (!s.ok) continue;
    CMatrix x = apply_shape(s, a);
    if (!commutes_with(x, gens)) continue;
    const double dist = hs_norm(a - x);
    if (dist < best_dist) {
      best_dist = dist;
      best = std::move(x);
    }
  }
  if (std::isfinite(best_dist)) return best;
  return frame_projection(a, b, s);
}

}  // namespace

CMatrix commutant_projection(const CMatrix& a, const CMatrix& b) { return project_nearest(a, b, nullptr); }

namespace {

double objective(const CMatrix& a, const CMatrix& ap, const CMatrix& b, const CMatrix& bp) {
  return std::pow(hs_norm(a - ap), 2) + std::pow(hs_norm(b - bp), 2);
}

// Unitary v making every v^* m v as diagonal as possible, by Jacobi
// rotations on index pairs (each rotation is the exact minimizer of the
// summed off-diagonal mass over the pair). The inputs must be Hermitian.
CMatrix joint_diagonalizer(std::vector<CMatrix> ms) {
  const Index d = ms.front().rows();
  CMatrix v = CMatrix::Identity(d, d);
  double scale = 0.0;
  for (const CMatrix& m : ms) scale = std::max(scale, m.norm());
  if (scale == 0.0 || d < 2) return v;
  const Complex i(0, 1);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < d - 1; ++p)
      for (Index q = p + 1; q < d; ++q) {
        Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
        for (const CMatrix& m : ms) {
          const Eigen::Vector3cd h(m(p, p) - m(q, q), m(p, q) + m(q, p), i * (m(q, p) - m(p, q)));
          g += (h * h.adjoint()).real();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
        Eigen::Vector3d ang = es.eigenvectors().col(2);
        if (ang(0) < 0) ang = -ang;
        const double c = std::sqrt(0.5 + 0.5 * ang(0));
        const Complex sn = 0.5 * Complex(ang(1), -ang(2)) / c;
        // Skipped rotations would move the off-diagonal mass by O(s^2).
        if (std::abs(sn) <= 1e-8) continue;
        rotated = true;
        for (CMatrix& m : ms) {
          // m <- G^* m G on rows and columns p, q, with G = [c, -conj(s); s, c].
          const CVector rp = m.row(p), rq = m.row(q);
          m.row(p) = c * rp + std::conj(sn) * rq;
          m.row(q) = -sn * rp + c * rq;
          const CVector cp = m.col(p), cq = m.col(q);
          m.col(p) = c * cp + sn * cq;
          m.col(q) = -std::conj(sn) * cp + c * cq;
        }
        const CVector vp = v.col(p), vq = v.col(q);
        v.col(p) = c * vp + sn * vq;
        v.col(q) = -std::conj(sn) * vp + c * vq;
      }
    if (!rotated) break;
  }
  return v;
}

// Block pinching of b in the basis v. Basis vectors are ordered by a random real combination of
// b's diagonal and grouped by cluster tolerance tol (relative); tol = 0
// gives a normal matrix.
CMatrix normal_snap(const CMatrix& v, const CMatrix& b, double tol, Seed seed) {
  const CMatrix bv = v.adjoint() * b * v;
  Rng rng(seed);
  const double c1 = rng.normal();
  const double c2 = rng.normal();
  const Index d = b.rows();
  Eigen::VectorXd key(d);
  for (Index j = 0; j < d; ++j) key(j) = c1 * bv(j, j).real() + c2 * bv(j, j).imag();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index x, Index y) { return key(x) < key(y); });
  Eigen::VectorXd sorted(d);
  for (Index j = 0; j < d; ++j) sorted(j) = key(order[static_cast<std::size_t>(j)]);
  CMatrix pinched = CMatrix::Zero(d, d);
  for (const Cluster& c : cluster_sorted(sorted, tol * sorted.cwiseAbs().maxCoeff()))
    for (Index x : c)
      for (Index y : c) {
        const Index ox = order[static_cast<std::size_t>(x)], oy = order[static_cast<std::size_t>(y)];
        pinched(ox, oy) = bv(ox, oy);
      }
  return v * pinched * v.adjoint();
}

struct Run {
  std::vector<DescentStep> steps;
  CMatrix ap, bp;
  double best = std::numeric_limits<double>::infinity();
  std::size_t sweeps = 0;
  bool converged = false;
  bool monotone = true;
};

Run descend(const CMatrix& a, const CMatrix& b, CMatrix b_start, std::size_t max_sweeps) {
  Run r;
  r.bp = std::move(b_start);
  const double floor = 1e-24 * (1.0 + std::pow(hs_norm(a), 2) + std::pow(hs_norm(b), 2));
  double last = std::numeric_limits<double>::infinity();  // after the latest half-step
  double prev_sweep = std::numeric_limits<double>::infinity();
  auto check = [&](double o) {
    if (std::isfinite(last) && o > last + 1e-10 * std::max(last, 1e-20)) r.monotone = false;
    last = o;
  };
  for (std::size_t s = 1; s <= max_sweeps; ++s) {
    r.ap = project_nearest(a, r.bp, s == 1 ? nullptr : &r.ap);
    const double oa = objective(a, r.ap, b, r.bp);
    // The starting B' need not commute with anything, so the very first
    // half-step has no feasible predecessor.
    if (s == 1) last = oa;
    else check(oa);
    r.bp = project_nearest(b, r.ap, &r.bp);
    const double ob = objective(a, r.ap, b, r.bp);
    check(ob);
    r.steps.push_back({ob, hs_norm(a - r.ap), hs_norm(b - r.bp)});
    r.sweeps = s;
    r.best = ob;
    if (ob <= floor || (std::isfinite(prev_sweep) && prev_sweep - ob <= 1e-10 * prev_sweep)) {
      r.converged = true;
      break;
    }
    prev_sweep = ob;
  }
  return r;
}

}  // namespace

DescentTrace alternating_descent(const CMatrix& a, const CMatrix& b, std::size_t max_sweeps,
                                 std::size_t restarts, Seed seed) {
  require_same_dim(a, b, "alternating_descent");
  if (max_sweeps < 1) throw DomainError("alternating_descent: max_sweeps must be positive");
  static constexpr double kSnapTols[] = {0.0, 1e-3, 1e-2, 1e-1};
  const std::size_t runs = restarts + 1;
  std::vector<Run> out(runs);
  CMatrix basis;
  if (runs > 1) {
    const auto re = [](const CMatrix& x) { return CMatrix(0.5 * (x + x.adjoint())); };
    const auto im = [](const CMatrix& x) { return CMatrix(Complex(0, -0.5) * (x - x.adjoint())); };
    basis = joint_diagonalizer({re(a), im(a), re(b), im(b)});
  }
  parallel_for(runs, [&](std::size_t i) {
    CMatrix start;
    if (i == 0) {
      start = b;
    } else if (i <= std::size(kSnapTols)) {
      start = normal_snap(basis, b, kSnapTols[i - 1], seed.child(i));
    } else {
      Rng rng(seed.child(i));
      const CMatrix g = gaussian_matrix(b.rows(), rng);
      start = b + (1e-2 * std::max(1.0, hs_norm(b)) / hs_norm(g)) * g;
    }
    out[i] = descend(a, b, std::move(start), max_sweeps);
  });
  DescentTrace t;
  t.restarts = runs;
  for (std::size_t i = 0; i < runs; ++i) {
    t.run_objectives.push_back(out[i].best);
    t.monotone_ok = t.monotone_ok && out[i].monotone;
    if (out[i].best < out[t.best_run].best) t.best_run = i;
  }
  Run& best = out[t.best_run];
  t.iterations = std::move(best.steps);
  t.a_final = std::move(best.ap);
  t.b_final = std::move(best.bp);
  t.distance_sq = best.best;
  t.distance_sum = hs_norm(a - t.a_final) + hs_norm(b - t.b_final);
  t.sweeps_used = best.sweeps;
  t.converged = best.converged;
  return t;
}

ContractionPair contraction_pair_from_unitaries(const CMatrix& u1, const CMatrix& u2, const CMatrix& v1,
                                               const CMatrix& v2) {
  require_same_dim(u1, u2, "contraction_pair_from_unitaries");
  require_same_dim(u1, v1, "contraction_pair_from_unitaries");
  require_same_dim(u1, v2, "contraction_pair_from_unitaries");
  for (const CMatrix* u : {&u1, &u2, &v1, &v2})
    if (!is_unitary(*u, 1e-8)) throw DomainError("contraction_pair_from_unitaries: input is not unitary");
  const Complex i(0, 1);
  return {unitary_log(u1, 1e-8) + i * unitary_log(u2, 1e-8), unitary_log(v1, 1e-8) + i * unitary_log(v2, 1e-8)};
}

ContractionPair witness_contraction_pair(std::size_t n, double t, std::size_t k, std::size_t m, Seed seed) {
  if (n > kWitnessDenseCap) throw DomainError("witness_contraction_pair: n above the dense cap");
  if (k < 1 || k > n || m < 1 || m > 3 * n) throw DomainError("witness_contraction_pair: need 1 <= k <= n, 1 <= m <= 3n");
  const WitnessFamily fam = build_witness_family(n, t);
  const auto us_all = fam.dense_u();
  std::vector<CMatrix> us(us_all.begin(), us_all.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<CMatrix> vs;
  const auto deformed = fam.deformed_generators();
  for (std::size_t j = 0; j < m; ++j) vs.push_back(deformed[j].dense(n));
  const GapPair ga{haar_unitary(static_cast<Index>(k), seed.child(1)), haar_unitary(static_cast<Index>(k), seed.child(2)), 0.0};
  const GapPair gc{haar_unitary(static_cast<Index>(m), seed.child(3)), haar_unitary(static_cast<Index>(m), seed.child(4)), 0.0};
  const ReductionAssembly r = cyclic_reduction_assembly(us, vs, ga, gc);
  return contraction_pair_from_unitaries(CMatrix(r.z[0]), CMatrix(r.z[1]), CMatrix(r.t[0]), CMatrix(r.t[1]));
}

}  // namespace acnum
