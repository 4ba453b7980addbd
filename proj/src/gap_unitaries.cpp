#include "acnum/gap_unitaries.hpp"

#include "acnum/expander.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>

namespace acnum {

namespace {

SparseCMatrix sparse(const CMatrix& x) { return x.sparseView(0.0, 0.0); }

SparseCMatrix sparse_identity(Index d) {
  SparseCMatrix s(d, d);
  s.setIdentity();
  return s;
}

SparseCMatrix skron(const SparseCMatrix& a, const SparseCMatrix& b) {
  SparseCMatrix out = Eigen::kroneckerProduct(a, b);
  return out;
}

SparseCMatrix skron_all(std::initializer_list<SparseCMatrix> fs) {
  SparseCMatrix out = sparse_identity(1);
  for (const SparseCMatrix& f : fs) out = skron(out, f);
  return out;
}

SparseCMatrix unit(Index d, Index r, Index c) {
  SparseCMatrix e(d, d);
  e.insert(r, c) = 1.0;
  return e;
}

void require_unitaries(const std::vector<CMatrix>& xs, const char* what) {
  if (xs.empty()) throw DimensionError(std::string(what) + ": empty list");
  const Index d = xs.front().rows();
  for (const CMatrix& x : xs) {
    require_square(x, what);
    if (x.rows() != d) throw DimensionError(std::string(what) + ": dimensions differ");
    if (!is_unitary(x, 1e-10)) throw DomainError(std::string(what) + ": not unitary");
  }
}

void require_certificate(const GapPair& p, const char* what) {
  if (!(p.kappa > 0.0) || !gap_hypothesis_holds(p.u, p.v, p.kappa))
    throw DomainError(std::string(what) + ": gap certificate missing or not verified");
}

// Block diagonal sum_i e_ii (x) blocks[i].
SparseCMatrix block_diagonal(const std::vector<SparseCMatrix>& blocks) {
  const Index k = static_cast<Index>(blocks.size());
  SparseCMatrix out;
  for (Index i = 0; i < k; ++i) {
    SparseCMatrix term = skron(unit(k, i, i), blocks[static_cast<std::size_t>(i)]);
    out = i == 0 ? term : SparseCMatrix(out + term);
  }
  return out;
}

// [[0,0,1],[1,0,0],[0,w,0]] with the block index as the outer leg.
SparseCMatrix cyclic_outer(const SparseCMatrix& w) {
  const SparseCMatrix one = sparse_identity(w.rows());
  return SparseCMatrix(skron(unit(3, 0, 2), one) + skron(unit(3, 1, 0), one) + skron(unit(3, 2, 1), w));
}

// Same shape with the block index as the inner leg.
SparseCMatrix cyclic_inner(const SparseCMatrix& w) {
  const SparseCMatrix one = sparse_identity(w.rows());
  return SparseCMatrix(skron(one, unit(3, 0, 2)) + skron(one, unit(3, 1, 0)) + skron(w, unit(3, 2, 1)));
}

CMatrix sample(Index d, bool hermitian, Rng& rng) {
  return hermitian ? random_hermitian(d, rng) : gaussian_matrix(d, rng);
}

}  // namespace

CMatrix partial_expectation(const CMatrix& x, const TensorLegs& legs, const std::vector<bool>& keep) {
  if (keep.size() != legs.size()) throw DimensionError("partial_expectation: mask size mismatch");
  const Index d = legs.total();
  if (x.rows() != d || x.cols() != d) throw DimensionError("partial_expectation: dimension mismatch");
  // Offsets contributed by kept and by dropped digits.
  std::vector<Index> kept{0}, dropped{0};
  for (std::size_t l = 0; l < legs.size(); ++l) {
    std::vector<Index>& target = keep[l] ? kept : dropped;
    std::vector<Index> next;
    next.reserve(target.size() * static_cast<std::size_t>(legs.dims[l]));
    for (Index base : target)
      for (Index v = 0; v < legs.dims[l]; ++v) next.push_back(base + v * legs.stride(l));
    target = std::move(next);
  }
  const double inv = 1.0 / static_cast<double>(dropped.size());
  CMatrix out = CMatrix::Zero(d, d);
  for (Index a : kept)
    for (Index b : kept) {
      Complex s = 0.0;
      for (Index o : dropped) s += x(a + o, b + o);
      s *= inv;
      for (Index o : dropped) out(a + o, b + o) = s;
    }
  return out;
}

bool supported_on_legs(const CMatrix& z, const TensorLegs& legs, const std::vector<bool>& keep, double tol) {
  return hs_norm(z - partial_expectation(z, legs, keep)) <= tol;
}

RelativeGapSystem tensor_gap_system(Index k, Index n, const GapPair& pair) {
  if (k < 1 || n < 1) throw DimensionError("tensor_gap_system: dimensions must be positive");
  if (pair.u.rows() != k || pair.v.rows() != k) throw DimensionError("tensor_gap_system: pair must live in dim k");
  require_certificate(pair, "tensor_gap_system");
  RelativeGapSystem s;
  s.ambient_legs = TensorLegs({k, n});
  s.z = {kron(pair.u, identity(n)), kron(pair.v, identity(n))};
  s.target_leg_mask = {false, true};
  s.z_support = {{true, false}, {true, false}};
  s.eta = std::sqrt(2.0) * pair.kappa;
  return s;
}

CMatrix cyclic_block_unitary(const CMatrix& w) {
  require_square(w, "cyclic_block_unitary");
  return CMatrix(cyclic_outer(sparse(w)));
}

RelativeGapSystem cyclic_gap_system(Index k, Index n, const CMatrix& w, const GapPair& pair) {
  if (k < 1 || n < 1) throw DimensionError("cyclic_gap_system: dimensions must be positive");
  if (pair.u.rows() != k || pair.v.rows() != k) throw DimensionError("cyclic_gap_system: pair must live in dim k");
  if (w.rows() != k * n || w.cols() != k * n) throw DimensionError("cyclic_gap_system: w must live in dim k*n");
  if (!is_unitary(w, 1e-10)) throw DomainError("cyclic_gap_system: w is not unitary");
  require_certificate(pair, "cyclic_gap_system");
  const SparseCMatrix one_n = sparse_identity(n);
  const SparseCMatrix uu = skron(sparse(pair.u), one_n);
  const SparseCMatrix vv = skron(sparse(pair.v), one_n);
  RelativeGapSystem s;
  s.ambient_legs = TensorLegs({3, k, n});
  s.z = {CMatrix(block_diagonal({uu, uu, vv})), cyclic_block_unitary(w)};
  s.target_leg_mask = {false, false, true};
  s.z_support = {{true, true, false}, {true, true, true}};
  s.eta = 1e7 * (1.0 + std::pow(pair.kappa, 6));
  return s;
}

RelativeGapAudit audit_relative_gap(const RelativeGapSystem& sys, std::size_t samples, Seed seed, double eta) {
  const double e = eta > 0.0 ? eta : sys.eta;
  const Index d = sys.ambient_legs.total();
  Rng rng(seed);
  RelativeGapAudit a;
  a.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const CMatrix x = sample(d, s % 2 == 0, rng);
    const double lhs = hs_norm(x - partial_expectation(x, sys.ambient_legs, sys.target_leg_mask));
    double comm = 0.0;
    for (const CMatrix& z : sys.z) comm += hs_norm(commutator(z, x));
    const double margin = e * comm - lhs;
    a.worst_margin = std::min(a.worst_margin, margin);
    if (margin < -1e-9) ++a.violations;
    if (comm > 0.0) a.empirical_eta = std::max(a.empirical_eta, lhs / comm);
    ++a.samples;
  }
  return a;
}

BlockCommutatorParts block_commutator_parts(const std::vector<CMatrix>& d_blocks, const CMatrix& x) {
  if (d_blocks.size() != 3) throw DimensionError("block_commutator_parts: need three blocks");
  const Index n = d_blocks.front().rows();
  if (x.rows() != 3 * n || x.cols() != 3 * n) throw DimensionError("block_commutator_parts: x must be 3N x 3N");
  CMatrix d = CMatrix::Zero(3 * n, 3 * n);
  for (Index i = 0; i < 3; ++i) d.block(i * n, i * n, n, n) = d_blocks[static_cast<std::size_t>(i)];
  BlockCommutatorParts p;
  const double c = hs_norm(commutator(d, x));
  p.commutator_sq = c * c;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) {
      const CMatrix xij = x.block(i * n, j * n, n, n);
      const double b = hs_norm(d_blocks[static_cast<std::size_t>(i)] * xij *
                                   d_blocks[static_cast<std::size_t>(j)].adjoint() - xij);
      p.block_sum_sq += b * b;
      p.max_block = std::max(p.max_block, b);
    }
  return p;
}

ReductionAssembly product_reduction_assembly(const std::vector<CMatrix>& us, const std::vector<CMatrix>& vs,
                                             const GapPair& a, const GapPair& c) {
  require_unitaries(us, "product_reduction_assembly");
  require_unitaries(vs, "product_reduction_assembly");
  const Index n = us.front().rows();
  if (vs.front().rows() != n) throw DimensionError("product_reduction_assembly: U and V dims differ");
  const Index k = static_cast<Index>(us.size());
  const Index m = static_cast<Index>(vs.size());
  if (a.u.rows() != k || a.v.rows() != k || c.u.rows() != m || c.v.rows() != m)
    throw DimensionError("product_reduction_assembly: gap pairs must live in dims k and m");
  const SparseCMatrix ik = sparse_identity(k), in = sparse_identity(n), im = sparse_identity(m);

  std::vector<SparseCMatrix> ublocks, vterms;
  for (const CMatrix& u : us) ublocks.push_back(sparse(u));
  SparseCMatrix t3(k * n * m, k * n * m);
  for (Index j = 0; j < m; ++j)
    t3 += skron_all({ik, sparse(vs[static_cast<std::size_t>(j)]), unit(m, j, j)});

  ReductionAssembly r;
  r.legs = TensorLegs({k, n, m});
  r.z = {skron_all({sparse(a.u), in, im}), skron_all({sparse(a.v), in, im}),
         skron(block_diagonal(ublocks), im)};
  r.t = {skron_all({ik, in, sparse(c.u)}), skron_all({ik, in, sparse(c.v)}), t3};
  r.coupled_z = 2;
  r.coupled_t = 2;
  return r;
}

ReductionAssembly cyclic_reduction_assembly(const std::vector<CMatrix>& us, const std::vector<CMatrix>& vs,
                                            const GapPair& a, const GapPair& c) {
  require_unitaries(us, "cyclic_reduction_assembly");
  require_unitaries(vs, "cyclic_reduction_assembly");
  const Index n = us.front().rows();
  if (vs.front().rows() != n) throw DimensionError("cyclic_reduction_assembly: U and V dims differ");
  const Index k = static_cast<Index>(us.size());
  const Index m = static_cast<Index>(vs.size());
  if (a.u.rows() != k || a.v.rows() != k || c.u.rows() != m || c.v.rows() != m)
    throw DimensionError("cyclic_reduction_assembly: gap pairs must live in dims k and m");
  const SparseCMatrix i3 = sparse_identity(3), ik = sparse_identity(k), in = sparse_identity(n),
                      im = sparse_identity(m);

  std::vector<SparseCMatrix> ublocks;
  for (const CMatrix& u : us) ublocks.push_back(sparse(u));
  const SparseCMatrix w = block_diagonal(ublocks);  // sum e_ii (x) U_i on (k, n)
  SparseCMatrix wp(n * m, n * m);                   // sum V_j (x) e_jj on (n, m)
  for (Index j = 0; j < m; ++j) wp += skron(sparse(vs[static_cast<std::size_t>(j)]), unit(m, j, j));

  const SparseCMatrix au = sparse(a.u), av = sparse(a.v), cu = sparse(c.u), cv = sparse(c.v);
  const SparseCMatrix z1_core = block_diagonal({au, au, av});  // legs (3, k)
  SparseCMatrix t1_core(3 * m, 3 * m);                          // legs (m, 3)
  t1_core = SparseCMatrix(skron(cu, unit(3, 0, 0)) + skron(cu, unit(3, 1, 1)) + skron(cv, unit(3, 2, 2)));

  ReductionAssembly r;
  r.legs = TensorLegs({3, k, n, m, 3});
  r.z = {skron_all({z1_core, in, im, i3}), skron_all({cyclic_outer(w), im, i3})};
  r.t = {skron_all({i3, ik, in, t1_core}), skron_all({i3, ik, cyclic_inner(wp)})};
  r.coupled_z = 1;
  r.coupled_t = 1;
  return r;
}

double averaged_commutator_sq(const std::vector<CMatrix>& us, const std::vector<CMatrix>& vs) {
  if (us.empty() || vs.empty()) throw DimensionError("averaged_commutator_sq: empty list");
  double s = 0.0;
  for (const CMatrix& u : us)
    for (const CMatrix& v : vs) {
      const double c = hs_norm(commutator(u, v));
      s += c * c;
    }
  return s / static_cast<double>(us.size() * vs.size());
}

double sparse_hs_norm(const SparseCMatrix& x) {
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.rows()));
}

SparseCMatrix sparse_commutator(const SparseCMatrix& a, const SparseCMatrix& b) {
  SparseCMatrix ab = a * b;
  SparseCMatrix ba = b * a;
  return SparseCMatrix(ab - ba);
}

std::vector<CommutatorEntry> commutator_table(const ReductionAssembly& a) {
  std::vector<CommutatorEntry> out;
  for (std::size_t i = 0; i < a.z.size(); ++i)
    for (std::size_t j = 0; j < a.t.size(); ++j) {
      const SparseCMatrix c = sparse_commutator(a.z[i], a.t[j]);
      CommutatorEntry e;
      e.alpha = i;
      e.beta = j;
      e.hs_norm = sparse_hs_norm(c);
      e.exactly_zero = true;
      for (Index col = 0; col < c.outerSize() && e.exactly_zero; ++col)
        for (SparseCMatrix::InnerIterator it(c, col); it; ++it)
          if (it.value() != Complex(0.0, 0.0)) {
            e.exactly_zero = false;
            break;
          }
      out.push_back(e);
    }
  return out;
}

double max_unitarity_defect(const ReductionAssembly& a) {
  double worst = 0.0;
  auto check = [&](const SparseCMatrix& x) {
    SparseCMatrix g = x.adjoint() * x;
    SparseCMatrix diff = g - sparse_identity(x.rows());
    for (Index col = 0; col < diff.outerSize(); ++col)
      for (SparseCMatrix::InnerIterator it(diff, col); it; ++it) worst = std::max(worst, std::abs(it.value()));
  };
  for (const auto& z : a.z) check(z);
  for (const auto& t : a.t) check(t);
  return worst;
}

}  // namespace acnum
