#include "acnum/subalgebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <unordered_map>

namespace acnum {

namespace {

double root_dim(Index d) { return std::sqrt(static_cast<double>(d)); }

// Orthonormal basis of ker(m), treating singular values <= abs_tol as zero.
// The absolute floor matters when every column is already (numerically) in
// the kernel, where a relative cut would count rounding noise as rank.
CMatrix kernel_abs(const CMatrix& m, double abs_tol) {
  const Index cols = m.cols();
  CMatrix square;
  if (m.rows() > cols) {
    Eigen::HouseholderQR<CMatrix> qr(m);
    square = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  } else {
    square = CMatrix::Zero(cols, cols);
    square.topRows(m.rows()) = m;
  }
  Eigen::BDCSVD<CMatrix> svd(square, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > abs_tol) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

struct Cluster {
  Index begin = 0;
  Index count = 0;
};

// Eigenvalues come sorted ascending from SelfAdjointEigenSolver.
std::vector<Cluster> cluster_sorted(const Eigen::VectorXd& values, double tol) {
  std::vector<Cluster> out;
  for (Index i = 0; i < values.size(); ++i) {
    if (out.empty() || values(i) - values(i - 1) > tol)
      out.push_back({i, 1});
    else
      ++out.back().count;
  }
  return out;
}

std::string quantized_key(const CMatrix& x) {
  std::string key;
  key.reserve(static_cast<std::size_t>(x.size()) * 8);
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      key += std::to_string(std::llround(x(i, j).real() * 1e6));
      key += ',';
      key += std::to_string(std::llround(x(i, j).imag() * 1e6));
      key += ';';
    }
  return key;
}

}  // namespace

// ---------------------------------------------------------------------------

SubalgebraBasis SubalgebraBasis::from_spanning(Index ambient_dim,
                                               const std::vector<CMatrix>& spanning,
                                               double rel_tol) {
  if (ambient_dim < 1) throw DimensionError("from_spanning: ambient dimension must be positive");
  OrthonormalSet set(ambient_dim * ambient_dim, rel_tol);
  for (const CMatrix& x : spanning) {
    if (x.rows() != ambient_dim || x.cols() != ambient_dim)
      throw DimensionError("from_spanning: element has wrong dimension");
    set.add(vec(x));
  }
  return from_frame(ambient_dim, set.matrix());
}

SubalgebraBasis SubalgebraBasis::from_frame(Index ambient_dim, CMatrix frame) {
  if (frame.rows() != ambient_dim * ambient_dim)
    throw DimensionError("from_frame: frame rows must equal d^2");
  SubalgebraBasis s;
  s.ambient_ = ambient_dim;
  s.frame_ = std::move(frame);
  const double r = root_dim(ambient_dim);
  s.basis_.reserve(static_cast<std::size_t>(s.frame_.cols()));
  for (Index k = 0; k < s.frame_.cols(); ++k) s.basis_.push_back(unvec(s.frame_.col(k), ambient_dim) * r);
  const CMatrix one = identity(ambient_dim);
  s.contains_unit_ = s.size() > 0 && hs_norm(one - s.project(one)) <= 1e-9;
  return s;
}

SubalgebraBasis SubalgebraBasis::scalars(Index ambient_dim) {
  return from_spanning(ambient_dim, {identity(ambient_dim)});
}

SubalgebraBasis SubalgebraBasis::full(Index ambient_dim) {
  return from_frame(ambient_dim, CMatrix::Identity(ambient_dim * ambient_dim, ambient_dim * ambient_dim));
}

SubalgebraBasis SubalgebraBasis::diagonal(Index ambient_dim) {
  std::vector<int> labels(static_cast<std::size_t>(ambient_dim));
  for (Index i = 0; i < ambient_dim; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return diagonal_partition(labels);
}

SubalgebraBasis SubalgebraBasis::diagonal_partition(const std::vector<int>& labels) {
  const Index d = static_cast<Index>(labels.size());
  std::map<int, CMatrix> cells;
  for (Index i = 0; i < d; ++i) {
    auto [it, fresh] = cells.try_emplace(labels[static_cast<std::size_t>(i)], CMatrix::Zero(d, d));
    it->second(i, i) = 1.0;
  }
  std::vector<CMatrix> span;
  for (auto& [label, proj] : cells) span.push_back(proj);
  return from_spanning(d, span);
}

CMatrix SubalgebraBasis::project(const CMatrix& x) const {
  if (x.rows() != ambient_ || x.cols() != ambient_) throw DimensionError("project: wrong dimension");
  if (size() == 0) return CMatrix::Zero(ambient_, ambient_);
  const CVector v = vec(x);
  return unvec(frame_ * (frame_.adjoint() * v), ambient_);
}

CVector SubalgebraBasis::coefficients(const CMatrix& x) const {
  if (x.rows() != ambient_ || x.cols() != ambient_) throw DimensionError("coefficients: wrong dimension");
  return frame_.adjoint() * vec(x) / root_dim(ambient_);
}

CMatrix SubalgebraBasis::combine(const CVector& c) const {
  if (c.size() != size()) throw DimensionError("combine: coefficient count mismatch");
  if (size() == 0) return CMatrix::Zero(ambient_, ambient_);
  return unvec(frame_ * c, ambient_) * root_dim(ambient_);
}

bool SubalgebraBasis::contains(const CMatrix& x, double tol) const {
  return hs_norm(x - project(x)) <= tol * std::max(1.0, hs_norm(x));
}

bool SubalgebraBasis::is_closed(double tol) const {
  for (const CMatrix& b : basis_)
    if (!contains(b.adjoint(), tol)) return false;
  if (size() <= 64) {
    for (const CMatrix& a : basis_)
      for (const CMatrix& b : basis_)
        if (!contains(a * b, tol)) return false;
    return true;
  }
  // Bilinearity: random combinations test the whole product table at once.
  Rng rng(Seed{0xc105edULL});
  for (int trial = 0; trial < 64; ++trial) {
    const CMatrix a = combine(gaussian_vector(size(), rng));
    const CMatrix b = combine(gaussian_vector(size(), rng));
    if (!contains(a * b, tol)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

SubalgebraBasis generate_subalgebra(const std::vector<CMatrix>& gens, double rel_tol) {
  if (gens.empty()) throw DimensionError("generate_subalgebra: no generators");
  const Index d = gens.front().rows();
  for (const CMatrix& g : gens) {
    require_square(g, "generate_subalgebra");
    if (g.rows() != d) throw DimensionError("generate_subalgebra: generators differ in dimension");
    if (!all_finite(g)) throw DomainError("generate_subalgebra: non-finite generator");
  }
  std::vector<CMatrix> letters;
  for (const CMatrix& g : gens) {
    letters.push_back(g);
    if (!is_hermitian(g, 1e-14)) letters.push_back(g.adjoint());
  }

  OrthonormalSet set(d * d, rel_tol);
  std::deque<CMatrix> frontier;
  auto offer = [&](const CMatrix& x) {
    if (set.add(vec(x))) frontier.push_back(unvec(set.column(set.size() - 1), d));
  };
  offer(identity(d));
  for (const CMatrix& g : letters) offer(g);
  // Words grow by one letter at a time; orthonormalized frontier elements
  // keep the products well scaled.
  while (!frontier.empty() && set.size() < d * d) {
    const CMatrix b = std::move(frontier.front());
    frontier.pop_front();
    for (const CMatrix& g : letters) offer(g * b);
  }
  SubalgebraBasis out = SubalgebraBasis::from_frame(d, set.matrix());
  if (!out.is_closed(1e-8))
    throw ConvergenceError("generate_subalgebra: rank detection failed (span not closed)");
  return out;
}

CMatrix refine_commuting(const CMatrix& frame, Index dim, const std::vector<CMatrix>& constraints,
                         double rel_tol) {
  if (frame.rows() != dim * dim) throw DimensionError("refine_commuting: frame rows must be d^2");
  std::vector<CMatrix> all;
  for (const CMatrix& s : constraints) {
    if (s.rows() != dim || s.cols() != dim) throw DimensionError("refine_commuting: wrong dimension");
    all.push_back(s);
    if (!is_hermitian(s, 1e-14)) all.push_back(s.adjoint());
  }
  CMatrix n = frame;
  for (const CMatrix& s : all) {
    if (n.cols() == 0) break;
    const double scale = s.norm();  // Frobenius >= operator norm
    if (scale == 0.0) continue;
    CMatrix m(dim * dim, n.cols());
    for (Index k = 0; k < n.cols(); ++k) {
      const CMatrix y = unvec(n.col(k), dim);
      m.col(k) = vec(y * s - s * y);
    }
    // Columns come from unit-Frobenius y, so ||[y, s]|| <= 2 ||s||.
    const CMatrix c = kernel_abs(m, 2.0 * rel_tol * scale);
    n = n * c;
  }
  return n;
}

SubalgebraBasis commutant_basis(const std::vector<CMatrix>& s, double rel_tol) {
  if (s.empty()) throw DimensionError("commutant_basis: empty set");
  const Index d = s.front().rows();
  return SubalgebraBasis::from_frame(
      d, refine_commuting(CMatrix::Identity(d * d, d * d), d, s, rel_tol));
}

SubalgebraBasis center(const SubalgebraBasis& p, double rel_tol) {
  const Index d = p.ambient_dim();
  if (p.size() == 0) return SubalgebraBasis::from_frame(d, CMatrix(d * d, 0));
  // Two random elements usually cut the frame down to the centre already;
  // the full basis afterwards makes the result exact regardless.
  Rng rng(Seed{0xce47e5ULL});
  std::vector<CMatrix> constraints{p.combine(gaussian_vector(p.size(), rng)),
                                   p.combine(gaussian_vector(p.size(), rng))};
  CMatrix frame = refine_commuting(p.frame(), d, constraints, rel_tol);
  frame = refine_commuting(frame, d, p.basis(), rel_tol);
  return SubalgebraBasis::from_frame(d, frame);
}

SubalgebraBasis relative_commutant(const SubalgebraBasis& q_alg, const CMatrix& q, double rel_tol) {
  const Index d = q_alg.ambient_dim();
  require_same_dim(q_alg.basis().empty() ? q : q_alg.basis().front(), q, "relative_commutant");
  std::vector<CMatrix> constraints = q_alg.basis();
  constraints.push_back(q);
  const SubalgebraBasis comm = commutant_basis(constraints, rel_tol);
  std::vector<CMatrix> span;
  for (const CMatrix& y : comm.basis()) span.push_back(q * y * q);
  return SubalgebraBasis::from_spanning(d, span, rel_tol);
}

// ---------------------------------------------------------------------------

CMatrix Block::coordinates(const CMatrix& x) const {
  CMatrix c(factor_dim, factor_dim);
  for (Index i = 0; i < factor_dim; ++i)
    for (Index j = 0; j < factor_dim; ++j)
      c(i, j) = normalized_trace(unit(j, i) * x) / normalized_trace(unit(j, j)).real();
  return c;
}

CMatrix Block::assemble(const CMatrix& coords) const {
  if (coords.rows() != factor_dim || coords.cols() != factor_dim)
    throw DimensionError("Block::assemble: coordinate matrix has wrong size");
  CMatrix out = CMatrix::Zero(central_projection.rows(), central_projection.cols());
  for (Index i = 0; i < factor_dim; ++i)
    for (Index j = 0; j < factor_dim; ++j) out += coords(i, j) * unit(i, j);
  return out;
}

namespace {

// One attempt; returns false on a degenerate draw.
bool try_block_structure(const SubalgebraBasis& p, const SubalgebraBasis& z_alg, Rng& rng,
                         std::vector<Block>& out) {
  const Index d = p.ambient_dim();
  CMatrix h = CMatrix::Zero(d, d);
  for (const CMatrix& z : z_alg.basis()) h += rng.normal() * (z + z.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  out.clear();
  Index total = 0;
  for (const Cluster& cl : cluster_sorted(lam, 1e-7 * scale)) {
    const CMatrix vc = eig.eigenvectors().middleCols(cl.begin, cl.count);
    const CMatrix z = vc * vc.adjoint();
    if (!p.contains(z, 1e-8)) {
      // Outside P is fine only for the part of C^d that P does not see.
      if (hs_norm(p.project(z)) > 1e-8) return false;
      continue;
    }
    // Rank of P z, relative to its largest singular value: products with
    // other blocks leave rounding noise that must not count.
    CMatrix range(d * d, p.size());
    for (Index i = 0; i < p.size(); ++i) range.col(i) = vec(p.basis()[static_cast<std::size_t>(i)] * z);
    const Eigen::VectorXd sv = Eigen::BDCSVD<CMatrix>(range).singularValues();
    Index rz = 0;
    while (rz < sv.size() && sv(rz) > 1e-9 * sv(0)) ++rz;
    const Index f = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(rz))));
    if (f < 1 || f * f != rz || cl.count % f != 0) return false;

    Block blk;
    blk.central_projection = z;
    blk.factor_dim = f;
    blk.multiplicity = cl.count / f;
    if (f == 1) {
      blk.units = {z};
    } else {
      // Diagonal units: spectral projections of a random Hermitian element
      // of Pz, computed on the range of z.
      const CMatrix y = p.combine(gaussian_vector(p.size(), rng));
      const CMatrix k = vc.adjoint() * ((y + y.adjoint()) * 0.5) * vc;
      Eigen::SelfAdjointEigenSolver<CMatrix> keig(k);
      const double kscale = std::max(1.0, keig.eigenvalues().cwiseAbs().maxCoeff());
      const auto kcl = cluster_sorted(keig.eigenvalues(), 1e-7 * kscale);
      if (static_cast<Index>(kcl.size()) != f) return false;
      std::vector<CMatrix> diag;
      for (const Cluster& c : kcl) {
        if (c.count != blk.multiplicity) return false;
        const CMatrix w = vc * keig.eigenvectors().middleCols(c.begin, c.count);
        diag.push_back(w * w.adjoint());
        if (!p.contains(diag.back(), 1e-8)) return false;
      }
      // Off-diagonal units from e_11 y e_jj, which is a multiple of e_1j.
      const CMatrix y2 = p.combine(gaussian_vector(p.size(), rng));
      const double t11 = normalized_trace(diag[0]).real();
      std::vector<CMatrix> row(static_cast<std::size_t>(f));
      row[0] = diag[0];
      for (Index j = 1; j < f; ++j) {
        const CMatrix v = diag[0] * y2 * diag[static_cast<std::size_t>(j)];
        const double c = normalized_trace(v * v.adjoint()).real() / t11;
        if (!(c > 1e-12)) return false;
        row[static_cast<std::size_t>(j)] = v / std::sqrt(c);
      }
      blk.units.resize(static_cast<std::size_t>(f * f));
      for (Index i = 0; i < f; ++i)
        for (Index j = 0; j < f; ++j)
          blk.units[static_cast<std::size_t>(i * f + j)] =
              row[static_cast<std::size_t>(i)].adjoint() * row[static_cast<std::size_t>(j)];
    }
    total += rz;
    out.push_back(std::move(blk));
  }
  return total == p.size();
}

}  // namespace

BlockStructure block_structure(const SubalgebraBasis& p, Seed seed) {
  if (p.size() == 0) throw DomainError("block_structure: empty algebra");
  const SubalgebraBasis z = center(p);
  BlockStructure bs;
  for (int attempt = 0; attempt <= 8; ++attempt) {
    Rng rng(seed.child(static_cast<std::uint64_t>(attempt)));
    if (try_block_structure(p, z, rng, bs.blocks)) {
      bs.retries_used = attempt;
      return bs;
    }
  }
  throw ConvergenceError("block_structure: degenerate spectral draws after 8 retries");
}

CMatrix cond_expect(const CMatrix& x, const SubalgebraBasis& q) { return q.project(x); }

std::vector<CMatrix> random_unit_ball_elements(const SubalgebraBasis& p, std::size_t count, Seed seed) {
  std::vector<CMatrix> out;
  if (p.size() == 0) return out;
  Rng rng(seed);
  while (out.size() < count) {
    const CMatrix x = p.combine(gaussian_vector(p.size(), rng));
    Eigen::BDCSVD<CMatrix> svd(x);
    const double top = svd.singularValues()(0);
    if (top > 0.0) out.push_back(x / top);
  }
  return out;
}

std::vector<CMatrix> default_testset(const SubalgebraBasis& p,
                                     const std::vector<CMatrix>& generating_unitaries,
                                     std::size_t count, Seed seed) {
  std::vector<CMatrix> out = generating_unitaries;
  for (CMatrix& x : random_unit_ball_elements(p, count, seed)) out.push_back(std::move(x));
  return out;
}

ContainmentEstimate containment_defect(const SubalgebraBasis& p, const SubalgebraBasis& q,
                                       const std::vector<CMatrix>& testset) {
  if (p.ambient_dim() != q.ambient_dim()) throw DimensionError("containment_defect: ambient mismatch");
  ContainmentEstimate est;
  for (const CMatrix& x : testset) {
    if (x.rows() != p.ambient_dim()) throw DimensionError("containment_defect: test element dimension");
    if (op_norm(x) > 1.0 + 1e-8) throw DomainError("containment_defect: test element outside unit ball");
    if (!p.contains(x, 1e-8)) ++est.outside_span;
    est.value = std::max(est.value, hs_norm(x - q.project(x)));
    ++est.samples;
  }
  return est;
}

double subalg_distance(const SubalgebraBasis& p, const SubalgebraBasis& q,
                       const std::vector<CMatrix>& testset_p, const std::vector<CMatrix>& testset_q) {
  return std::max(containment_defect(p, q, testset_p).value, containment_defect(q, p, testset_q).value);
}

// ---------------------------------------------------------------------------

CMatrix BasicConstruction::left(const CMatrix& x) const { return kron(identity(ambient), x); }

CMatrix BasicConstruction::right(const CMatrix& y) const {
  return kron(y.transpose(), identity(ambient));
}

Complex BasicConstruction::trace(const CMatrix& t) const {
  if (t.rows() != ambient * ambient || t.cols() != ambient * ambient)
    throw DimensionError("BasicConstruction::trace: wrong size");
  return (t * trace_weight).trace();
}

double BasicConstruction::hs_norm(const CMatrix& t) const {
  return std::sqrt(std::max(0.0, trace(t.adjoint() * t).real()));
}

BasicConstruction basic_construction(const SubalgebraBasis& q, Index cap) {
  const Index d = q.ambient_dim();
  if (d > cap) throw DomainError("basic_construction: ambient dimension above cap");
  if (!q.contains_unit()) throw DomainError("basic_construction: subalgebra must be unital");
  BasicConstruction bc;
  bc.ambient = d;
  bc.e_q = q.frame() * q.frame().adjoint();
  CMatrix c = CMatrix::Zero(d, d);
  for (const CMatrix& b : q.basis()) c += b * b.adjoint();
  const CMatrix c_inv = hermitian_function((c + c.adjoint()) * 0.5, [](double x) {
    return std::abs(x) > 1e-12 ? Complex(1.0 / x, 0.0) : Complex(0.0, 0.0);
  });
  bc.trace_weight = bc.right(c_inv);
  return bc;
}

bool is_finite_group(const std::vector<CMatrix>& g, double tol) {
  if (g.empty()) return false;
  const Index d = g.front().rows();
  std::unordered_multimap<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].rows() != d || g[i].cols() != d) return false;
    index.emplace(quantized_key(g[i]), i);
  }
  auto member = [&](const CMatrix& x) {
    auto range = index.equal_range(quantized_key(x));
    for (auto it = range.first; it != range.second; ++it)
      if ((g[it->second] - x).cwiseAbs().maxCoeff() <= tol) return true;
    for (const CMatrix& y : g)  // rounding boundary fallback
      if ((y - x).cwiseAbs().maxCoeff() <= tol) return true;
    return false;
  };
  if (!member(identity(d))) return false;
  for (const CMatrix& a : g) {
    Eigen::FullPivLU<CMatrix> lu(a);
    if (!lu.isInvertible() || !member(lu.inverse())) return false;
    for (const CMatrix& b : g)
      if (!member(a * b)) return false;
  }
  return true;
}

std::vector<CMatrix> pauli_group(std::size_t qubits) {
  const CMatrix paulis[4] = {identity(2), pauli_x(), pauli_y(), pauli_z()};
  std::size_t strings = 1;
  for (std::size_t q = 0; q < qubits; ++q) strings *= 4;
  std::vector<CMatrix> out;
  const Complex phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const Complex& ph : phases)
    for (std::size_t s = 0; s < strings; ++s) {
      CMatrix m = CMatrix::Identity(1, 1) * ph;
      std::size_t code = s;
      for (std::size_t q = 0; q < qubits; ++q) {
        m = kron(m, paulis[code % 4]);
        code /= 4;
      }
      out.push_back(std::move(m));
    }
  return out;
}

CMatrix group_average_projection(const std::vector<CMatrix>& g, const BasicConstruction& bc) {
  if (!is_finite_group(g)) throw DomainError("group_average_projection: G is not a finite group");
  if (g.front().rows() != bc.ambient) throw DimensionError("group_average_projection: dimension mismatch");
  CMatrix f = CMatrix::Zero(bc.e_q.rows(), bc.e_q.cols());
  for (const CMatrix& u : g) {
    const CMatrix l = bc.left(u);
    f += l * bc.e_q * l.adjoint();
  }
  return f / static_cast<double>(g.size());
}

CMatrix close_unitary_in(const CMatrix& u, const SubalgebraBasis& p) {
  if (!p.contains_unit()) throw DomainError("close_unitary_in: subalgebra must contain 1");
  if (!is_unitary(u, 1e-8)) throw DomainError("close_unitary_in: input is not unitary");
  const CMatrix e = p.project(u);
  const BlockStructure bs = block_structure(p);
  CMatrix v = CMatrix::Zero(u.rows(), u.cols());
  for (const Block& b : bs.blocks) v += b.assemble(polar_unitary(b.coordinates(e)));
  return v;
}

CompressedCommutantReport compressed_commutant_check(const SubalgebraBasis& p_alg, const CMatrix& p,
                                                     const SubalgebraBasis& q_alg, const CMatrix& q, double eps,
                                                     const std::vector<CMatrix>& testset_p,
                                                     std::size_t conclusion_samples, Seed seed) {
  CompressedCommutantReport r;
  r.eps = eps;
  r.hypothesis_defect = containment_defect(p_alg, q_alg, testset_p).value;
  r.projection_distance = hs_norm(p - q);
  r.hypothesis_ok = r.hypothesis_defect <= eps + 1e-12 && r.projection_distance <= eps + 1e-12;
  const SubalgebraBasis rq = relative_commutant(q_alg, q);
  const SubalgebraBasis rp = relative_commutant(p_alg, p);
  const auto tests = random_unit_ball_elements(rq, conclusion_samples, seed);
  r.conclusion_defect = containment_defect(rq, rp, tests).value;
  r.bound = 4.0 * eps;
  r.bound_holds = r.conclusion_defect <= r.bound + 1e-8;
  return r;
}

}  // namespace acnum
