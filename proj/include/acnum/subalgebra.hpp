// subalgebra.hpp - finite dimensional self-adjoint subalgebras of M_d.
//
// A subalgebra is carried by an orthonormal basis for the normalized
// Hilbert-Schmidt inner product. Conditional expectations are the HS
// orthogonal projections onto that span; for a unital *-subalgebra this is
// the unique trace-preserving bimodule map.

#pragma once

#include "acnum/linalg.hpp"
#include "acnum/random.hpp"

#include <cstddef>
#include <vector>

namespace acnum {

class SubalgebraBasis {
 public:
  SubalgebraBasis() = default;

  /// Gram-Schmidt on `spanning`; residuals <= rel_tol times the original
  /// norm are dropped. Does not check closure; see is_closed().
  static SubalgebraBasis from_spanning(Index ambient_dim, const std::vector<CMatrix>& spanning,
                                       double rel_tol = 1e-10);
  /// Columns of `frame` are orthonormal vec(b) / sqrt(d).
  static SubalgebraBasis from_frame(Index ambient_dim, CMatrix frame);

  static SubalgebraBasis scalars(Index ambient_dim);
  static SubalgebraBasis full(Index ambient_dim);
  static SubalgebraBasis diagonal(Index ambient_dim);
  /// Diagonal algebra spanned by the indicator projections of the cells of a
  /// coordinate partition; `labels[i]` is the cell of coordinate i.
  static SubalgebraBasis diagonal_partition(const std::vector<int>& labels);

  Index ambient_dim() const { return ambient_; }
  Index size() const { return frame_.cols(); }
  bool contains_unit() const { return contains_unit_; }
  const std::vector<CMatrix>& basis() const { return basis_; }
  const CMatrix& frame() const { return frame_; }

  /// HS-orthogonal projection onto the span (the conditional expectation).
  CMatrix project(const CMatrix& x) const;
  /// Coefficients tau(b_i^* x).
  CVector coefficients(const CMatrix& x) const;
  CMatrix combine(const CVector& coefficients) const;
  bool contains(const CMatrix& x, double tol = 1e-9) const;
  /// Products and adjoints of basis elements stay in the span within tol.
  bool is_closed(double tol = 1e-9) const;

 private:
  Index ambient_ = 0;
  CMatrix frame_;
  std::vector<CMatrix> basis_;
  bool contains_unit_ = false;
};

/// Smallest unital *-subalgebra containing `gens`: the span of {1} and the
/// generators with their adjoints is closed under left multiplication by the
/// generators until no new direction appears.
SubalgebraBasis generate_subalgebra(const std::vector<CMatrix>& gens, double rel_tol = 1e-10);

/// Orthonormal basis of {y : [y, s] = [y, s^*] = 0 for all s in S}.
SubalgebraBasis commutant_basis(const std::vector<CMatrix>& s, double rel_tol = 1e-10);

/// Z(P) = P intersected with P'.
SubalgebraBasis center(const SubalgebraBasis& p, double rel_tol = 1e-10);

/// Q' intersected with qMq, for a projection q commuting with Q.
SubalgebraBasis relative_commutant(const SubalgebraBasis& q_alg, const CMatrix& q,
                                   double rel_tol = 1e-10);

/// Restricts an orthonormal frame (columns vec(y)/sqrt(d)) to the elements
/// that commute with every constraint and its adjoint. Each constraint is
/// handled by a nullspace solve in the coordinates of the current frame.
CMatrix refine_commuting(const CMatrix& frame, Index dim, const std::vector<CMatrix>& constraints,
                         double rel_tol = 1e-10);

struct Block {
  CMatrix central_projection;
  Index factor_dim = 0;
  Index multiplicity = 0;
  /// Matrix units e_ij of the block, row-major: units[i * factor_dim + j].
  std::vector<CMatrix> units;

  const CMatrix& unit(Index i, Index j) const {
    return units[static_cast<std::size_t>(i * factor_dim + j)];
  }
  /// X with x z = sum X_ij e_ij.
  CMatrix coordinates(const CMatrix& x) const;
  CMatrix assemble(const CMatrix& coords) const;
};

struct BlockStructure {
  std::vector<Block> blocks;
  int retries_used = 0;
};

/// Minimal central projections and matrix units, found from the spectral
/// decomposition of a random Hermitian central element. Degenerate draws are
/// retried with fresh child seeds (at most 8 retries).
BlockStructure block_structure(const SubalgebraBasis& p, Seed seed = Seed{0x0b10c5ULL});

CMatrix cond_expect(const CMatrix& x, const SubalgebraBasis& q);

/// Random elements of the unit ball of P: Gaussian combinations of the basis
/// rescaled to operator norm 1.
std::vector<CMatrix> random_unit_ball_elements(const SubalgebraBasis& p, std::size_t count,
                                               Seed seed);
/// Generating unitaries (when given) plus `count` random unit-ball elements.
std::vector<CMatrix> default_testset(const SubalgebraBasis& p,
                                     const std::vector<CMatrix>& generating_unitaries,
                                     std::size_t count, Seed seed);

struct ContainmentEstimate {
  /// max over the test set of ||x - E_Q(x)||_2; a lower estimate of the
  /// supremum over the unit ball of P.
  double value = 0.0;
  std::size_t samples = 0;
  /// Test elements found outside the span of P (warning, not an error).
  std::size_t outside_span = 0;
};

/// Throws DomainError when a test element has operator norm > 1 + 1e-8.
ContainmentEstimate containment_defect(const SubalgebraBasis& p, const SubalgebraBasis& q,
                                       const std::vector<CMatrix>& testset);
double subalg_distance(const SubalgebraBasis& p, const SubalgebraBasis& q,
                       const std::vector<CMatrix>& testset_p,
                       const std::vector<CMatrix>& testset_q);

/// Jones basic construction on the Hilbert-Schmidt space of M_d, with
/// operators acting on column-major vec(x). The trace satisfies
/// Tr(x e_Q y) = tau(xy); it is realized as Trace(T * R_{c^{-1}}) where
/// c = sum_a q_a q_a^* over an orthonormal basis of Q and R_y is right
/// multiplication.
struct BasicConstruction {
  Index ambient = 0;
  CMatrix e_q;
  CMatrix trace_weight;

  CMatrix left(const CMatrix& x) const;
  CMatrix right(const CMatrix& y) const;
  Complex trace(const CMatrix& t) const;
  /// ||T||_{2,Tr} = Tr(T^* T)^{1/2}
  double hs_norm(const CMatrix& t) const;
};

BasicConstruction basic_construction(const SubalgebraBasis& q, Index cap = 32);

/// Verifies closure under products and inverses within tol.
bool is_finite_group(const std::vector<CMatrix>& g, double tol = 1e-9);
/// n-qubit Pauli group {i^k P_1 (x) ... (x) P_n}, 4^(n+1) elements.
std::vector<CMatrix> pauli_group(std::size_t qubits);

/// f = |G|^{-1} sum_U L_U e_Q L_U^*. Throws DomainError when G is not a group.
CMatrix group_average_projection(const std::vector<CMatrix>& g, const BasicConstruction& bc);

/// v in U(P) with ||u - v||_2 <= 3 ||u - E_P(u)||_2, from the blockwise polar
/// decomposition of E_P(u). Throws DomainError when 1 is not in P.
CMatrix close_unitary_in(const CMatrix& u, const SubalgebraBasis& p);

struct CompressedCommutantReport {
  double hypothesis_defect = 0.0;    // measured P in Q over testset_p
  double projection_distance = 0.0;  // ||p - q||_2
  double eps = 0.0;
  bool hypothesis_ok = false;
  double conclusion_defect = 0.0;    // measured (Q' n qMq) in (P' n pMp)
  double bound = 0.0;                // 4 eps
  bool bound_holds = false;
};

/// Measures both sides of "P in_eps Q and ||p - q||_2 <= eps imply
/// Q' n qMq in_{4 eps} P' n pMp". The conclusion is only meaningful when
/// hypothesis_ok is set.
CompressedCommutantReport compressed_commutant_check(const SubalgebraBasis& p_alg, const CMatrix& p,
                                                     const SubalgebraBasis& q_alg, const CMatrix& q, double eps,
                                                     const std::vector<CMatrix>& testset_p,
                                                     std::size_t conclusion_samples, Seed seed);

}  // namespace acnum
