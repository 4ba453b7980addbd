// gap_unitaries.hpp - unitaries whose commutators control the distance to a
// tensor-leg subalgebra, and the block assemblies that turn k + m almost
// commuting unitaries into a few unitaries on a larger tensor product.
//
// Leg conventions follow TensorLegs: leg 0 is the outermost Kronecker factor.

#pragma once

#include "acnum/linalg.hpp"
#include "acnum/random.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

namespace acnum {

using SparseCMatrix = Eigen::SparseMatrix<Complex>;

struct GapPair {
  CMatrix u;
  CMatrix v;
  double kappa = 0.0;  // 0 when uncertified
};

/// E onto (algebra of the kept legs) tensor 1: averages the dropped legs.
CMatrix partial_expectation(const CMatrix& x, const TensorLegs& legs, const std::vector<bool>& keep);
/// ||z - E_keep(z)||_2 <= tol.
bool supported_on_legs(const CMatrix& z, const TensorLegs& legs, const std::vector<bool>& keep,
                       double tol = 1e-12);

struct RelativeGapSystem {
  TensorLegs ambient_legs;
  std::vector<CMatrix> z;
  /// Legs spanning the target subalgebra; the rest are averaged by E.
  std::vector<bool> target_leg_mask;
  /// Declared leg support of each z (structural condition).
  std::vector<std::vector<bool>> z_support;
  double eta = 0.0;
};

/// z = (u (x) 1_n, v (x) 1_n) with eta = sqrt(2) kappa; target 1 (x) M_n.
/// Throws DomainError unless the pair's gap certificate verifies.
RelativeGapSystem tensor_gap_system(Index k, Index n, const GapPair& pair);

/// 3x3 block unitary [[0,0,1],[1,0,0],[0,w,0]].
CMatrix cyclic_block_unitary(const CMatrix& w);

/// On M_3 (x) M_k (x) M_n: z1 = blockdiag(u(x)1, u(x)1, v(x)1),
/// z2 = cyclic_block_unitary(w), eta = 1e7 (1 + kappa^6), target 1 (x) 1 (x) M_n.
/// Throws DomainError on a missing certificate or a non-unitary w.
RelativeGapSystem cyclic_gap_system(Index k, Index n, const CMatrix& w, const GapPair& pair);

struct RelativeGapAudit {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;  // min of eta * sum ||[z_i,x]|| - ||x - E(x)||
  /// max of ||x - E(x)|| / sum ||[z_i,x]||: the smallest eta the samples allow.
  double empirical_eta = 0.0;
};

/// Half the samples are Hermitian, half general complex Gaussian.
/// `eta` <= 0 means use the system's eta.
RelativeGapAudit audit_relative_gap(const RelativeGapSystem& sys, std::size_t samples, Seed seed,
                                    double eta = 0.0);

struct BlockCommutatorParts {
  double commutator_sq = 0.0;  // ||[d,x]||_2^2 in dimension 3N
  double block_sum_sq = 0.0;   // sum_ij ||d_i x_ij d_j^* - x_ij||_2^2, each in dimension N
  double max_block = 0.0;      // max_ij ||d_i x_ij d_j^* - x_ij||_2
};

/// For d = blockdiag(d_0, d_1, d_2). With normalized norms
/// commutator_sq = block_sum_sq / 3 exactly.
BlockCommutatorParts block_commutator_parts(const std::vector<CMatrix>& d_blocks, const CMatrix& x);

/// Unitaries z_alpha, t_beta on a tensor product; only (coupled_z,
/// coupled_t) may fail to commute.
struct ReductionAssembly {
  TensorLegs legs;
  std::vector<SparseCMatrix> z;
  std::vector<SparseCMatrix> t;
  std::size_t coupled_z = 0;
  std::size_t coupled_t = 0;
};

/// Legs (k, n, m). z = (a.u (x) 1 (x) 1, a.v (x) 1 (x) 1, sum_i e_ii (x) U_i (x) 1),
/// t = (1 (x) 1 (x) c.u, 1 (x) 1 (x) c.v, sum_j 1 (x) V_j (x) e_jj).
ReductionAssembly product_reduction_assembly(const std::vector<CMatrix>& us,
                                             const std::vector<CMatrix>& vs, const GapPair& a,
                                             const GapPair& c);

/// Legs (3, k, n, m, 3) with W = sum e_ii (x) U_i, W' = sum V_j (x) e_jj:
/// z1 = blockdiag(a.u, a.u, a.v) on legs (0,1), z2 = cyclic_block_unitary(W) on legs (0,1,2),
/// t1 = the mirror of z1 on legs (3,4) built from c, t2 = the mirror of z2 on legs (2,3,4).
ReductionAssembly cyclic_reduction_assembly(const std::vector<CMatrix>& us,
                                            const std::vector<CMatrix>& vs, const GapPair& a,
                                            const GapPair& c);

/// (1/km) sum_ij ||[U_i, V_j]||_2^2
double averaged_commutator_sq(const std::vector<CMatrix>& us, const std::vector<CMatrix>& vs);

double sparse_hs_norm(const SparseCMatrix& x);
SparseCMatrix sparse_commutator(const SparseCMatrix& a, const SparseCMatrix& b);

struct CommutatorEntry {
  std::size_t alpha = 0;  // 0-based index into z
  std::size_t beta = 0;   // 0-based index into t
  double hs_norm = 0.0;
  bool exactly_zero = false;  // every stored entry is exactly 0.0
};

std::vector<CommutatorEntry> commutator_table(const ReductionAssembly& a);
/// max over all members of ||x^* x - 1||_max
double max_unitarity_defect(const ReductionAssembly& a);

}  // namespace acnum
