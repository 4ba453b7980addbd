// nearcomm.hpp - contraction pairs built from unitary logarithms, their
// commutation defect, and an alternating least-squares search for a nearby
// pair (A', B') with A'B' = B'A' and A'B'^* = B'^*A'.
//
// No norm cap is imposed on A', B'. Distances found by the descent are upper
// bounds on the true distance to the constraint set.

#pragma once

#include "acnum/linalg.hpp"
#include "acnum/random.hpp"

#include <cstddef>
#include <vector>

namespace acnum {

struct ContractionPair {
  CMatrix a;
  CMatrix b;
};

/// ||[A,B]||_2 + ||[A,B^*]||_2
double defect(const CMatrix& a, const CMatrix& b);

/// HS-orthogonal projection of `a` onto {X : [X,B] = [X,B^*] = 0}.
///
/// The space is split recursively along eigenspaces of random elements of
/// the *-algebra generated by B until B's Hermitian parts compress to
/// scalars; the pieces are then glued along the strongest off-diagonal
/// blocks. Each threshold 1e-9..1e-12 gives a candidate; the candidate
/// nearest to `a` among those commuting with B to 1e-10 is returned. When
/// none does, a frame nullspace solve is used (dim <= 32 only); above that
/// ConvergenceError is thrown.
CMatrix commutant_projection(const CMatrix& a, const CMatrix& b);

struct DescentStep {
  double objective = 0.0;  // ||A-A'||_2^2 + ||B-B'||_2^2
  double defect_a = 0.0;   // ||A-A'||_2
  double defect_b = 0.0;   // ||B-B'||_2
};

struct DescentTrace {
  std::vector<DescentStep> iterations;  // one entry per full sweep of the best run
  CMatrix a_final;
  CMatrix b_final;
  double distance_sq = 0.0;   // best objective
  double distance_sum = 0.0;  // ||A-A'||_2 + ||B-B'||_2 at the best pair
  std::size_t sweeps_used = 0;
  std::size_t restarts = 0;   // runs performed, the raw start included
  std::size_t best_run = 0;
  bool converged = false;
  bool monotone_ok = true;    // every half-step of every run
  std::vector<double> run_objectives;
};

/// Run 0 starts from B' = B. Runs 1..4 start from normal snaps of B (block
/// pinchings in a basis jointly diagonalizing the Hermitian parts of A and
/// B, cluster tolerances 0, 1e-3, 1e-2, 1e-1 relative); later runs from seeded
/// perturbations of B. `restarts` counts the runs after run 0. Each
/// half-step also offers the previous iterate, feasible in exact arithmetic,
/// as a candidate for the projection.
DescentTrace alternating_descent(const CMatrix& a, const CMatrix& b, std::size_t max_sweeps,
                                 std::size_t restarts, Seed seed);

/// h_p = unitary_log(U_p), k_p = unitary_log(V_p); A = h_1 + i h_2, B = k_1 + i k_2.
ContractionPair contraction_pair_from_unitaries(const CMatrix& u1, const CMatrix& u2, const CMatrix& v1,
                                               const CMatrix& v2);

/// Pair from the cyclic reduction assembly fed by the qubit witness family:
/// U's are the first k sigma_z's, V's the first m deformed generators, and
/// the two gap pairs are seeded Haar unitaries of dims k and m.
ContractionPair witness_contraction_pair(std::size_t n, double t, std::size_t k, std::size_t m, Seed seed);

}  // namespace acnum
