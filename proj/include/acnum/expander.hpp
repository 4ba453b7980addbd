// expander.hpp - moment superoperators of unitary tuples and spectral-gap
// pairs.
//
// For u = (u_1..u_k), T_u(x) = sum u_i x u_i^*. T_u maps traceless matrices
// to traceless matrices; its norm there (HS geometry) is the restricted norm.

#pragma once

#include "acnum/linalg.hpp"
#include "acnum/random.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace acnum {

struct UnitaryTuple {
  Index dim = 0;
  std::vector<CMatrix> members;

  /// Throws DomainError unless every member is unitary within tol.
  static UnitaryTuple make(std::vector<CMatrix> members, double tol = 1e-10);
  std::size_t size() const { return members.size(); }
};

CMatrix moment_apply(const UnitaryTuple& u, const CMatrix& x);
/// Adjoint map x -> sum u_i^* x u_i.
CMatrix moment_apply_adjoint(const UnitaryTuple& u, const CMatrix& x);

struct RestrictedNorm {
  double value = 0.0;
  double residual = 0.0;  // worst Lanczos residual over the accepted starts
  int iterations = 0;
};

/// ||T_u^0|| from the top eigenvalue of (T_u^0)^* T_u^0, with the identity
/// direction projected out after every application. Lanczos from `starts`
/// random traceless vectors; the maximum is reported.
RestrictedNorm restricted_norm(const UnitaryTuple& u, double tol = 1e-10,
                               Seed seed = Seed{0x7e57a7ULL}, int starts = 4);

struct GapCertificate {
  double kappa = 0.0;
  double restricted_norm_value = 0.0;
  int trials = 0;
  double max_residual = 0.0;
};

struct GapSearchResult {
  bool found = false;
  int trials_used = 0;
  /// Smallest restricted norm seen (the accepted one on success).
  double best_norm = 0.0;
  GapCertificate certificate;
  CMatrix u1;
  CMatrix u2;
  std::string failure;  // set when !found
};

/// Accepts threshold 2 sqrt(2) + 2 eps on ||T^0_{(p1, p2, 1)}|| where
/// (p1, p2) = (w^* u, w^* v) for a Haar triple (u, v, w). Trial i uses
/// seed.child(i); the first accepted trial in index order wins, so the
/// outcome does not depend on the thread count. The certificate carries
/// kappa = 1 / (3 - measured norm).
GapSearchResult find_gap_pair(Index n, double eps, int max_trials, Seed seed, double tol = 1e-10);

struct CertificateCheck {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// min over samples of kappa(||[u1,x]|| + ||[u2,x]||) - ||x - tau(x)1||.
  double worst_margin = 0.0;
  /// max over samples of ||x - tau(x)1|| / (||[u1,x]|| + ||[u2,x]||).
  double tightest_kappa = 0.0;
};

/// Samples `trials` complex Gaussian x (trace-projected) plus the
/// adversarial candidates u1, u2, u2^* u1 and matrix units. Violations are
/// counted with 1e-9 slack, never thrown.
CertificateCheck gap_certificate_check(const CMatrix& u1, const CMatrix& u2, double kappa,
                                       std::size_t trials, Seed seed);

/// True when ||T^0_{(u1, u2, 1)}|| < 3 and kappa >= 1 / (3 - that norm).
bool gap_hypothesis_holds(const CMatrix& u1, const CMatrix& u2, double kappa, double tol = 1e-10);

struct CornerCheck {
  bool hypothesis_verified = false;
  double lhs = 0.0;  // ||x||_2
  double rhs = 0.0;  // 1e5 kappa^6 (||u1 x v - x|| + ||u2 x v - x||)
  double margin = 0.0;
  bool holds = false;  // only meaningful when hypothesis_verified
};

/// Refuses to assert (holds = false, hypothesis_verified = false) when the
/// gap hypothesis for (u1, u2, kappa) cannot be verified.
CornerCheck corner_check(const CMatrix& u1, const CMatrix& u2, double kappa, const CMatrix& v,
                         const CMatrix& x);

}  // namespace acnum
