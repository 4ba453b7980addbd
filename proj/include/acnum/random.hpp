// random.hpp - seeded sampling: Gaussian ensembles, Haar unitaries and the
// random positive contractions / projections used by the inequality suites.

#pragma once

#include "acnum/linalg.hpp"

#include <cstdint>
#include <random>

namespace acnum {

/// Root of a reproducible sample stream. Identical seeds give bit-identical
/// streams within one build.
struct Seed {
  std::uint64_t value = 0;

  /// Independent child stream for sub-task `index` (splitmix64 of value ^ index).
  Seed child(std::uint64_t index) const;
  friend bool operator==(const Seed&, const Seed&) = default;
};

class Rng {
 public:
  explicit Rng(Seed seed);

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t below(std::uint64_t bound);
  /// (re + i im) / sqrt(2) with re, im standard normal, so E|z|^2 = 1.
  Complex complex_normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

CMatrix gaussian_matrix(Index dim, Rng& rng);
CVector gaussian_vector(Index dim, Rng& rng);
CMatrix random_hermitian(Index dim, Rng& rng);

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of diag(R) moved into Q.
CMatrix haar_unitary(Index dim, Seed seed);
CMatrix haar_unitary(Index dim, Rng& rng);

/// 0 <= h <= 1 with a Haar eigenbasis and uniform spectrum.
CMatrix random_positive_contraction(Index dim, Rng& rng);
/// Orthogonal projection of uniformly random rank in [0, dim] onto a Haar subspace.
CMatrix random_projection(Index dim, Rng& rng);
/// Gaussian matrix rescaled to operator norm 1 (or 0 when dim is degenerate).
CMatrix random_unit_ball(Index dim, Rng& rng);

}  // namespace acnum
