#include "acnum/random.hpp"

#include <algorithm>
#include <cmath>

namespace acnum {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Seed Seed::child(std::uint64_t index) const { return Seed{splitmix64(value ^ index)}; }

Rng::Rng(Seed seed) : engine_(splitmix64(seed.value)) {}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform() { return uniform_(engine_); }

std::uint64_t Rng::below(std::uint64_t bound) {
  std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) * M_SQRT1_2;
}

CMatrix gaussian_matrix(Index dim, Rng& rng) {
  CMatrix g(dim, dim);
  // Fill in a fixed (row-major) order so streams do not depend on storage.
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  return g;
}

CVector gaussian_vector(Index dim, Rng& rng) {
  CVector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v;
}

CMatrix random_hermitian(Index dim, Rng& rng) {
  const CMatrix g = gaussian_matrix(dim, rng);
  return (g + g.adjoint()) * 0.5;
}

CMatrix haar_unitary(Index dim, Rng& rng) {
  if (dim < 1) throw DimensionError("haar_unitary: dim must be positive");
  const CMatrix g = gaussian_matrix(dim, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    const Complex phase = a > 0.0 ? d / a : Complex(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

CMatrix haar_unitary(Index dim, Seed seed) {
  Rng rng(seed);
  return haar_unitary(dim, rng);
}

CMatrix random_positive_contraction(Index dim, Rng& rng) {
  const CMatrix u = haar_unitary(dim, rng);
  Eigen::VectorXd spectrum(dim);
  for (Index i = 0; i < dim; ++i) spectrum(i) = rng.uniform();
  return u * spectrum.cast<Complex>().asDiagonal() * u.adjoint();
}

CMatrix random_projection(Index dim, Rng& rng) {
  const CMatrix u = haar_unitary(dim, rng);
  const Index rank = static_cast<Index>(rng.below(static_cast<std::uint64_t>(dim) + 1));
  const CMatrix cols = u.leftCols(rank);
  return cols * cols.adjoint();
}

CMatrix random_unit_ball(Index dim, Rng& rng) {
  const CMatrix g = gaussian_matrix(dim, rng);
  Eigen::BDCSVD<CMatrix> svd(g);
  const double top = svd.singularValues()(0);
  return top > 0.0 ? CMatrix(g / top) : g;
}

}  // namespace acnum
