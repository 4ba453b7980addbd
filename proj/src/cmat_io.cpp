#include "acnum/cmat_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

namespace acnum {

namespace {

void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want)
    throw FormatError("expected '" + want + "' but found '" + tok + "'");
}

// Body of a CMAT block after its "CMAT" magic has been consumed.
CMatrix read_cmat_body(std::istream& is) {
  expect_token(is, "v1");
  long long dim = 0;
  if (!(is >> dim) || dim < 1) throw FormatError("CMAT: bad dimension");
  CMatrix x(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw FormatError("CMAT: truncated entry list");
      x(i, j) = Complex(re, im);
    }
  }
  if (!x.allFinite()) throw FormatError("CMAT: non-finite entry");
  return x;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return is;
}

}  // namespace

void write_cmat(std::ostream& os, const CMatrix& x) {
  require_square(x, "write_cmat");
  os << "CMAT v1 " << x.rows() << '\n' << std::setprecision(17);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) os << x(i, j).real() << ' ' << x(i, j).imag() << '\n';
}

CMatrix read_cmat(std::istream& is) {
  expect_token(is, "CMAT");
  return read_cmat_body(is);
}

void write_cmat_pair(std::ostream& os, const CMatrix& a, const CMatrix& b) {
  os << "CMAT2 v1\n";
  write_cmat(os, a);
  write_cmat(os, b);
}

std::pair<CMatrix, CMatrix> read_cmat_pair(std::istream& is) {
  std::string magic;
  if (!(is >> magic)) throw FormatError("CMAT2: empty input");
  CMatrix first;
  if (magic == "CMAT2") {
    expect_token(is, "v1");
    first = read_cmat(is);
  } else if (magic == "CMAT") {
    first = read_cmat_body(is);
  } else {
    throw FormatError("CMAT2: unknown header '" + magic + "'");
  }
  CMatrix second = read_cmat(is);
  if (first.rows() != second.rows()) throw FormatError("CMAT2: matrices differ in dimension");
  return {std::move(first), std::move(second)};
}

void write_salg(std::ostream& os, Index ambient_dim, const std::vector<CMatrix>& basis) {
  os << "SALG v1 " << ambient_dim << ' ' << basis.size() << '\n';
  for (const CMatrix& b : basis) {
    if (b.rows() != ambient_dim) throw DimensionError("write_salg: basis element has wrong dimension");
    write_cmat(os, b);
  }
}

std::vector<CMatrix> read_salg(std::istream& is, Index* ambient_dim) {
  expect_token(is, "SALG");
  expect_token(is, "v1");
  long long dim = 0, count = 0;
  if (!(is >> dim >> count) || dim < 1 || count < 0) throw FormatError("SALG: bad header");
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) {
    basis.push_back(read_cmat(is));
    if (basis.back().rows() != dim) throw FormatError("SALG: basis element has wrong dimension");
  }
  if (ambient_dim) *ambient_dim = dim;
  return basis;
}

void save_cmat(const std::string& path, const CMatrix& x) {
  auto os = open_out(path);
  write_cmat(os, x);
}

CMatrix load_cmat(const std::string& path) {
  auto is = open_in(path);
  return read_cmat(is);
}

void save_cmat_pair(const std::string& path, const CMatrix& a, const CMatrix& b) {
  auto os = open_out(path);
  write_cmat_pair(os, a, b);
}

std::pair<CMatrix, CMatrix> load_cmat_pair(const std::string& path) {
  auto is = open_in(path);
  return read_cmat_pair(is);
}

}  // namespace acnum
