// cmat_io.hpp - plain-text matrix files.
//
//   CMAT v1 <dim>          followed by dim^2 lines "re im", row-major
//   CMAT2 v1               followed by two CMAT v1 blocks
//   SALG v1 <dim> <count>  followed by `count` CMAT v1 blocks
//
// Floats are written with 17 significant digits so files round-trip exactly.

#pragma once

#include "acnum/linalg.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acnum {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_cmat(std::ostream& os, const CMatrix& x);
CMatrix read_cmat(std::istream& is);

void write_cmat_pair(std::ostream& os, const CMatrix& a, const CMatrix& b);
/// Accepts the CMAT2 v1 header or two bare CMAT v1 blocks.
std::pair<CMatrix, CMatrix> read_cmat_pair(std::istream& is);

void write_salg(std::ostream& os, Index ambient_dim, const std::vector<CMatrix>& basis);
std::vector<CMatrix> read_salg(std::istream& is, Index* ambient_dim = nullptr);

void save_cmat(const std::string& path, const CMatrix& x);
CMatrix load_cmat(const std::string& path);
void save_cmat_pair(const std::string& path, const CMatrix& a, const CMatrix& b);
std::pair<CMatrix, CMatrix> load_cmat_pair(const std::string& path);

}  // namespace acnum
