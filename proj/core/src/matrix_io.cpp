#include "precgd/matrix_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "precgd/errors.hpp"

namespace precgd {

Matrix readFactor(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("factor file: missing header");
  std::istringstream header(line);
  long n = 0, r = 0;
  if (!(header >> n >> r) || n < 1 || r < 1) throw IoError("factor file: header must be 'n r' with n, r >= 1");
  std::string extra;
  if (header >> extra) throw IoError("factor file: trailing text in header");

  Matrix X(n, r);
  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw IoError("factor file: expected " + std::to_string(n) + " rows");
    std::istringstream row(line);
    for (long j = 0; j < r; ++j) {
      std::string tok;
      if (!(row >> tok)) throw IoError("factor file: row " + std::to_string(i + 1) + " is short");
      try {
        std::size_t used = 0;
        X(i, j) = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw IoError("factor file: bad number '" + tok + "' in row " + std::to_string(i + 1));
      }
      if (!std::isfinite(X(i, j))) throw IoError("factor file: non-finite entry in row " + std::to_string(i + 1));
    }
    if (row >> extra) throw IoError("factor file: row " + std::to_string(i + 1) + " has extra entries");
  }
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw IoError("factor file: trailing rows");
  return X;
}

Matrix readFactorFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return readFactor(in);
}

void writeFactor(std::ostream& out, const Matrix& X) {
  out << X.rows() << ' ' << X.cols() << '\n';
  char buf[32];
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", X(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

void writeFactorFile(const std::filesystem::path& path, const Matrix& X) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writeFactor(out, X);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace precgd
