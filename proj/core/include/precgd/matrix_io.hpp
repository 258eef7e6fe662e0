#pragma once

#include <filesystem>
#include <iosfwd>

#include "precgd/cost_model.hpp"

namespace precgd {

// Text format: a header line "n r", then n rows of r whitespace-separated
// doubles.

Matrix readFactor(std::istream& in);
Matrix readFactorFile(const std::filesystem::path& path);
void writeFactor(std::ostream& out, const Matrix& X);
void writeFactorFile(const std::filesystem::path& path, const Matrix& X);

}  // namespace precgd
