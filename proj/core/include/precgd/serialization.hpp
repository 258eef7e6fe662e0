#pragma once

#include <filesystem>

#include "precgd/problems.hpp"

namespace precgd {

// Flat binary layout: 8-byte magic, then uint64 n, r_star, m, seed, then
// r_star spectrum doubles, then the row-major payload. Little-endian.

void writeGroundTruth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth readGroundTruth(const std::filesystem::path& path);

void writeSensingOperator(const std::filesystem::path& path, const SensingOperator& op);
SensingOperator readSensingOperator(const std::filesystem::path& path);

}  // namespace precgd
