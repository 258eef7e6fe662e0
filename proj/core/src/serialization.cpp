#include "precgd/serialization.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "precgd/errors.hpp"

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

namespace precgd {
namespace {

using Magic = std::array<char, 8>;
constexpr Magic kTruthMagic{'P', 'G', 'D', 'T', 'R', 'U', 'T', 'H'};
constexpr Magic kSensingMagic{'P', 'G', 'D', 'S', 'E', 'N', 'S', 'E'};

struct Header {
  std::uint64_t n, rStar, m, seed;
};

std::ofstream openOut(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream openIn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void writeHeader(std::ofstream& out, const Magic& magic, const Header& h) {
  out.write(magic.data(), magic.size());
  const std::uint64_t words[4] = {h.n, h.rStar, h.m, h.seed};
  out.write(reinterpret_cast<const char*>(words), sizeof(words));
}

Header readHeader(std::ifstream& in, const Magic& magic, const std::filesystem::path& path) {
  Magic got{};
  in.read(got.data(), got.size());
  if (!in || got != magic) throw IoError(path.string() + ": bad magic");
  std::uint64_t words[4];
  in.read(reinterpret_cast<char*>(words), sizeof(words));
  if (!in) throw IoError(path.string() + ": truncated header");
  return {words[0], words[1], words[2], words[3]};
}

void writeDoubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void readDoubles(std::ifstream& in, double* data, std::size_t count, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated payload");
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace

void writeGroundTruth(const std::filesystem::path& path, const GroundTruth& truth) {
  auto out = openOut(path);
  writeHeader(out, kTruthMagic,
              {static_cast<std::uint64_t>(truth.n()), static_cast<std::uint64_t>(truth.rank()), 0, truth.seed});
  writeDoubles(out, truth.spectrum.data(), truth.spectrum.size());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = truth.factor;
  writeDoubles(out, rows.data(), rows.size());
  finish(out, path);
}

GroundTruth readGroundTruth(const std::filesystem::path& path) {
  auto in = openIn(path);
  const Header h = readHeader(in, kTruthMagic, path);
  if (h.n == 0 || h.rStar == 0 || h.rStar > h.n || h.n > (1u << 20)) throw IoError(path.string() + ": bad header");
  GroundTruth gt;
  gt.seed = h.seed;
  gt.spectrum.resize(static_cast<Index>(h.rStar));
  readDoubles(in, gt.spectrum.data(), h.rStar, path);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(h.n, h.rStar);
  readDoubles(in, rows.data(), rows.size(), path);
  gt.factor = rows;
  return gt;
}

void writeSensingOperator(const std::filesystem::path& path, const SensingOperator& op) {
  auto out = openOut(path);
  writeHeader(out, kSensingMagic,
              {static_cast<std::uint64_t>(op.n), 0, static_cast<std::uint64_t>(op.m()), op.seed});
  writeDoubles(out, op.rows.data(), op.rows.size());
  finish(out, path);
}

SensingOperator readSensingOperator(const std::filesystem::path& path) {
  auto in = openIn(path);
  const Header h = readHeader(in, kSensingMagic, path);
  if (h.n == 0 || h.m == 0 || h.n > (1u << 16) || h.m > (1u << 30)) throw IoError(path.string() + ": bad header");
  SensingOperator op;
  op.n = static_cast<Index>(h.n);
  op.seed = h.seed;
  op.rows.resize(static_cast<Index>(h.m), op.n * op.n);
  readDoubles(in, op.rows.data(), op.rows.size(), path);
  return op;
}

}  // namespace precgd
