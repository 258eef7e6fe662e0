#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace precgd {

/// Reproducible generator: mt19937_64 engine, 53-bit uniforms, Box-Muller
/// normals. Output is identical across standard libraries, unlike
/// std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from (seed, tag).
  static Rng stream(std::uint64_t seed, std::uint64_t tag);

  /// Uniform in [0, 1).
  double uniform();
  double normal();

  Eigen::MatrixXd gaussianMatrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream tags so that each random object of an experiment draws from its
/// own sequence.
namespace streams {
inline constexpr std::uint64_t kGroundTruth = 1;
inline constexpr std::uint64_t kMeasurements = 2;
inline constexpr std::uint64_t kInitialPoint = 3;
inline constexpr std::uint64_t kPerturbation = 4;
inline constexpr std::uint64_t kEigenStart = 5;
inline constexpr std::uint64_t kProbes = 6;
}  // namespace streams

}  // namespace precgd
