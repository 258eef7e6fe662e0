#pragma once

#include <memory>
#include <vector>

#include "precgd/problems.hpp"

namespace fixture {

using precgd::Index;
using precgd::Matrix;

struct Instance {
  precgd::GroundTruth truth;
  std::shared_ptr<const precgd::CostModel> model;
};

inline precgd::GroundTruth truth(Index n, Index rStar, double kappa, std::uint64_t seed) {
  const auto s = precgd::spectrumForKappa(rStar, kappa);
  return precgd::generateGroundTruth(n, s, seed);
}

inline Instance sensing(Index n, Index rStar, Index r, std::uint64_t seed, bool normalize = false, double kappa = 1.0) {
  auto gt = truth(n, rStar, kappa, seed);
  auto model = precgd::matrixSensingModel(gt, r, 0, seed, normalize);
  return {gt, model};
}

inline Instance oneBit(Index n, Index rStar, std::uint64_t seed, double kappa = 1.0) {
  auto gt = truth(n, rStar, kappa, seed);
  return {gt, precgd::oneBitModel(gt)};
}

inline Instance phase(Index n, Index rStar, Index r, std::uint64_t seed, bool normalize = false) {
  auto gt = truth(n, rStar, 1.0, seed);
  return {gt, precgd::phaseRetrievalModel(gt, precgd::defaultMeasurements(n, r), seed, normalize)};
}

/// One small instance of each problem family (n = 8, r* = 2, r = 3).
inline std::vector<Instance> all(std::uint64_t seed) {
  return {sensing(8, 2, 3, seed), oneBit(8, 2, seed), phase(8, 2, 3, seed)};
}

}  // namespace fixture
