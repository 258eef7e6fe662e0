#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "precgd/certify.hpp"
#include "precgd/optimizers.hpp"

namespace precgd {

enum class ProblemKind { MatrixSensing, OneBit, PhaseRetrieval };
std::string toString(ProblemKind p);

struct InitConfig {
  enum class Kind { NearTruth, Random } kind = Kind::NearTruth;
  double radius = 1e-2;
  double scale = 1.0;
};

struct PerturbParams {
  double etaFixed;
  double beta;
  long period;
  double epsThreshold;
};

struct ExperimentConfig {
  std::string name;
  ProblemKind problem = ProblemKind::MatrixSensing;
  Index n = 0;
  Index rStar = 0;
  Index r = 0;
  std::vector<double> spectrum;  ///< resolved from `spectrum` or `kappa`
  Index m = 0;                   ///< resolved to 3nr when omitted (not used by one_bit)
  bool normalizeMeasurements = false;

  std::vector<Method> methods;
  std::map<Method, double> alpha;
  EtaMode etaMode = EtaMode::Adaptive;
  double eta0 = 0.0;
  EtaExponent etaExponent = EtaExponent::HalfPower;
  std::optional<PerturbParams> perturb;
  std::optional<StationarityThresholds> switchThresholds;

  InitConfig init;
  long maxIters = 1000;
  double tolError = 0.0;
  std::optional<double> tolGrad;
  double targetError = 1e-10;  ///< reporting threshold for iterations-to-tolerance and the rate window
  std::vector<std::uint64_t> seeds;

  long certifyEvery = 10;
  std::string certificate = "euclidean";  ///< or "local"
  EigenConfig eigen;

  std::filesystem::path outputDir = "precgd-out";
};

/// Parses and validates a JSON config; unknown keys are rejected.
ExperimentConfig parseConfig(const std::filesystem::path& path);
ExperimentConfig parseConfigText(const std::string& text);

/// Resolved config (defaults filled) as pretty JSON text.
std::string resolvedConfigJson(const ExperimentConfig& cfg);

}  // namespace precgd
