#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "precgd/certify.hpp"
#include "precgd/cost_model.hpp"
#include "precgd/factored.hpp"
#include "precgd/problems.hpp"

namespace precgd {

enum class Method { GD, ScaledGD, PrecGD, PPrecGD, TwoPhase };
enum class EtaMode { Fixed, Adaptive, Zero };
/// Power of X^TX in the adaptive rule: -1/2 (default) or -1.
enum class EtaExponent { HalfPower, FullPower };
enum class Phase { Global, Local };
enum class Status { Running, Converged, Stationary, MaxIterations, Diverged };

std::string toString(Method m);
std::string toString(EtaMode m);
std::string toString(Phase p);
std::string toString(Status s);
std::optional<Method> parseMethod(const std::string& name);

struct StepConfig {
  double alpha = 0.0;
  EtaMode etaMode = EtaMode::Adaptive;
  double eta0 = 0.0;  ///< used when etaMode == Fixed
  EtaExponent etaExponent = EtaExponent::HalfPower;
  long maxIters = 1000;
  double tolError = 0.0;  ///< stop on |XX^T - M*|_F <= tolError (needs ground truth)
  /// Stop on |grad f|_F <= tolGrad; defaults to 1e-14 max(1, f(X0)).
  std::optional<double> tolGrad;

  void validate() const;
};

struct PerturbConfig {
  double etaFixed = 0.0;
  double beta = 0.0;
  long period = 1;
  double epsThreshold = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterateRecord {
  long k = 0;
  double f = 0.0;
  std::optional<double> fGap;
  std::optional<double> errFro;
  double eta = 0.0;
  double gradFro = 0.0;
  double dualGrad = 0.0;
  double lambdaMinGram = 0.0;
  std::optional<double> epsG, epsH, epsLambda, certBound;
  bool perturbed = false;
  bool rankDeficient = false;
  Phase phase = Phase::Global;
};

struct SolverState {
  Matrix X;
  long k = 0;
  std::optional<long> kLast;
  Phase phase = Phase::Global;
  std::vector<IterateRecord> trace;
  Status status = Status::Running;
  std::string diagnostic;
  std::optional<long> switchIteration;
};

/// X - alpha grad f(X).
Matrix gdStep(const CostModel& model, const Matrix& X, double alpha, std::optional<long> k = std::nullopt);

struct ScaledStep {
  Matrix X;
  bool rankDeficient;
};
/// X - alpha grad f(X) (X^TX)^+.
ScaledStep scaledGdStep(const CostModel& model, const Matrix& X, double alpha, std::optional<long> k = std::nullopt);

/// X - alpha grad f(X) (X^TX + eta I)^{-1}.
Matrix precgdStep(const CostModel& model, const Matrix& X, double alpha, double eta,
                  std::optional<long> k = std::nullopt);

/// |grad f(X) (X^TX)^{-1/2}|_F (pseudo-inverse), or the (X^TX)^{-1} variant;
/// clamped below by etaFloor(X).
double etaAdaptive(const CostModel& model, const Matrix& X, EtaExponent exponent = EtaExponent::HalfPower);
double etaFloor(const Matrix& X);

/// Uniform sample from the Frobenius ball of radius beta in R^{n x r}. The
/// draw depends only on (seed, k).
Matrix samplePerturbation(Index n, Index r, double beta, std::uint64_t seed, long k);

/// One PPrecGD step from state.X at iteration state.k. Appends the record of
/// X_k and advances to X_{k+1}.
SolverState pprecgdStep(const CostModel& model, SolverState state, const StepConfig& step,
                        const PerturbConfig& perturb, const GroundTruth* truth = nullptr);

struct RunOptions {
  const GroundTruth* truth = nullptr;
  std::optional<PerturbConfig> perturb;
  /// Phase switch predicate thresholds for Method::TwoPhase.
  std::optional<StationarityThresholds> switchThresholds;
  EigenConfig switchEigen;
  /// Called on iterates k with k % observeEvery == 0 (and on the final one).
  std::function<void(const Matrix& X, IterateRecord& rec)> observer;
  long observeEvery = 0;
  double divergenceFactor = 1e3;
};

SolverState runSolver(const CostModel& model, const Matrix& X0, Method method, const StepConfig& step,
                      const RunOptions& options = {});

/// Step-size helpers from the convergence analysis.
/// l = 4L + (2L + 8L^2)/C_lb + 4L^3/C_lb^2.
double precgdLipschitz(double l1, double cLowerBound);
/// min(1, 1/l).
double precgdTheoreticalStep(double l1, double cLowerBound);
/// L [4 + (2 e + 4 v)/(lmin + eta) + (v/(lmin + eta))^2] with e = |XX^T - M*|_F
/// and v = |V|_{X,eta}.
double localLipschitzBound(double l1, double errFro, double stepLocalNorm, double lambdaMinGram, double eta);

struct PerturbDefaults {
  double alpha;
  double beta;
  long period;
  double l1;  ///< 9 Gamma^2 L1
  double ld;
};
/// Parameter prescription for PPrecGD with its logarithmic constants set to 1:
/// alpha = eta / l1, beta = eps / L_d, T = ceil(L1 Gamma^2 / (eta sqrt(L_d eps))).
PerturbDefaults perturbTheoryDefaults(double l1, double l2, double gamma, double eta, double eps);

}  // namespace precgd
