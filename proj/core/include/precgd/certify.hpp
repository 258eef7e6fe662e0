#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "precgd/cost_model.hpp"

namespace precgd {

/// lambda_min(X^TX).
double rankDeficiency(const Matrix& X);

struct EigenConfig {
  int blockSize = 1;
  double tol = 1e-10;  ///< relative change of the shifted Rayleigh quotient
  long maxIters = 5000;
  /// Upper bound on lambda_max; estimated by 30 unshifted steps when absent.
  std::optional<double> shift;
  std::uint64_t seed = 0;
  bool forceFiniteDifference = false;
};

struct EigenEstimate {
  double value = 0.0;
  long hessianProducts = 0;
  long iterations = 0;
  bool converged = false;
  double shift = 0.0;
};

using MatrixOperator = std::function<Matrix(const Matrix&)>;

/// Smallest eigenvalue of a symmetric operator on rows x cols matrices by block
/// power iteration on (shift I - op) with Rayleigh-Ritz extraction.
EigenEstimate minEigenvalue(const MatrixOperator& op, Index rows, Index cols, const EigenConfig& cfg = {});

/// lambda_min of Hess f(X); analytic products when available, forward
/// differences otherwise.
EigenEstimate minHessEig(const CostModel& model, const Matrix& X, const EigenConfig& cfg = {});

struct CertificateInputs {
  /// Bound on |Hess phi(XX^T)|; defaults to the model's L1 (times 1.05 when
  /// the model's constant is an estimate).
  std::optional<double> l1Bound;
  /// Bound on tr(M*) = |X*|_F^2. Required.
  std::optional<double> traceBound;
  std::optional<double> mu;
  std::optional<double> lambdaRStar;
  /// Verdict thresholds.
  double targetGap = 1e-6;       ///< certified when bound <= targetGap * max(1, |f|)
  double stationaryTol = 1e-8;   ///< eps_g and eps_H below this count as stationary
  double rankFloor = 1e-8;       ///< eps_lambda above this counts as full rank
};

enum class Verdict { CertifiedNearOptimal, Undetermined, LikelySpurious };
std::string toString(Verdict v);

struct CertificateReport {
  std::string kind;  ///< "euclidean" or "local"
  double eta = 0.0;
  double f = 0.0;
  double epsG = 0.0, epsH = 0.0, epsLambda = 0.0;
  double cG = 0.0, cH = 0.0, cLambda = 0.0;
  double bound = 0.0;
  Verdict verdict = Verdict::Undetermined;
  long powerItersUsed = 0;
  bool eigenConverged = false;
};

double defaultL1Bound(const CostModel& model);

/// f(X) - f* <= C_g eps_g + C_H eps_H + C_lambda eps_lambda with
/// C_g = |X|_F / 2, C_H = tr / 2, C_lambda = 2 L1 tr.
CertificateReport certificateEuclidean(const CostModel& model, const Matrix& X, const CertificateInputs& inputs,
                                       const EigenConfig& eig = {});

/// Same bound measured in the local norm of P = X^TX + eta I:
/// C_g eps_g + C_H eps_H (eps_lambda + eta) + C_lambda eps_lambda.
CertificateReport certificateLocal(const CostModel& model, const Matrix& X, double eta,
                                   const CertificateInputs& inputs, const EigenConfig& eig = {});

struct StationarityThresholds {
  double epsG;
  double epsH;
  double rho;
};

/// |grad f|_F <= eps_g, lambda_min(Hess f) >= -eps_H, lambda_min(X^TX) <= rho.
/// The eigenvalue estimate only runs when the cheap clauses pass.
bool stationarityCheck(const CostModel& model, const Matrix& X, const StationarityThresholds& t,
                       const EigenConfig& eig = {});

struct TruthInfo {
  double mu;
  double l1;
  double lambdaRStar;
  double traceMStar;
  Index rStar;
};

struct SpuriousClassification {
  bool spurious;
  double threshold;
  double rankDeficiency;
};

/// At a second-order stationary Z with r > r*: spurious iff
/// lambda_min(Z^TZ) > mu / (4 (L1 + mu)) * lambda_{r*}^2 / tr(M*).
SpuriousClassification classifySpurious(const Matrix& Z, const TruthInfo& info);
double spuriousThreshold(const TruthInfo& info);

}  // namespace precgd
