#include "precgd/certify.hpp"

#include <algorithm>
#include <cmath>

#include "precgd/errors.hpp"
#include "precgd/factored.hpp"
#include "precgd/rng.hpp"

namespace precgd {
namespace {

constexpr int kShiftSteps = 30;
constexpr int kStableSteps = 3;

Matrix orthonormalize(const Matrix& B) {
  Eigen::HouseholderQR<Matrix> qr(B);
  return qr.householderQ() * Matrix::Identity(B.rows(), B.cols());
}

/// Applies op column-wise to a block whose columns are vec'd rows x cols
/// matrices.
Matrix applyBlock(const MatrixOperator& op, const Matrix& V, Index rows, Index cols, long& count) {
  Matrix out(V.rows(), V.cols());
  for (Index j = 0; j < V.cols(); ++j) {
    const Matrix arg = Eigen::Map<const Matrix>(V.col(j).data(), rows, cols);
    const Matrix h = op(arg);
    out.col(j) = Eigen::Map<const Vector>(h.data(), h.size());
    ++count;
  }
  return out;
}

Vector ritzValues(const Matrix& V, const Matrix& W) {
  const Matrix T = V.transpose() * W;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Verdict decide(const CertificateReport& rep, const CertificateInputs& in) {
  if (rep.bound <= in.targetGap * std::max(1.0, std::abs(rep.f))) return Verdict::CertifiedNearOptimal;
  if (rep.epsG <= in.stationaryTol && rep.epsH <= in.stationaryTol && rep.epsLambda > in.rankFloor)
    return Verdict::LikelySpurious;
  return Verdict::Undetermined;
}

double requireTrace(const CertificateInputs& in) {
  if (!in.traceBound)
    throw CapabilityError(
        "certificate constants C_H and C_lambda need a bound on tr(M*) = |X*|_F^2; supply trace_bound");
  if (!(*in.traceBound > 0.0)) throw ParameterError("trace_bound must be positive");
  return *in.traceBound;
}

double resolveL1(const CostModel& model, const CertificateInputs& in) {
  const double l1 = in.l1Bound ? *in.l1Bound : defaultL1Bound(model);
  if (!(l1 > 0.0)) throw ParameterError("L1 bound must be positive");
  return l1;
}

}  // namespace

std::string toString(Verdict v) {
  switch (v) {
    case Verdict::CertifiedNearOptimal: return "certified-near-optimal";
    case Verdict::LikelySpurious: return "likely-spurious";
    case Verdict::Undetermined: break;
  }
  return "undetermined";
}

double rankDeficiency(const Matrix& X) {
  if (X.cols() == 0) return 0.0;
  const Matrix gram = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()(0));
}

EigenEstimate minEigenvalue(const MatrixOperator& op, Index rows, Index cols, const EigenConfig& cfg) {
  const Index dim = rows * cols;
  if (!(cfg.tol > 0.0)) throw ParameterError("eigen tolerance must be positive");
  if (cfg.maxIters < 1) throw ParameterError("eigen max_iters must be positive");
  if (cfg.blockSize < 1 || cfg.blockSize > dim) throw ParameterError("block size must lie in [1, n r]");
  const Index b = cfg.blockSize;

  EigenEstimate est;
  Rng rng = Rng::stream(cfg.seed, streams::kEigenStart);
  Matrix V = orthonormalize(rng.gaussianMatrix(dim, b));

  double shift;
  if (cfg.shift) {
    shift = *cfg.shift;
  } else {
    double top = 0.0;
    Matrix U = V;
    for (int k = 0; k < kShiftSteps; ++k) {
      const Matrix HU = applyBlock(op, U, rows, cols, est.hessianProducts);
      top = std::max(top, HU.colwise().norm().maxCoeff());
      if (HU.norm() == 0.0) break;
      U = orthonormalize(HU);
    }
    shift = top > 0.0 ? 1.1 * top : 1.0;
  }

  double previous = std::numeric_limits<double>::quiet_NaN();
  int stable = 0;
  double best = 0.0;
  for (long it = 0; it < cfg.maxIters; ++it) {
    ++est.iterations;
    const Matrix HV = applyBlock(op, V, rows, cols, est.hessianProducts);
    const Vector hRitz = ritzValues(V, HV);
    if (hRitz(hRitz.size() - 1) > shift) {
      shift = 1.1 * hRitz(hRitz.size() - 1);
      stable = 0;
      previous = std::numeric_limits<double>::quiet_NaN();
    }
    const Matrix W = shift * V - HV;
    const Vector sRitz = ritzValues(V, W);
    const double q = sRitz(sRitz.size() - 1);
    best = shift - q;
    if (std::isfinite(previous) && std::abs(q - previous) <= cfg.tol * std::abs(q)) {
      if (++stable >= kStableSteps) {
        est.converged = true;
        break;
      }
    } else {
      stable = 0;
    }
    previous = q;
    if (W.norm() == 0.0) {
      est.converged = true;
      break;
    }
    V = orthonormalize(W);
  }
  est.value = best;
  est.shift = shift;
  return est;
}

EigenEstimate minHessEig(const CostModel& model, const Matrix& X, const EigenConfig& cfg) {
  validateFactor(model, X);
  const auto action = cfg.forceFiniteDifference ? finiteDifferenceHessianAt(model, X) : hessianActionAt(model, X);
  return minEigenvalue([&](const Matrix& V) { return action->apply(V); }, X.rows(), X.cols(), cfg);
}

double defaultL1Bound(const CostModel& model) {
  const auto& lip = model.lipschitz();
  return lip.gradientEstimated ? 1.05 * lip.gradient : lip.gradient;
}

CertificateReport certificateEuclidean(const CostModel& model, const Matrix& X, const CertificateInputs& inputs,
                                       const EigenConfig& eig) {
  const double tr = requireTrace(inputs);
  const double l1 = resolveL1(model, inputs);
  const auto fg = costAndGradient(model, X);
  const EigenEstimate lam = minHessEig(model, X, eig);

  CertificateReport rep;
  rep.kind = "euclidean";
  rep.f = fg.value;
  rep.epsG = fg.gradient.norm();
  rep.epsH = std::max(0.0, -lam.value);
  rep.epsLambda = rankDeficiency(X);
  rep.cG = 0.5 * X.norm();
  rep.cH = 0.5 * tr;
  rep.cLambda = 2.0 * l1 * tr;
  rep.bound = rep.cG * rep.epsG + rep.cH * rep.epsH + rep.cLambda * rep.epsLambda;
  rep.powerItersUsed = lam.hessianProducts;
  rep.eigenConverged = lam.converged;
  rep.verdict = decide(rep, inputs);
  return rep;
}

CertificateReport certificateLocal(const CostModel& model, const Matrix& X, double eta,
                                   const CertificateInputs& inputs, const EigenConfig& eig) {
  const double tr = requireTrace(inputs);
  const double l1 = resolveL1(model, inputs);
  const auto fg = costAndGradient(model, X);
  const LocalNormContext ctx(X, eta);
  const auto action = eig.forceFiniteDifference ? finiteDifferenceHessianAt(model, X) : hessianActionAt(model, X);
  const EigenEstimate lam = minEigenvalue(
      [&](const Matrix& W) { return ctx.applyPower(action->apply(ctx.applyPower(W, -0.5)), -0.5); }, X.rows(),
      X.cols(), eig);

  const Matrix gram = X.transpose() * X;
  CertificateReport rep;
  rep.kind = "local";
  rep.eta = eta;
  rep.f = fg.value;
  rep.epsG = dualLocalNorm(ctx, fg.gradient);
  rep.epsH = std::max(0.0, -lam.value);
  rep.epsLambda = rankDeficiency(X);
  rep.cG = 0.5 * std::sqrt(gram.squaredNorm() + eta * X.squaredNorm());
  rep.cH = 0.5 * tr;
  rep.cLambda = 2.0 * l1 * tr;
  rep.bound = rep.cG * rep.epsG + rep.cH * rep.epsH * (rep.epsLambda + eta) + rep.cLambda * rep.epsLambda;
  rep.powerItersUsed = lam.hessianProducts;
  rep.eigenConverged = lam.converged;
  rep.verdict = decide(rep, inputs);
  return rep;
}

bool stationarityCheck(const CostModel& model, const Matrix& X, const StationarityThresholds& t,
                       const EigenConfig& eig) {
  if (!(t.epsG > 0.0) || !(t.epsH > 0.0) || !(t.rho > 0.0))
    throw ParameterError("stationarity thresholds must be positive");
  if (gradient(model, X).norm() > t.epsG) return false;
  if (rankDeficiency(X) > t.rho) return false;
  return minHessEig(model, X, eig).value >= -t.epsH;
}

double spuriousThreshold(const TruthInfo& info) {
  if (!(info.mu > 0.0) || !(info.l1 > 0.0) || !(info.lambdaRStar > 0.0) || !(info.traceMStar > 0.0))
    throw ParameterError("mu, L1, lambda_r* and tr(M*) must be positive");
  return info.mu / (4.0 * (info.l1 + info.mu)) * info.lambdaRStar * info.lambdaRStar / info.traceMStar;
}

SpuriousClassification classifySpurious(const Matrix& Z, const TruthInfo& info) {
  if (Z.cols() <= info.rStar)
    throw CapabilityError("spurious-point classification needs search rank r > r*");
  const double threshold = spuriousThreshold(info);
  const double lam = rankDeficiency(Z);
  return {lam > threshold, threshold, lam};
}

}  // namespace precgd
