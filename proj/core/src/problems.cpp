#include "precgd/problems.hpp"

#include <cmath>

#include "precgd/errors.hpp"
#include "precgd/rng.hpp"

namespace precgd {
namespace {

constexpr int kPowerSteps = 20;

/// 20 power steps on a PSD map over symmetric matrices; returns the final
/// Rayleigh quotient.
template <class Map>
double powerEstimate(Index n, std::uint64_t seed, Map&& op) {
  Rng rng = Rng::stream(seed, streams::kProbes);
  Matrix E = rng.gaussianMatrix(n, n);
  E = 0.5 * (E + E.transpose()).eval();
  E /= E.norm();
  double lambda = 0.0;
  for (int k = 0; k < kPowerSteps; ++k) {
    Matrix F = op(E);
    lambda = (E.array() * F.array()).sum();
    const double norm = F.norm();
    if (norm == 0.0) break;
    E = F / norm;
  }
  return lambda;
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------- ground truth

Matrix GroundTruth::paddedFactor(Index r) const {
  if (r < rank()) throw ParameterError("search rank below ground-truth rank");
  Matrix Z = Matrix::Zero(n(), r);
  Z.leftCols(rank()) = factor;
  return Z;
}

GroundTruth generateGroundTruth(Index n, std::span<const double> spectrum, std::uint64_t seed) {
  if (n < 1) throw ParameterError("n must be positive");
  const Index rStar = static_cast<Index>(spectrum.size());
  if (rStar < 1 || rStar > n) throw ParameterError("spectrum length must lie in [1, n]");
  for (Index i = 0; i < rStar; ++i) {
    if (!(spectrum[i] > 0.0) || !std::isfinite(spectrum[i]))
      throw ParameterError("spectrum entries must be positive and finite");
    if (i > 0 && spectrum[i] > spectrum[i - 1]) throw ParameterError("spectrum must be sorted descending");
  }

  Rng rng = Rng::stream(seed, streams::kGroundTruth);
  const Matrix G = rng.gaussianMatrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  const Matrix& R = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);

  GroundTruth gt;
  gt.seed = seed;
  gt.spectrum = Eigen::Map<const Vector>(spectrum.data(), rStar);
  gt.factor.resize(n, rStar);
  for (Index i = 0; i < rStar; ++i) gt.factor.col(i) = std::sqrt(spectrum[i]) * Q.row(i).transpose();
  return gt;
}

std::vector<double> spectrumForKappa(Index rStar, double kappa) {
  if (rStar < 1) throw ParameterError("r_star must be positive");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ParameterError("kappa must be >= 1");
  std::vector<double> out(rStar);
  for (Index i = 0; i < rStar; ++i)
    out[i] = rStar == 1 ? 1.0 : std::pow(kappa, -static_cast<double>(i) / static_cast<double>(rStar - 1));
  out.back() = 1.0 / kappa;
  return out;
}

Matrix initNearTruth(const GroundTruth& truth, Index r, double radius, std::uint64_t seed) {
  if (r < truth.rank()) throw ParameterError("search rank r must be >= r_star");
  if (r > truth.n()) throw ParameterError("search rank r must be <= n");
  if (!(radius >= 0.0)) throw ParameterError("radius must be nonnegative");
  Matrix X = truth.paddedFactor(r);
  if (radius > 0.0) X += radius * Rng::stream(seed, streams::kInitialPoint).gaussianMatrix(truth.n(), r);
  return X;
}

Matrix randomInit(Index n, Index r, double scale, std::uint64_t seed) {
  if (n < 1 || r < 1 || r > n) throw ParameterError("need 1 <= r <= n");
  if (!(scale > 0.0)) throw ParameterError("scale must be positive");
  return scale * Rng::stream(seed, streams::kInitialPoint).gaussianMatrix(n, r);
}

// ------------------------------------------------------------ sensing operator

SensingOperator SensingOperator::sample(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw ParameterError("sensing operator needs n >= 1 and m >= 1");
  SensingOperator op;
  op.n = n;
  op.seed = seed;
  op.rows.resize(m, n * n);
  Rng rng = Rng::stream(seed, streams::kMeasurements);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n * n; ++j) op.rows(i, j) = rng.normal();
  return op;
}

Matrix SensingOperator::matrix(Index i) const {
  Matrix A(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) A(j, k) = rows(i, j * n + k);
  return A;
}

Vector SensingOperator::apply(const Matrix& M) const {
  if (M.rows() != n || M.cols() != n) throw ShapeError("sensing operator: argument must be n x n");
  const Matrix Mt = M.transpose();
  return rows * Eigen::Map<const Vector>(Mt.data(), n * n);
}

Matrix SensingOperator::adjoint(const Vector& y) const {
  if (y.size() != m()) throw ShapeError("sensing adjoint: argument must have m entries");
  const Vector v = rows.transpose() * y;
  return Eigen::Map<const Matrix>(v.data(), n, n).transpose();
}

// -------------------------------------------------------------- matrix sensing

class SensingHessianAction final : public HessianAction {
 public:
  SensingHessianAction(const MatrixSensingCost& model, const Matrix& X) : X_(X) {
    const Index n = X.rows(), r = X.cols(), m = model.measurements();
    const Matrix M = X * X.transpose();
    G_ = model.gradient(M);
    J_.resize(m, n * r);
    for (Index i = 0; i < m; ++i) {
      const Matrix T = 2.0 * model.unpack(model.packed_.row(i).transpose()) * X;
      J_.row(i) = Eigen::Map<const Vector>(T.data(), n * r).transpose();
    }
  }

  Matrix apply(const Matrix& V) const override {
    if (V.rows() != X_.rows() || V.cols() != X_.cols()) throw ShapeError("direction shape mismatch");
    const Vector jv = J_ * Eigen::Map<const Vector>(V.data(), V.size());
    const Vector back = J_.transpose() * jv;
    return 2.0 * G_ * V + 2.0 * Eigen::Map<const Matrix>(back.data(), V.rows(), V.cols());
  }

 private:
  Matrix X_;
  Matrix G_;
  Matrix J_;  ///< row i = vec(2 S_i X)
};

MatrixSensingCost::MatrixSensingCost(const GroundTruth& truth, const SensingOperator& op, bool normalize)
    : CostModel(truth.n(), {}), normalized_(normalize) {
  if (op.n != truth.n()) throw ShapeError("sensing operator and ground truth disagree on n");
  const Index n = truth.n(), m = op.m();
  const double s = normalize ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
  packed_.resize(m, n * (n + 1) / 2);
  for (Index i = 0; i < m; ++i) {
    Index p = 0;
    for (Index j = 0; j < n; ++j) {
      packed_(i, p++) = s * op.rows(i, j * n + j);
      for (Index k = j + 1; k < n; ++k) packed_(i, p++) = s * (op.rows(i, j * n + k) + op.rows(i, k * n + j));
    }
  }
  b_ = packed_ * pack(truth.target());

  LipschitzConstants lip;
  lip.gradient = 2.0 * powerEstimate(n, op.seed, [&](const Matrix& E) { return measureAdjoint(measure(E)); });
  lip.gradientEstimated = true;
  lip.hessian = 0.0;
  setLipschitz(lip);
}

Vector MatrixSensingCost::pack(const Matrix& M) const {
  const Index n = dimension();
  Vector p(n * (n + 1) / 2);
  Index q = 0;
  for (Index j = 0; j < n; ++j) {
    p(q++) = M(j, j);
    for (Index k = j + 1; k < n; ++k) p(q++) = 0.5 * (M(j, k) + M(k, j));
  }
  return p;
}

Matrix MatrixSensingCost::unpack(const Vector& p) const {
  const Index n = dimension();
  Matrix M(n, n);
  Index q = 0;
  for (Index j = 0; j < n; ++j) {
    M(j, j) = p(q++);
    for (Index k = j + 1; k < n; ++k) M(j, k) = M(k, j) = 0.5 * p(q++);
  }
  return M;
}

Vector MatrixSensingCost::measure(const Matrix& M) const {
  checkSquare(M);
  return packed_ * pack(M);
}

Matrix MatrixSensingCost::measureAdjoint(const Vector& y) const {
  if (y.size() != measurements()) throw ShapeError("adjoint argument must have m entries");
  return unpack(packed_.transpose() * y);
}

double MatrixSensingCost::value(const Matrix& M) const {
  checkSquare(M);
  return residual(M).squaredNorm();
}

Matrix MatrixSensingCost::gradient(const Matrix& M) const {
  checkSquare(M);
  return 2.0 * unpack(packed_.transpose() * residual(M));
}

Matrix MatrixSensingCost::hessian(const Matrix& M, const Matrix& E) const {
  checkSquare(M);
  checkSquare(E);
  return 2.0 * unpack(packed_.transpose() * (packed_ * pack(E)));
}

double MatrixSensingCost::valueAt(const Matrix& X) const {
  checkFactor(X);
  return residual(X * X.transpose()).squaredNorm();
}

Matrix MatrixSensingCost::gradientTimesFactorAt(const Matrix& X) const {
  checkFactor(X);
  return gradient(X * X.transpose()) * X;
}

CostModel::Evaluation MatrixSensingCost::evaluateAt(const Matrix& X) const {
  checkFactor(X);
  const Vector res = residual(X * X.transpose());
  return {res.squaredNorm(), 2.0 * unpack(packed_.transpose() * res) * X};
}

std::unique_ptr<HessianAction> MatrixSensingCost::hessianAt(const Matrix& X) const {
  checkFactor(X);
  return std::make_unique<SensingHessianAction>(*this, X);
}

// ---------------------------------------------------------------------- 1-bit

OneBitCost::OneBitCost(const GroundTruth& truth)
    : CostModel(truth.n(), {}), target_(truth.target()) {
  alpha_ = target_.unaryExpr([](double x) { return sigmoid(x); });
  optimal_ = value(target_);
  LipschitzConstants lip;
  lip.gradient = 0.25;
  setLipschitz(lip);
}

double OneBitCost::value(const Matrix& M) const {
  checkSquare(M);
  double total = 0.0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) total += softplus(M(i, j)) - alpha_(i, j) * M(i, j);
  return total;
}

Matrix OneBitCost::gradient(const Matrix& M) const {
  checkSquare(M);
  return M.unaryExpr([](double x) { return sigmoid(x); }) - alpha_;
}

Matrix OneBitCost::hessian(const Matrix& M, const Matrix& E) const {
  checkSquare(M);
  checkSquare(E);
  const Matrix d = M.unaryExpr([](double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
  });
  return d.cwiseProduct(E);
}

double OneBitCost::suboptimalityAt(const Matrix& X) const {
  checkFactor(X);
  const Matrix M = X * X.transpose();
  // Bregman divergence of softplus around M*, i.e. the Bernoulli cumulant
  // generating function minus its linear term.
  double total = 0.0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) {
      const double d = M(i, j) - target_(i, j);
      const double p = alpha_(i, j);
      if (std::abs(d) < 1e-3) {
        const double k2 = p * (1.0 - p);
        const double k3 = k2 * (1.0 - 2.0 * p);
        const double k4 = k2 * (1.0 - 6.0 * k2);
        const double k5 = k3 * (1.0 - 12.0 * k2);
        total += d * d * (k2 / 2.0 + d * (k3 / 6.0 + d * (k4 / 24.0 + d * k5 / 120.0)));
      } else {
        total += std::log1p(p * std::expm1(d)) - p * d;
      }
    }
  return total;
}

// ------------------------------------------------------------ phase retrieval

class PhaseHessianAction final : public HessianAction {
 public:
  PhaseHessianAction(const PhaseRetrievalCost& model, const Matrix& X) : model_(model) {
    B_ = model.a_ * X;
    res_ = B_.array().square().rowwise().sum().matrix() - model.y_;
  }

  Matrix apply(const Matrix& V) const override {
    if (V.rows() != model_.a_.cols() || V.cols() != B_.cols()) throw ShapeError("direction shape mismatch");
    const Matrix C = model_.a_ * V;
    const Vector q = 2.0 * (B_.array() * C.array()).rowwise().sum();
    const Matrix W = res_.asDiagonal() * C + q.asDiagonal() * B_;
    return 4.0 * model_.weight_ * model_.a_.transpose() * W;
  }

 private:
  const PhaseRetrievalCost& model_;
  Matrix B_;
  Vector res_;
};

PhaseRetrievalCost::PhaseRetrievalCost(const GroundTruth& truth, Index m, std::uint64_t seed, bool normalize)
    : CostModel(truth.n(), {}) {
  if (m < 1) throw ParameterError("phase retrieval needs m >= 1");
  a_ = Rng::stream(seed, streams::kMeasurements).gaussianMatrix(m, truth.n());
  y_ = (a_ * truth.factor).array().square().rowwise().sum();
  weight_ = normalize ? 1.0 / static_cast<double>(m) : 1.0;

  LipschitzConstants lip;
  lip.gradient = 2.0 * weight_ * powerEstimate(truth.n(), seed, [&](const Matrix& E) {
                   return Matrix(a_.transpose() * quadratic(E).asDiagonal() * a_);
                 });
  lip.gradientEstimated = true;
  lip.hessian = 0.0;
  setLipschitz(lip);
}

Vector PhaseRetrievalCost::quadratic(const Matrix& M) const {
  return ((a_ * M).array() * a_.array()).rowwise().sum();
}

double PhaseRetrievalCost::value(const Matrix& M) const {
  checkSquare(M);
  return weight_ * (quadratic(M) - y_).squaredNorm();
}

Matrix PhaseRetrievalCost::gradient(const Matrix& M) const {
  checkSquare(M);
  const Vector res = quadratic(M) - y_;
  return 2.0 * weight_ * a_.transpose() * res.asDiagonal() * a_;
}

Matrix PhaseRetrievalCost::hessian(const Matrix& M, const Matrix& E) const {
  checkSquare(M);
  checkSquare(E);
  return 2.0 * weight_ * a_.transpose() * quadratic(E).asDiagonal() * a_;
}

double PhaseRetrievalCost::valueAt(const Matrix& X) const {
  checkFactor(X);
  const Matrix B = a_ * X;
  return weight_ * (B.array().square().rowwise().sum().matrix() - y_).squaredNorm();
}

Matrix PhaseRetrievalCost::gradientTimesFactorAt(const Matrix& X) const {
  return evaluateAt(X).gradientTimesFactor;
}

CostModel::Evaluation PhaseRetrievalCost::evaluateAt(const Matrix& X) const {
  checkFactor(X);
  const Matrix B = a_ * X;
  const Vector res = B.array().square().rowwise().sum().matrix() - y_;
  return {weight_ * res.squaredNorm(), 2.0 * weight_ * a_.transpose() * (res.asDiagonal() * B)};
}

std::unique_ptr<HessianAction> PhaseRetrievalCost::hessianAt(const Matrix& X) const {
  checkFactor(X);
  return std::make_unique<PhaseHessianAction>(*this, X);
}

// ------------------------------------------------------------------ factories

std::shared_ptr<const MatrixSensingCost> matrixSensingModel(const GroundTruth& truth, Index r, Index m,
                                                            std::uint64_t seed, bool normalize) {
  if (m == 0) m = defaultMeasurements(truth.n(), r);
  if (m < 1) throw ParameterError("m must be positive");
  return std::make_shared<const MatrixSensingCost>(truth, SensingOperator::sample(truth.n(), m, seed), normalize);
}

std::shared_ptr<const OneBitCost> oneBitModel(const GroundTruth& truth) {
  return std::make_shared<const OneBitCost>(truth);
}

std::shared_ptr<const PhaseRetrievalCost> phaseRetrievalModel(const GroundTruth& truth, Index m,
                                                              std::uint64_t seed, bool normalize) {
  return std::make_shared<const PhaseRetrievalCost>(truth, m, seed, normalize);
}

}  // namespace precgd
