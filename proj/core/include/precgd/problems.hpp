#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "precgd/cost_model.hpp"

namespace precgd {

/// M* = ZZ^T with Z n x r*; columns of Z are orthogonal with squared norms
/// equal to the spectrum.
struct GroundTruth {
  Matrix factor;
  Vector spectrum;  ///< descending, positive
  std::uint64_t seed = 0;

  Index n() const { return factor.rows(); }
  Index rank() const { return factor.cols(); }
  double kappa() const { return spectrum(0) / spectrum(spectrum.size() - 1); }
  double trace() const { return spectrum.sum(); }
  double lambdaMin() const { return spectrum(spectrum.size() - 1); }
  Matrix target() const { return factor * factor.transpose(); }
  /// Z with r - r* zero columns appended.
  Matrix paddedFactor(Index r) const;
};

/// M* = Q^T diag(spectrum, 0, ...) Q with Q Haar-distributed.
GroundTruth generateGroundTruth(Index n, std::span<const double> spectrum, std::uint64_t seed);

/// r* values spaced geometrically from 1 down to 1/kappa.
std::vector<double> spectrumForKappa(Index rStar, double kappa);

/// m Gaussian n x n matrices A_i, stored as rows of an m x n^2 matrix
/// (row i = A_i in row-major order).
struct SensingOperator {
  Index n = 0;
  std::uint64_t seed = 0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;

  Index m() const { return rows.rows(); }
  Matrix matrix(Index i) const;

  /// (<A_i, M>)_i
  Vector apply(const Matrix& M) const;
  /// sum_i y_i A_i
  Matrix adjoint(const Vector& y) const;

  static SensingOperator sample(Index n, Index m, std::uint64_t seed);
};

/// Default measurement count 3nr.
inline Index defaultMeasurements(Index n, Index r) { return 3 * n * r; }

/// phi(M) = |A(M) - b|^2 with b = A(M*). With `normalize` the operator is
/// scaled by 1/sqrt(m), i.e. phi / m.
class MatrixSensingCost final : public CostModel {
 public:
  MatrixSensingCost(const GroundTruth& truth, const SensingOperator& op, bool normalize = false);

  std::string name() const override { return "matrix_sensing"; }
  Index measurements() const { return packed_.rows(); }
  bool normalized() const { return normalized_; }

  double value(const Matrix& M) const override;
  Matrix gradient(const Matrix& M) const override;
  bool hasHessian() const override { return true; }
  Matrix hessian(const Matrix& M, const Matrix& E) const override;

  double valueAt(const Matrix& X) const override;
  Matrix gradientTimesFactorAt(const Matrix& X) const override;
  Evaluation evaluateAt(const Matrix& X) const override;
  std::unique_ptr<HessianAction> hessianAt(const Matrix& X) const override;

  std::optional<double> optimalValue() const override { return 0.0; }
  double suboptimalityAt(const Matrix& X) const override { return valueAt(X); }

  /// Model operator (including any normalisation) applied to symmetric M.
  Vector measure(const Matrix& M) const;
  /// Adjoint of measure() onto symmetric matrices.
  Matrix measureAdjoint(const Vector& y) const;

 private:
  Vector pack(const Matrix& M) const;
  Matrix unpack(const Vector& p) const;
  Vector residual(const Matrix& M) const { return packed_ * pack(M) - b_; }

  Matrix packed_;  ///< m x n(n+1)/2, off-diagonal coefficients doubled
  Vector b_;
  bool normalized_;

  friend class SensingHessianAction;
};

/// phi(M) = sum_ij softplus(M_ij) - alpha_ij M_ij with alpha = sigmoid(M*).
class OneBitCost final : public CostModel {
 public:
  explicit OneBitCost(const GroundTruth& truth);

  std::string name() const override { return "one_bit"; }
  const Matrix& alpha() const { return alpha_; }
  const Matrix& target() const { return target_; }

  double value(const Matrix& M) const override;
  Matrix gradient(const Matrix& M) const override;
  bool hasHessian() const override { return true; }
  Matrix hessian(const Matrix& M, const Matrix& E) const override;

  std::optional<double> optimalValue() const override { return optimal_; }
  double suboptimalityAt(const Matrix& X) const override;

 private:
  Matrix target_;
  Matrix alpha_;
  double optimal_;
};

/// phi(M) = sum_i (a_i^T M a_i - y_i)^2 with y_i = a_i^T M* a_i. With
/// `normalize` the sum is divided by m.
class PhaseRetrievalCost final : public CostModel {
 public:
  PhaseRetrievalCost(const GroundTruth& truth, Index m, std::uint64_t seed, bool normalize = false);

  std::string name() const override { return "phase_retrieval"; }
  Index measurements() const { return a_.rows(); }
  /// m x n, row i = a_i^T.
  const Matrix& vectors() const { return a_; }

  double value(const Matrix& M) const override;
  Matrix gradient(const Matrix& M) const override;
  bool hasHessian() const override { return true; }
  Matrix hessian(const Matrix& M, const Matrix& E) const override;

  double valueAt(const Matrix& X) const override;
  Matrix gradientTimesFactorAt(const Matrix& X) const override;
  Evaluation evaluateAt(const Matrix& X) const override;
  std::unique_ptr<HessianAction> hessianAt(const Matrix& X) const override;

  std::optional<double> optimalValue() const override { return 0.0; }
  double suboptimalityAt(const Matrix& X) const override { return valueAt(X); }

 private:
  Vector quadratic(const Matrix& M) const;

  Matrix a_;
  Vector y_;
  double weight_;

  friend class PhaseHessianAction;
};

std::shared_ptr<const MatrixSensingCost> matrixSensingModel(const GroundTruth& truth, Index r, Index m,
                                                            std::uint64_t seed, bool normalize = false);
std::shared_ptr<const OneBitCost> oneBitModel(const GroundTruth& truth);
std::shared_ptr<const PhaseRetrievalCost> phaseRetrievalModel(const GroundTruth& truth, Index m,
                                                              std::uint64_t seed, bool normalize = false);

/// Z_pad + radius w with w standard Gaussian n x r.
Matrix initNearTruth(const GroundTruth& truth, Index r, double radius, std::uint64_t seed);
/// scale * standard Gaussian n x r.
Matrix randomInit(Index n, Index r, double scale, std::uint64_t seed);

/// log(1 + e^x) without overflow.
double softplus(double x);
double sigmoid(double x);

}  // namespace precgd
