#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace precgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct LipschitzConstants {
  double gradient = 0.0;  ///< L1
  /// True when `gradient` is a numerical estimate (e.g. power iteration)
  /// rather than an analytic constant.
  bool gradientEstimated = false;
  std::optional<double> hessian;              ///< L2
  std::optional<double> restrictedConvexity;  ///< mu
};

/// The map V -> Hess f(X)[V] for one fixed X. Implementations cache whatever
/// depends only on X, so repeated products (power iteration) stay cheap.
class HessianAction {
 public:
  virtual ~HessianAction() = default;
  virtual Matrix apply(const Matrix& V) const = 0;
};

/// A smooth convex cost phi over symmetric n x n matrices together with the
/// factored forms consumed by f(X) = phi(XX^T).
///
/// Dense oracles take M directly. The `...At(X)` entry points take the factor;
/// the base class materialises XX^T, subclasses override when the structure
/// allows something cheaper. Models are immutable once built and every member
/// is safe to call concurrently.
class CostModel {
 public:
  CostModel(Index dimension, LipschitzConstants lipschitz)
      : dimension_(dimension), lipschitz_(lipschitz) {}
  virtual ~CostModel() = default;

  CostModel(const CostModel&) = delete;
  CostModel& operator=(const CostModel&) = delete;

  Index dimension() const { return dimension_; }
  const LipschitzConstants& lipschitz() const { return lipschitz_; }
  virtual std::string name() const = 0;

  virtual double value(const Matrix& M) const = 0;
  virtual Matrix gradient(const Matrix& M) const = 0;
  virtual bool hasHessian() const { return false; }
  /// Hess phi(M)[E]. Throws CapabilityError when hasHessian() is false.
  virtual Matrix hessian(const Matrix& M, const Matrix& E) const;

  struct Evaluation {
    double value;
    Matrix gradientTimesFactor;  ///< grad phi(XX^T) X, n x r
  };

  virtual double valueAt(const Matrix& X) const;
  virtual Matrix gradientTimesFactorAt(const Matrix& X) const;
  virtual Evaluation evaluateAt(const Matrix& X) const;

  /// Analytic Hessian action of f at X. Throws CapabilityError without an
  /// analytic Hessian.
  virtual std::unique_ptr<HessianAction> hessianAt(const Matrix& X) const;

  /// phi(M*) when the model knows its minimiser.
  virtual std::optional<double> optimalValue() const { return std::nullopt; }
  /// f(X) - f(X*). The default subtracts optimalValue(); models whose values
  /// are large sums override it with a cancellation-free form.
  virtual double suboptimalityAt(const Matrix& X) const;

 protected:
  void checkFactor(const Matrix& X) const;
  void checkSquare(const Matrix& M) const;
  void setLipschitz(const LipschitzConstants& lipschitz) { lipschitz_ = lipschitz; }

 private:
  Index dimension_;
  LipschitzConstants lipschitz_;
};

}  // namespace precgd
