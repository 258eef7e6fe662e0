#include "precgd/cost_model.hpp"

#include "precgd/errors.hpp"

namespace precgd {
namespace {

class DenseHessianAction final : public HessianAction {
 public:
  DenseHessianAction(const CostModel& model, const Matrix& X)
      : model_(model), X_(X), M_(X * X.transpose()), G_(model.gradient(M_)) {}

  Matrix apply(const Matrix& V) const override {
    const Matrix E = X_ * V.transpose() + V * X_.transpose();
    return 2.0 * G_ * V + 2.0 * model_.hessian(M_, E) * X_;
  }

 private:
  const CostModel& model_;
  Matrix X_;
  Matrix M_;
  Matrix G_;
};

}  // namespace

Matrix CostModel::hessian(const Matrix&, const Matrix&) const {
  throw CapabilityError(name() + ": no analytic Hessian; use finite differences");
}

double CostModel::valueAt(const Matrix& X) const {
  checkFactor(X);
  return value(X * X.transpose());
}

Matrix CostModel::gradientTimesFactorAt(const Matrix& X) const {
  checkFactor(X);
  return gradient(X * X.transpose()) * X;
}

CostModel::Evaluation CostModel::evaluateAt(const Matrix& X) const {
  return {valueAt(X), gradientTimesFactorAt(X)};
}

std::unique_ptr<HessianAction> CostModel::hessianAt(const Matrix& X) const {
  checkFactor(X);
  if (!hasHessian())
    throw CapabilityError(name() + ": no analytic Hessian; use finite differences");
  return std::make_unique<DenseHessianAction>(*this, X);
}

double CostModel::suboptimalityAt(const Matrix& X) const {
  const auto best = optimalValue();
  if (!best) throw CapabilityError(name() + ": optimal value unknown");
  return valueAt(X) - *best;
}

void CostModel::checkFactor(const Matrix& X) const {
  if (X.rows() != dimension_ || X.cols() < 1)
    throw ShapeError(name() + ": factor has " + std::to_string(X.rows()) + " rows, model dimension is " +
                     std::to_string(dimension_));
}

void CostModel::checkSquare(const Matrix& M) const {
  if (M.rows() != dimension_ || M.cols() != dimension_)
    throw ShapeError(name() + ": expected a " + std::to_string(dimension_) + "x" +
                     std::to_string(dimension_) + " matrix");
}

}  // namespace precgd
