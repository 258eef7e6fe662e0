#include "precgd/factored.hpp"

#include <cmath>

#include "precgd/errors.hpp"

namespace precgd {
namespace {

void requireFinite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " is not finite");
}

void requireFinite(const Matrix& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
}

void requireSameShape(const Matrix& X, const Matrix& V) {
  if (X.rows() != V.rows() || X.cols() != V.cols())
    throw ShapeError("direction is " + std::to_string(V.rows()) + "x" + std::to_string(V.cols()) +
                     ", factor is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
}

class FdHessianAction final : public HessianAction {
 public:
  FdHessianAction(const CostModel& model, const Matrix& X)
      : model_(model), X_(X), G_(gradient(model, X)) {}

  Matrix apply(const Matrix& V) const override {
    requireSameShape(X_, V);
    if (V.squaredNorm() == 0.0) return Matrix::Zero(V.rows(), V.cols());
    const double t = defaultFdStep(X_, V);
    return (2.0 * model_.gradientTimesFactorAt(X_ + t * V) - G_) / t;
  }

 private:
  const CostModel& model_;
  Matrix X_;
  Matrix G_;
};

}  // namespace

void validateFactor(const CostModel& model, const Matrix& X) {
  if (X.rows() != model.dimension())
    throw ShapeError("factor has " + std::to_string(X.rows()) + " rows, model dimension is " +
                     std::to_string(model.dimension()));
  if (X.cols() < 1 || X.cols() > X.rows())
    throw ShapeError("search rank " + std::to_string(X.cols()) + " outside [1, n]");
  requireFinite(X, "factor");
}

double cost(const CostModel& model, const Matrix& X) {
  validateFactor(model, X);
  const double f = model.valueAt(X);
  requireFinite(f, "cost");
  return f;
}

Matrix gradient(const CostModel& model, const Matrix& X) {
  validateFactor(model, X);
  Matrix g = 2.0 * model.gradientTimesFactorAt(X);
  requireFinite(g, "gradient");
  return g;
}

CostAndGradient costAndGradient(const CostModel& model, const Matrix& X) {
  validateFactor(model, X);
  auto e = model.evaluateAt(X);
  requireFinite(e.value, "cost");
  e.gradientTimesFactor *= 2.0;
  requireFinite(e.gradientTimesFactor, "gradient");
  return {e.value, std::move(e.gradientTimesFactor)};
}

Matrix hessVec(const CostModel& model, const Matrix& X, const Matrix& V) {
  validateFactor(model, X);
  requireSameShape(X, V);
  Matrix h = model.hessianAt(X)->apply(V);
  requireFinite(h, "Hessian-vector product");
  return h;
}

double defaultFdStep(const Matrix& X, const Matrix& V) {
  return 1e-6 * std::max(1.0, X.norm()) / std::max(1.0, V.norm());
}

Matrix hessVecFd(const CostModel& model, const Matrix& X, const Matrix& V, std::optional<double> t) {
  validateFactor(model, X);
  requireSameShape(X, V);
  if (t && !(*t > 0.0)) throw ParameterError("finite-difference step must be positive");
  if (V.squaredNorm() == 0.0) return Matrix::Zero(V.rows(), V.cols());
  const double step = t ? *t : defaultFdStep(X, V);
  Matrix h = (gradient(model, X + step * V) - gradient(model, X)) / step;
  requireFinite(h, "finite-difference Hessian product");
  return h;
}

std::unique_ptr<HessianAction> finiteDifferenceHessianAt(const CostModel& model, const Matrix& X) {
  validateFactor(model, X);
  return std::make_unique<FdHessianAction>(model, X);
}

std::unique_ptr<HessianAction> hessianActionAt(const CostModel& model, const Matrix& X) {
  validateFactor(model, X);
  if (model.hasHessian()) return model.hessianAt(X);
  return std::make_unique<FdHessianAction>(model, X);
}

LocalNormContext::LocalNormContext(const Matrix& X, double eta) : eta_(eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be finite and nonnegative");
  if (X.cols() < 1 || X.cols() > X.rows()) throw ShapeError("factor must satisfy 1 <= r <= n");
  requireFinite(X, "factor");

  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  basis_ = svd.matrixV();
  gram_ = s.array().square();
  const double cutoff = kPseudoInverseRelTol * (s.size() ? s(0) : 0.0);
  null_ = (s.array() <= cutoff);
  rankDeficient_ = eta == 0.0 && null_.any();
}

LocalNormContext LocalNormContext::withEta(double eta) const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be finite and nonnegative");
  LocalNormContext out = *this;
  out.eta_ = eta;
  out.rankDeficient_ = eta == 0.0 && null_.any();
  return out;
}

Matrix LocalNormContext::applyPower(const Matrix& V, double power) const {
  if (V.cols() != basis_.rows()) throw ShapeError("direction has the wrong number of columns");
  if (power != 1.0 && power != -1.0 && power != 0.5 && power != -0.5)
    throw ParameterError("supported powers are +-1 and +-1/2");
  Vector scale(gram_.size());
  for (Index i = 0; i < gram_.size(); ++i) {
    const double d = gram_(i) + eta_;
    if (power < 0.0 && eta_ == 0.0 && null_(i))
      scale(i) = 0.0;
    else
      scale(i) = std::pow(d, power);
  }
  const Matrix W = V * basis_;
  return W * scale.asDiagonal() * basis_.transpose();
}

Matrix LocalNormContext::preconditioner() const {
  return basis_ * (gram_.array() + eta_).matrix().asDiagonal() * basis_.transpose();
}

double localNorm(const LocalNormContext& ctx, const Matrix& V) {
  return ctx.applyPower(V, 0.5).norm();
}

double dualLocalNorm(const LocalNormContext& ctx, const Matrix& V) {
  return ctx.applyPower(V, -0.5).norm();
}

}  // namespace precgd
