#pragma once

#include <memory>
#include <optional>

#include "precgd/cost_model.hpp"

namespace precgd {

/// Checks the FactorMatrix contract: 1 <= r <= n, matching model dimension,
/// finite entries.
void validateFactor(const CostModel& model, const Matrix& X);

/// f(X) = phi(XX^T).
double cost(const CostModel& model, const Matrix& X);

/// Euclidean gradient 2 grad phi(XX^T) X.
Matrix gradient(const CostModel& model, const Matrix& X);

struct CostAndGradient {
  double value;
  Matrix gradient;
};
CostAndGradient costAndGradient(const CostModel& model, const Matrix& X);

/// Hess f(X)[V] = 2 grad phi V + 2 Hess phi[XV^T + VX^T] X.
Matrix hessVec(const CostModel& model, const Matrix& X, const Matrix& V);

/// Forward difference (grad f(X + tV) - grad f(X)) / t. Without `t` the step
/// is 1e-6 max(1, |X|_F) / max(1, |V|_F).
Matrix hessVecFd(const CostModel& model, const Matrix& X, const Matrix& V,
                 std::optional<double> t = std::nullopt);

double defaultFdStep(const Matrix& X, const Matrix& V);

/// Hessian action backed by forward differences of the gradient; grad f(X) is
/// computed once.
std::unique_ptr<HessianAction> finiteDifferenceHessianAt(const CostModel& model, const Matrix& X);

/// Analytic action when the model has one, finite differences otherwise.
std::unique_ptr<HessianAction> hessianActionAt(const CostModel& model, const Matrix& X);

/// Singular values of X below this multiple of sigma_max count as zero for
/// pseudo-inverse powers.
inline constexpr double kPseudoInverseRelTol = 1e-12;

/// Factorisation of P = X^TX + eta I through the thin SVD of X, enough to apply
/// P^{+-1} and P^{+-1/2} on the right of n x r matrices.
class LocalNormContext {
 public:
  LocalNormContext(const Matrix& X, double eta);

  double eta() const { return eta_; }
  /// Same factorisation with a different eta.
  LocalNormContext withEta(double eta) const;
  Index rank() const { return basis_.cols(); }

  /// Eigenvalues of X^TX, descending.
  const Vector& gramEigenvalues() const { return gram_; }
  const Matrix& gramEigenvectors() const { return basis_; }
  double lambdaMinGram() const { return gram_.size() ? gram_(gram_.size() - 1) : 0.0; }

  /// eta = 0 and X^TX is singular to the pseudo-inverse threshold; negative
  /// powers then act as pseudo-inverses.
  bool rankDeficient() const { return rankDeficient_; }

  /// V P^power for power in {1, -1, 1/2, -1/2}.
  Matrix applyPower(const Matrix& V, double power) const;
  Matrix precondition(const Matrix& G) const { return applyPower(G, -1.0); }

  /// P itself, r x r.
  Matrix preconditioner() const;

 private:
  LocalNormContext() = default;

  double eta_ = 0.0;
  Matrix basis_;
  Vector gram_;
  Eigen::Array<bool, Eigen::Dynamic, 1> null_;
  bool rankDeficient_ = false;
};

/// |V P^{1/2}|_F
double localNorm(const LocalNormContext& ctx, const Matrix& V);
/// |V P^{-1/2}|_F
double dualLocalNorm(const LocalNormContext& ctx, const Matrix& V);

}  // namespace precgd
