#include "precgd/optimizers.hpp"

#include <cmath>
#include <limits>

#include "precgd/errors.hpp"
#include "precgd/rng.hpp"

namespace precgd {
namespace {

void requireAlpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("step size alpha must be positive");
}

Matrix checked(Matrix X, std::optional<long> k) {
  if (!X.allFinite()) throw NumericError("iterate became non-finite", k);
  return X;
}

double adaptiveEta(const LocalNormContext& gramOnly, const Matrix& G, EtaExponent exponent) {
  const double raw =
      exponent == EtaExponent::HalfPower ? gramOnly.applyPower(G, -0.5).norm() : gramOnly.applyPower(G, -1.0).norm();
  const double top = gramOnly.gramEigenvalues().size() ? gramOnly.gramEigenvalues()(0) : 0.0;
  return std::max(raw, 1e-30 + std::numeric_limits<double>::epsilon() * top);
}

/// Everything evaluated at one iterate.
struct Point {
  double f;
  Matrix G;
  LocalNormContext gram;  ///< eta = 0
};

Point evaluate(const CostModel& model, const Matrix& X) {
  auto fg = costAndGradient(model, X);
  return {fg.value, std::move(fg.gradient), LocalNormContext(X, 0.0)};
}

IterateRecord baseRecord(const CostModel& model, const Matrix& X, const Point& p, long k, const GroundTruth* truth) {
  IterateRecord rec;
  rec.k = k;
  rec.f = p.f;
  if (model.optimalValue()) rec.fGap = model.suboptimalityAt(X);
  if (truth) rec.errFro = (X * X.transpose() - truth->target()).norm();
  rec.gradFro = p.G.norm();
  rec.lambdaMinGram = p.gram.lambdaMinGram();
  return rec;
}

bool perturbationDue(const SolverState& s, const PerturbConfig& c, double dualAtFixed) {
  return dualAtFixed <= c.epsThreshold && (!s.kLast || s.k >= *s.kLast + c.period);
}

/// PPrecGD update from a point already evaluated; fills eta, dualGrad and
/// perturbed on `rec`.
Matrix perturbedUpdate(const Matrix& X, const Point& p, SolverState& s, const StepConfig& step,
                       const PerturbConfig& c, IterateRecord& rec) {
  const LocalNormContext ctx = p.gram.withEta(c.etaFixed);
  rec.eta = c.etaFixed;
  rec.dualGrad = dualLocalNorm(ctx, p.G);
  Matrix direction = ctx.precondition(p.G);
  if (perturbationDue(s, c, rec.dualGrad)) {
    direction += samplePerturbation(X.rows(), X.cols(), c.beta, c.seed, s.k);
    rec.perturbed = true;
    s.kLast = s.k;
  }
  return checked(X - step.alpha * direction, s.k);
}

}  // namespace

std::string toString(Method m) {
  switch (m) {
    case Method::GD: return "gd";
    case Method::ScaledGD: return "scaledgd";
    case Method::PrecGD: return "precgd";
    case Method::PPrecGD: return "pprecgd";
    case Method::TwoPhase: return "two_phase";
  }
  return "?";
}

std::string toString(EtaMode m) {
  switch (m) {
    case EtaMode::Fixed: return "fixed";
    case EtaMode::Adaptive: return "adaptive";
    case EtaMode::Zero: return "zero";
  }
  return "?";
}

std::string toString(Phase p) { return p == Phase::Global ? "global" : "local"; }

std::string toString(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Converged: return "converged";
    case Status::Stationary: return "stationary";
    case Status::MaxIterations: return "max_iterations";
    case Status::Diverged: return "diverged";
  }
  return "?";
}

std::optional<Method> parseMethod(const std::string& name) {
  for (Method m : {Method::GD, Method::ScaledGD, Method::PrecGD, Method::PPrecGD, Method::TwoPhase})
    if (toString(m) == name) return m;
  return std::nullopt;
}

void StepConfig::validate() const {
  requireAlpha(alpha);
  if (etaMode == EtaMode::Fixed && (!(eta0 >= 0.0) || !std::isfinite(eta0)))
    throw ParameterError("fixed eta must be finite and nonnegative");
  if (maxIters < 0) throw ParameterError("max_iters must be nonnegative");
  if (!(tolError >= 0.0)) throw ParameterError("tol_error must be nonnegative");
  if (tolGrad && !(*tolGrad >= 0.0)) throw ParameterError("tol_grad must be nonnegative");
}

void PerturbConfig::validate() const {
  if (!(etaFixed > 0.0)) throw ParameterError("perturbation eta_fixed must be positive");
  if (!(beta > 0.0)) throw ParameterError("perturbation radius beta must be positive");
  if (period < 1) throw ParameterError("perturbation period must be >= 1");
  if (!(epsThreshold > 0.0)) throw ParameterError("perturbation threshold epsilon must be positive");
}

Matrix gdStep(const CostModel& model, const Matrix& X, double alpha, std::optional<long> k) {
  requireAlpha(alpha);
  return checked(X - alpha * gradient(model, X), k);
}

ScaledStep scaledGdStep(const CostModel& model, const Matrix& X, double alpha, std::optional<long> k) {
  requireAlpha(alpha);
  const LocalNormContext ctx(X, 0.0);
  return {checked(X - alpha * ctx.precondition(gradient(model, X)), k), ctx.rankDeficient()};
}

Matrix precgdStep(const CostModel& model, const Matrix& X, double alpha, double eta, std::optional<long> k) {
  requireAlpha(alpha);
  const LocalNormContext ctx(X, eta);
  return checked(X - alpha * ctx.precondition(gradient(model, X)), k);
}

double etaFloor(const Matrix& X) {
  const double top = X.cols() ? (X.transpose() * X).selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff() : 0.0;
  return 1e-30 + std::numeric_limits<double>::epsilon() * top;
}

double etaAdaptive(const CostModel& model, const Matrix& X, EtaExponent exponent) {
  return adaptiveEta(LocalNormContext(X, 0.0), gradient(model, X), exponent);
}

Matrix samplePerturbation(Index n, Index r, double beta, std::uint64_t seed, long k) {
  if (!(beta >= 0.0)) throw ParameterError("perturbation radius must be nonnegative");
  Rng rng = Rng::stream(splitmix64(seed) + static_cast<std::uint64_t>(k), streams::kPerturbation);
  Matrix Z = rng.gaussianMatrix(n, r);
  const double norm = Z.norm();
  if (norm == 0.0) return Matrix::Zero(n, r);
  const double radius = beta * std::pow(rng.uniform(), 1.0 / static_cast<double>(n * r));
  return Z * (radius / norm);
}

SolverState pprecgdStep(const CostModel& model, SolverState state, const StepConfig& step,
                        const PerturbConfig& perturb, const GroundTruth* truth) {
  requireAlpha(step.alpha);
  perturb.validate();
  const Point p = evaluate(model, state.X);
  IterateRecord rec = baseRecord(model, state.X, p, state.k, truth);
  rec.phase = state.phase;
  state.X = perturbedUpdate(state.X, p, state, step, perturb, rec);
  state.trace.push_back(rec);
  ++state.k;
  return state;
}

SolverState runSolver(const CostModel& model, const Matrix& X0, Method method, const StepConfig& step,
                      const RunOptions& options) {
  step.validate();
  validateFactor(model, X0);
  const bool perturbed = method == Method::PPrecGD || method == Method::TwoPhase;
  if (perturbed) {
    if (!options.perturb) throw ParameterError(toString(method) + " needs a perturbation config");
    options.perturb->validate();
  }
  if (method == Method::TwoPhase && !options.switchThresholds)
    throw ParameterError("two_phase needs phase-switch thresholds");

  SolverState state;
  state.X = X0;
  state.phase = method == Method::TwoPhase || method == Method::PPrecGD ? Phase::Global : Phase::Local;
  if (method == Method::GD || method == Method::ScaledGD || method == Method::PrecGD) state.phase = Phase::Local;

  double f0 = 0.0;
  double tolGrad = 0.0;
  // Last iterate at which a tiny perturbed-phase gradient was checked for
  // negative curvature, so a saddle is probed only once.
  std::optional<long> curvatureProbed;

  for (;;) {
    const long k = state.k;
    std::optional<Point> point;
    try {
      point.emplace(evaluate(model, state.X));
    } catch (const NumericError& e) {
      state.status = Status::Diverged;
      state.diagnostic = std::string("non-finite objective at iteration ") + std::to_string(k) + ": " + e.what();
      return state;
    }
    const Point& p = *point;
    if (k == 0) {
      f0 = p.f;
      tolGrad = step.tolGrad ? *step.tolGrad : 1e-14 * std::max(1.0, f0);
    }

    if (method == Method::TwoPhase && state.phase == Phase::Global &&
        stationarityCheck(model, state.X, *options.switchThresholds, options.switchEigen)) {
      state.phase = Phase::Local;
      state.switchIteration = k;
    }

    IterateRecord rec = baseRecord(model, state.X, p, k, options.truth);
    rec.phase = state.phase;
    const bool usePerturbed = perturbed && state.phase == Phase::Global;

    double eta = 0.0;
    if (usePerturbed) {
      eta = options.perturb->etaFixed;
    } else if (method == Method::PrecGD || method == Method::TwoPhase) {
      const EtaMode mode = method == Method::TwoPhase ? EtaMode::Adaptive : step.etaMode;
      if (mode == EtaMode::Adaptive)
        eta = adaptiveEta(p.gram, p.G, step.etaExponent);
      else if (mode == EtaMode::Fixed)
        eta = step.eta0;
    }
    const LocalNormContext ctx = eta == 0.0 ? p.gram : p.gram.withEta(eta);
    rec.eta = eta;
    rec.dualGrad = dualLocalNorm(ctx, p.G);
    rec.rankDeficient = ctx.rankDeficient();

    const bool observe = options.observer && options.observeEvery > 0 && k % options.observeEvery == 0;
    auto finish = [&](Status status, std::string diagnostic = {}) {
      if (options.observer && !observe) options.observer(state.X, rec);
      state.trace.push_back(rec);
      state.status = status;
      state.diagnostic = std::move(diagnostic);
      return state;
    };
    if (observe) options.observer(state.X, rec);

    if (step.tolError > 0.0 && rec.errFro && *rec.errFro <= step.tolError) return finish(Status::Converged);
    if (rec.gradFro <= tolGrad) {
      if (!usePerturbed) return finish(Status::Stationary);
      if (curvatureProbed != k) {
        curvatureProbed = k;
        EigenConfig eig = options.switchEigen;
        if (minHessEig(model, state.X, eig).value >= -options.perturb->epsThreshold)
          return finish(Status::Stationary);
      }
    }
    if (p.f > options.divergenceFactor * std::abs(f0) && p.f > f0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "objective %.6g exceeds %.0fx initial value %.6g at iteration %ld", p.f,
                    options.divergenceFactor, f0, k);
      return finish(Status::Diverged, buf);
    }
    if (k >= step.maxIters) return finish(Status::MaxIterations);

    try {
      if (usePerturbed) {
        state.X = perturbedUpdate(state.X, p, state, step, *options.perturb, rec);
      } else if (method == Method::GD) {
        state.X = checked(state.X - step.alpha * p.G, k);
      } else {
        state.X = checked(state.X - step.alpha * ctx.precondition(p.G), k);
      }
    } catch (const NumericError& e) {
      return finish(Status::Diverged, e.what());
    }
    state.trace.push_back(rec);
    ++state.k;
  }
}

double precgdLipschitz(double l1, double cLowerBound) {
  if (!(l1 > 0.0) || !(cLowerBound > 0.0)) throw ParameterError("L1 and C_lb must be positive");
  return 4.0 * l1 + (2.0 * l1 + 8.0 * l1 * l1) / cLowerBound + 4.0 * l1 * l1 * l1 / (cLowerBound * cLowerBound);
}

double precgdTheoreticalStep(double l1, double cLowerBound) {
  return std::min(1.0, 1.0 / precgdLipschitz(l1, cLowerBound));
}

double localLipschitzBound(double l1, double errFro, double stepLocalNorm, double lambdaMinGram, double eta) {
  const double d = lambdaMinGram + eta;
  if (!(d > 0.0)) throw ParameterError("lambda_min(X^TX) + eta must be positive");
  const double ratio = stepLocalNorm / d;
  return l1 * (4.0 + (2.0 * errFro + 4.0 * stepLocalNorm) / d + ratio * ratio);
}

PerturbDefaults perturbTheoryDefaults(double l1, double l2, double gamma, double eta, double eps) {
  if (!(l1 > 0.0) || !(l2 >= 0.0) || !(gamma > 0.0) || !(eta > 0.0) || !(eps > 0.0))
    throw ParameterError("perturbation theory defaults need positive L1, Gamma, eta, eps and L2 >= 0");
  PerturbDefaults d;
  d.l1 = 9.0 * gamma * gamma * l1;
  const double ell2 = (4.0 * gamma + 2.0) * l1 + 4.0 * gamma * gamma * l2;
  d.ld = 5.0 * std::max(ell2, 2.0 * gamma * d.l1 * std::sqrt(gamma * gamma + eta)) / std::pow(eta, 2.5);
  d.alpha = eta / d.l1;
  d.beta = eps / d.ld;
  d.period = static_cast<long>(std::ceil(l1 * gamma * gamma / (eta * std::sqrt(d.ld * eps))));
  d.period = std::max(1L, d.period);
  return d;
}

}  // namespace precgd
