#include "precgd/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "precgd/errors.hpp"
#include "precgd/factored.hpp"

namespace precgd {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

template <class T>
json optional(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json certificateObject(const CertificateReport& r) {
  return {{"kind", r.kind},
          {"eta", r.eta},
          {"f", r.f},
          {"eps_g", r.epsG},
          {"eps_H", r.epsH},
          {"eps_lambda", r.epsLambda},
          {"c_g", r.cG},
          {"c_H", r.cH},
          {"c_lambda", r.cLambda},
          {"bound", r.bound},
          {"verdict", toString(r.verdict)},
          {"power_iters_used", r.powerItersUsed},
          {"eigen_converged", r.eigenConverged}};
}

void ensureWritable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".precgd-write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw IoError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace

std::string libraryVersion() {
#ifdef PRECGD_VERSION
  return PRECGD_VERSION;
#else
  return "unknown";
#endif
}

std::string rngDescription() {
  return "mt19937_64; uniform = (x >> 11) * 2^-53; normals by Box-Muller; streams splitmix64(seed, tag)";
}

std::uint64_t hashMatrix(const Matrix& X) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t shape[2] = {X.rows(), X.cols()};
  mix(shape, sizeof shape);
  mix(X.data(), sizeof(double) * static_cast<std::size_t>(X.size()));
  return h;
}

ProblemInstance buildInstance(const ExperimentConfig& cfg, std::uint64_t seed) {
  ProblemInstance inst;
  inst.truth = generateGroundTruth(cfg.n, cfg.spectrum, seed);
  switch (cfg.problem) {
    case ProblemKind::MatrixSensing:
      inst.model = matrixSensingModel(inst.truth, cfg.r, cfg.m, seed, cfg.normalizeMeasurements);
      break;
    case ProblemKind::OneBit:
      inst.model = oneBitModel(inst.truth);
      break;
    case ProblemKind::PhaseRetrieval:
      inst.model = phaseRetrievalModel(inst.truth, cfg.m, seed, cfg.normalizeMeasurements);
      break;
  }
  inst.X0 = cfg.init.kind == InitConfig::Kind::NearTruth ? initNearTruth(inst.truth, cfg.r, cfg.init.radius, seed)
                                                         : randomInit(cfg.n, cfg.r, cfg.init.scale, seed);
  inst.x0Hash = hashMatrix(inst.X0);
  return inst;
}

CertificateInputs certificateInputs(const ProblemInstance& inst) {
  CertificateInputs in;
  in.traceBound = inst.truth.trace();
  in.lambdaRStar = inst.truth.lambdaMin();
  return in;
}

const std::vector<std::string>& traceColumns() {
  static const std::vector<std::string> cols = {"k",     "f",          "f_gap",           "err_fro", "eta",
                                                "grad_fro", "dual_grad", "lambda_min_gram", "eps_g",   "eps_H",
                                                "eps_lambda", "cert_bound", "perturbed",     "phase"};
  return cols;
}

std::string traceCsv(const std::vector<IterateRecord>& trace) {
  std::string out;
  const auto& cols = traceColumns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.k);
    for (const std::string& v :
         {fmt(r.f), cell(r.fGap), cell(r.errFro), fmt(r.eta), fmt(r.gradFro), fmt(r.dualGrad), fmt(r.lambdaMinGram),
          cell(r.epsG), cell(r.epsH), cell(r.epsLambda), cell(r.certBound)}) {
      out += ',';
      out += v;
    }
    out += r.perturbed ? ",1," : ",0,";
    out += toString(r.phase);
    out += '\n';
  }
  return out;
}

void writeTraceCsv(const fs::path& path, const std::vector<IterateRecord>& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << traceCsv(trace);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

namespace {

std::optional<double> errorOf(const IterateRecord& r) { return r.errFro ? r.errFro : r.fGap; }

}  // namespace

std::optional<long> iterationsToTolerance(const std::vector<IterateRecord>& trace, double targetError) {
  for (const auto& r : trace) {
    const auto e = errorOf(r);
    if (e && *e <= targetError) return r.k;
  }
  return std::nullopt;
}

std::optional<double> estimateRate(const std::vector<IterateRecord>& trace, double targetError) {
  if (trace.empty()) return std::nullopt;
  const long end = iterationsToTolerance(trace, targetError).value_or(trace.back().k);
  const double start = 0.5 * static_cast<double>(end);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (const auto& r : trace) {
    if (r.k < start || r.k > end) continue;
    const auto e = errorOf(r);
    if (!e || !(*e > 0.0) || !std::isfinite(*e)) continue;
    const double x = static_cast<double>(r.k), y = std::log10(*e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 20) return std::nullopt;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / denom;
}

SolverState runMethod(const ExperimentConfig& cfg, const ProblemInstance& inst, Method method, std::uint64_t seed) {
  StepConfig step;
  step.alpha = cfg.alpha.at(method);
  step.etaMode = cfg.etaMode;
  step.eta0 = cfg.eta0;
  step.etaExponent = cfg.etaExponent;
  step.maxIters = cfg.maxIters;
  step.tolError = cfg.tolError;
  step.tolGrad = cfg.tolGrad;

  EigenConfig eig = cfg.eigen;
  eig.seed = seed;

  RunOptions opt;
  opt.truth = &inst.truth;
  if (cfg.perturb)
    opt.perturb = PerturbConfig{cfg.perturb->etaFixed, cfg.perturb->beta, cfg.perturb->period,
                                cfg.perturb->epsThreshold, seed};
  opt.switchThresholds = cfg.switchThresholds;
  opt.switchEigen = eig;

  if (cfg.certifyEvery > 0) {
    const CertificateInputs inputs = certificateInputs(inst);
    const CostModel& model = *inst.model;
    const bool local = cfg.certificate == "local";
    opt.observeEvery = cfg.certifyEvery;
    opt.observer = [&model, inputs, eig, local](const Matrix& X, IterateRecord& rec) {
      try {
        const CertificateReport rep = local ? certificateLocal(model, X, rec.eta, inputs, eig)
                                            : certificateEuclidean(model, X, inputs, eig);
        rec.epsG = rep.epsG;
        rec.epsH = rep.epsH;
        rec.epsLambda = rep.epsLambda;
        rec.certBound = rep.bound;
      } catch (const Error&) {
        // Columns stay empty for this iterate.
      }
    };
  }
  return runSolver(*inst.model, inst.X0, method, step, opt);
}

ExperimentResult runExperiment(const ExperimentConfig& cfg, const HarnessOptions& options) {
  std::ostream& log = options.log ? *options.log : std::cout;
  const fs::path dir = options.outputDir ? *options.outputDir : cfg.outputDir;
  const std::vector<std::uint64_t> seeds = options.seeds ? *options.seeds : cfg.seeds;
  if (seeds.empty()) throw ConfigError("seeds", "no seeds to run");
  ensureWritable(dir);

  ExperimentResult result;
  for (std::uint64_t seed : seeds) {
    const ProblemInstance inst = buildInstance(cfg, seed);
    if (!options.quiet)
      log << "seed " << seed << ": " << toString(cfg.problem) << " n=" << cfg.n << " r=" << cfg.r
          << " r*=" << cfg.rStar << " X0 hash " << hex(inst.x0Hash) << '\n';
    for (Method method : cfg.methods) {
      RunResult run;
      run.method = method;
      run.seed = seed;
      run.x0Hash = inst.x0Hash;
      run.traceFile = dir / (toString(method) + "_seed" + std::to_string(seed) + ".csv");
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SolverState state = runMethod(cfg, inst, method, seed);
        run.status = state.status;
        run.diagnostic = state.diagnostic;
        run.switchIteration = state.switchIteration;
        if (!state.trace.empty()) {
          const IterateRecord& last = state.trace.back();
          run.iterations = last.k;
          run.finalError = last.errFro;
          run.finalF = last.f;
          run.finalGap = last.fGap;
        }
        run.itersToTolerance = iterationsToTolerance(state.trace, cfg.targetError);
        run.rate = estimateRate(state.trace, cfg.targetError);
        writeTraceCsv(run.traceFile, state.trace);
        result.traceFiles.push_back(run.traceFile);
        try {
          EigenConfig eig = cfg.eigen;
          eig.seed = seed;
          const CertificateInputs inputs = certificateInputs(inst);
          const double eta = state.trace.empty() ? 0.0 : state.trace.back().eta;
          run.certificate = cfg.certificate == "local" ? certificateLocal(*inst.model, state.X, eta, inputs, eig)
                                                       : certificateEuclidean(*inst.model, state.X, inputs, eig);
        } catch (const Error& e) {
          run.certificateError = e.what();
        }
      } catch (const IoError&) {
        throw;
      } catch (const Error& e) {
        run.status = Status::Diverged;
        run.diagnostic = e.what();
      }
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!options.quiet) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "  %-10s %-15s iters=%-6ld err=%-12.4g %.2fs\n", toString(method).c_str(),
                      toString(run.status).c_str(), run.iterations, run.finalError.value_or(NAN), run.seconds);
        log << buf;
      }
      result.runs.push_back(std::move(run));
    }
  }

  result.summaryFile = dir / "summary.json";
  std::ofstream out(result.summaryFile, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + result.summaryFile.string());
  out << summaryJson(cfg, result.runs) << '\n';
  if (!out) throw IoError("write to " + result.summaryFile.string() + " failed");
  if (!options.quiet) printSummaryTable(log, result.runs);
  return result;
}

std::string certificateJson(const CertificateReport& rep) { return certificateObject(rep).dump(); }

std::string summaryJson(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  json j;
  j["library_version"] = libraryVersion();
  j["rng"] = rngDescription();
  j["config"] = json::parse(resolvedConfigJson(cfg));
  j["runs"] = json::array();
  for (const auto& r : runs) {
    json run = {{"method", toString(r.method)},
                {"seed", r.seed},
                {"status", toString(r.status)},
                {"diagnostic", r.diagnostic},
                {"iterations", r.iterations},
                {"final_error", optional(r.finalError)},
                {"final_f", r.finalF},
                {"final_f_gap", optional(r.finalGap)},
                {"iterations_to_tolerance", optional(r.itersToTolerance)},
                {"rate_log10_per_iter", optional(r.rate)},
                {"switch_iteration", optional(r.switchIteration)},
                {"x0_hash", hex(r.x0Hash)},
                {"trace_file", r.traceFile.filename().string()}};
    run["certificate"] = r.certificate ? certificateObject(*r.certificate) : json(nullptr);
    if (!r.certificateError.empty()) run["certificate_error"] = r.certificateError;
    j["runs"].push_back(std::move(run));
  }
  return j.dump(2);
}

void printSummaryTable(std::ostream& out, const std::vector<RunResult>& runs) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %6s %-15s %7s %12s %12s %12s %-24s\n", "method", "seed", "status", "iters",
                "final_err", "rate", "cert_bound", "verdict");
  out << buf;
  for (const auto& r : runs) {
    std::snprintf(buf, sizeof buf, "%-10s %6llu %-15s %7ld %12.4g %12.4g %12.4g %-24s\n", toString(r.method).c_str(),
                  static_cast<unsigned long long>(r.seed), toString(r.status).c_str(), r.iterations,
                  r.finalError.value_or(NAN), r.rate.value_or(NAN), r.certificate ? r.certificate->bound : NAN,
                  r.certificate ? toString(r.certificate->verdict).c_str() : "-");
    out << buf;
  }
}

}  // namespace precgd
