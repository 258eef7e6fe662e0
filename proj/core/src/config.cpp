#include "precgd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "precgd/errors.hpp"
#include "precgd/problems.hpp"

namespace precgd {
namespace {

using nlohmann::json;

void allowOnly(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

const json& require(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(key, "required key missing");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double positive(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x > 0.0)) throw ConfigError(field, "must be positive");
  return x;
}

double nonnegative(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x >= 0.0)) throw ConfigError(field, "must be nonnegative");
  return x;
}

long integer(const json& v, const std::string& field, long lo) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long x = v.get<long>();
  if (x < lo) throw ConfigError(field, "must be >= " + std::to_string(lo));
  return x;
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

bool flag(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

ProblemKind parseProblem(const std::string& s) {
  if (s == "matrix_sensing") return ProblemKind::MatrixSensing;
  if (s == "one_bit") return ProblemKind::OneBit;
  if (s == "phase_retrieval") return ProblemKind::PhaseRetrieval;
  throw ConfigError("problem", "expected matrix_sensing, one_bit or phase_retrieval, got '" + s + "'");
}

std::string exponentName(EtaExponent e) { return e == EtaExponent::HalfPower ? "half" : "one"; }

ExperimentConfig fromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  allowOnly(j, "",
            {"name", "problem", "n", "r_star", "r", "kappa", "spectrum", "m", "normalize_measurements", "methods",
             "alpha", "eta_mode", "eta0", "eta_exponent", "perturb", "switch", "init", "max_iters", "tol_error",
             "tol_grad", "target_error", "seeds", "certify_every", "certificate", "eig", "output_dir"});

  ExperimentConfig c;
  if (j.contains("name")) c.name = text(j["name"], "name");
  c.problem = parseProblem(text(require(j, "problem"), "problem"));
  c.n = integer(require(j, "n"), "n", 1);
  c.rStar = integer(require(j, "r_star"), "r_star", 1);
  c.r = integer(require(j, "r"), "r", 1);
  if (c.rStar > c.n) throw ConfigError("r_star", "must not exceed n");
  if (c.r < c.rStar) throw ConfigError("r", "search rank r must be >= r_star");
  if (c.r > c.n) throw ConfigError("r", "search rank r must not exceed n");

  if (j.contains("spectrum") && j.contains("kappa")) throw ConfigError("spectrum", "give either spectrum or kappa");
  if (j.contains("spectrum")) {
    const auto& s = j["spectrum"];
    if (!s.is_array()) throw ConfigError("spectrum", "expected an array of numbers");
    for (const auto& v : s) c.spectrum.push_back(positive(v, "spectrum"));
    if (static_cast<Index>(c.spectrum.size()) != c.rStar) throw ConfigError("spectrum", "length must equal r_star");
    for (std::size_t i = 1; i < c.spectrum.size(); ++i)
      if (c.spectrum[i] > c.spectrum[i - 1]) throw ConfigError("spectrum", "must be sorted descending");
  } else {
    const double kappa = j.contains("kappa") ? number(j["kappa"], "kappa") : 1.0;
    if (!(kappa >= 1.0)) throw ConfigError("kappa", "must be >= 1");
    c.spectrum = spectrumForKappa(c.rStar, kappa);
  }

  if (j.contains("m")) {
    if (c.problem == ProblemKind::OneBit) throw ConfigError("m", "one_bit has no measurement count");
    c.m = integer(j["m"], "m", 1);
  } else if (c.problem != ProblemKind::OneBit) {
    c.m = defaultMeasurements(c.n, c.r);
  }
  if (j.contains("normalize_measurements")) {
    c.normalizeMeasurements = flag(j["normalize_measurements"], "normalize_measurements");
    if (c.normalizeMeasurements && c.problem == ProblemKind::OneBit)
      throw ConfigError("normalize_measurements", "not applicable to one_bit");
  }

  const auto& methods = require(j, "methods");
  if (!methods.is_array() || methods.empty()) throw ConfigError("methods", "expected a nonempty array");
  for (const auto& v : methods) {
    const std::string name = text(v, "methods");
    const auto m = parseMethod(name);
    if (!m) throw ConfigError("methods", "unknown method '" + name + "'");
    for (Method seen : c.methods)
      if (seen == *m) throw ConfigError("methods", "duplicate method '" + name + "'");
    c.methods.push_back(*m);
  }

  const auto& alpha = require(j, "alpha");
  if (!alpha.is_object()) throw ConfigError("alpha", "expected an object mapping method to step size");
  for (const auto& [key, value] : alpha.items()) {
    const auto m = parseMethod(key);
    if (!m) throw ConfigError("alpha." + key, "unknown method");
    c.alpha[*m] = positive(value, "alpha." + key);
  }
  for (Method m : c.methods)
    if (!c.alpha.count(m)) throw ConfigError("alpha." + toString(m), "missing step size for listed method");

  if (j.contains("eta_mode")) {
    const std::string mode = text(j["eta_mode"], "eta_mode");
    if (mode == "adaptive")
      c.etaMode = EtaMode::Adaptive;
    else if (mode == "zero")
      c.etaMode = EtaMode::Zero;
    else if (mode == "fixed")
      c.etaMode = EtaMode::Fixed;
    else
      throw ConfigError("eta_mode", "expected adaptive, fixed or zero");
  }
  if (j.contains("eta0")) c.eta0 = nonnegative(j["eta0"], "eta0");
  if (c.etaMode == EtaMode::Fixed && !j.contains("eta0")) throw ConfigError("eta0", "required when eta_mode is fixed");
  if (j.contains("eta_exponent")) {
    const std::string e = text(j["eta_exponent"], "eta_exponent");
    if (e == "half")
      c.etaExponent = EtaExponent::HalfPower;
    else if (e == "one")
      c.etaExponent = EtaExponent::FullPower;
    else
      throw ConfigError("eta_exponent", "expected half or one");
  }

  if (j.contains("perturb")) {
    const auto& p = j["perturb"];
    if (!p.is_object()) throw ConfigError("perturb", "expected an object");
    allowOnly(p, "perturb", {"eta_fixed", "beta", "period", "epsilon"});
    c.perturb = PerturbParams{positive(require(p, "eta_fixed"), "perturb.eta_fixed"),
                              positive(require(p, "beta"), "perturb.beta"),
                              integer(require(p, "period"), "perturb.period", 1),
                              positive(require(p, "epsilon"), "perturb.epsilon")};
  }
  if (j.contains("switch")) {
    const auto& s = j["switch"];
    if (!s.is_object()) throw ConfigError("switch", "expected an object");
    allowOnly(s, "switch", {"eps_g", "eps_H", "rho"});
    c.switchThresholds = StationarityThresholds{positive(require(s, "eps_g"), "switch.eps_g"),
                                                positive(require(s, "eps_H"), "switch.eps_H"),
                                                positive(require(s, "rho"), "switch.rho")};
  }
  for (Method m : c.methods) {
    if ((m == Method::PPrecGD || m == Method::TwoPhase) && !c.perturb)
      throw ConfigError("perturb", toString(m) + " needs perturbation parameters");
    if (m == Method::TwoPhase && !c.switchThresholds)
      throw ConfigError("switch", "two_phase needs phase-switch thresholds");
  }

  if (j.contains("init")) {
    const auto& in = j["init"];
    if (!in.is_object()) throw ConfigError("init", "expected an object");
    allowOnly(in, "init", {"type", "radius", "scale"});
    const std::string type = text(require(in, "type"), "init.type");
    if (type == "near_truth") {
      c.init.kind = InitConfig::Kind::NearTruth;
      if (in.contains("scale")) throw ConfigError("init.scale", "not used by near_truth");
      if (in.contains("radius")) c.init.radius = nonnegative(in["radius"], "init.radius");
    } else if (type == "random") {
      c.init.kind = InitConfig::Kind::Random;
      if (in.contains("radius")) throw ConfigError("init.radius", "not used by random");
      if (in.contains("scale")) c.init.scale = positive(in["scale"], "init.scale");
    } else {
      throw ConfigError("init.type", "expected near_truth or random");
    }
  }

  if (j.contains("max_iters")) c.maxIters = integer(j["max_iters"], "max_iters", 0);
  if (j.contains("tol_error")) c.tolError = nonnegative(j["tol_error"], "tol_error");
  if (j.contains("tol_grad")) c.tolGrad = nonnegative(j["tol_grad"], "tol_grad");
  if (j.contains("target_error")) c.targetError = positive(j["target_error"], "target_error");

  const auto& seeds = require(j, "seeds");
  if (!seeds.is_array() || seeds.empty()) throw ConfigError("seeds", "expected a nonempty array of integers");
  for (const auto& v : seeds) c.seeds.push_back(static_cast<std::uint64_t>(integer(v, "seeds", 0)));

  if (j.contains("certify_every")) c.certifyEvery = integer(j["certify_every"], "certify_every", 0);
  if (j.contains("certificate")) {
    c.certificate = text(j["certificate"], "certificate");
    if (c.certificate != "euclidean" && c.certificate != "local")
      throw ConfigError("certificate", "expected euclidean or local");
  }
  if (j.contains("eig")) {
    const auto& e = j["eig"];
    if (!e.is_object()) throw ConfigError("eig", "expected an object");
    allowOnly(e, "eig", {"tol", "max_iters", "block_size"});
    if (e.contains("tol")) c.eigen.tol = positive(e["tol"], "eig.tol");
    if (e.contains("max_iters")) c.eigen.maxIters = integer(e["max_iters"], "eig.max_iters", 1);
    if (e.contains("block_size")) c.eigen.blockSize = static_cast<int>(integer(e["block_size"], "eig.block_size", 1));
    if (c.eigen.blockSize > c.n * c.r) throw ConfigError("eig.block_size", "must not exceed n r");
  }
  if (j.contains("output_dir")) c.outputDir = text(j["output_dir"], "output_dir");
  return c;
}

}  // namespace

std::string toString(ProblemKind p) {
  switch (p) {
    case ProblemKind::MatrixSensing: return "matrix_sensing";
    case ProblemKind::OneBit: return "one_bit";
    case ProblemKind::PhaseRetrieval: return "phase_retrieval";
  }
  return "?";
}

ExperimentConfig parseConfigText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return fromJson(j);
}

ExperimentConfig parseConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parseConfigText(ss.str());
}

std::string resolvedConfigJson(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["problem"] = toString(c.problem);
  j["n"] = c.n;
  j["r_star"] = c.rStar;
  j["r"] = c.r;
  j["spectrum"] = c.spectrum;
  if (c.problem != ProblemKind::OneBit) {
    j["m"] = c.m;
    j["normalize_measurements"] = c.normalizeMeasurements;
  }
  j["methods"] = json::array();
  for (Method m : c.methods) j["methods"].push_back(toString(m));
  j["alpha"] = json::object();
  for (const auto& [m, a] : c.alpha) j["alpha"][toString(m)] = a;
  j["eta_mode"] = toString(c.etaMode);
  j["eta0"] = c.eta0;
  j["eta_exponent"] = exponentName(c.etaExponent);
  if (c.perturb)
    j["perturb"] = {{"eta_fixed", c.perturb->etaFixed},
                    {"beta", c.perturb->beta},
                    {"period", c.perturb->period},
                    {"epsilon", c.perturb->epsThreshold}};
  if (c.switchThresholds)
    j["switch"] = {{"eps_g", c.switchThresholds->epsG},
                   {"eps_H", c.switchThresholds->epsH},
                   {"rho", c.switchThresholds->rho}};
  if (c.init.kind == InitConfig::Kind::NearTruth)
    j["init"] = {{"type", "near_truth"}, {"radius", c.init.radius}};
  else
    j["init"] = {{"type", "random"}, {"scale", c.init.scale}};
  j["max_iters"] = c.maxIters;
  j["tol_error"] = c.tolError;
  if (c.tolGrad) j["tol_grad"] = *c.tolGrad;
  j["target_error"] = c.targetError;
  j["seeds"] = c.seeds;
  j["certify_every"] = c.certifyEvery;
  j["certificate"] = c.certificate;
  j["eig"] = {{"tol", c.eigen.tol}, {"max_iters", c.eigen.maxIters}, {"block_size", c.eigen.blockSize}};
  j["output_dir"] = c.outputDir.string();
  return j.dump(2);
}

}  // namespace precgd
