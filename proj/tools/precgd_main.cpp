// precgd: run experiment configs and certify factors.
//
//   precgd run <config> [--output-dir D] [--seeds 0,1,2] [--quiet]
//   precgd certify <config> --factor <file> [--seed S] [--eta E] [--local]
//
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "precgd/certify.hpp"
#include "precgd/config.hpp"
#include "precgd/errors.hpp"
#include "precgd/harness.hpp"
#include "precgd/matrix_io.hpp"

namespace {

std::vector<std::uint64_t> parseSeeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw precgd::ConfigError("--seeds", "empty entry");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') throw precgd::ConfigError("--seeds", "bad seed '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw precgd::ConfigError("--seeds", "no seeds given");
  return seeds;
}

void printReport(const precgd::CertificateReport& r) {
  std::printf("kind          %s\n", r.kind.c_str());
  std::printf("f             %.17e\n", r.f);
  std::printf("eta           %.17e\n", r.eta);
  std::printf("eps_g         %.17e\n", r.epsG);
  std::printf("eps_H         %.17e\n", r.epsH);
  std::printf("eps_lambda    %.17e\n", r.epsLambda);
  std::printf("c_g           %.17e\n", r.cG);
  std::printf("c_H           %.17e\n", r.cH);
  std::printf("c_lambda      %.17e\n", r.cLambda);
  std::printf("bound         %.17e\n", r.bound);
  std::printf("verdict       %s\n", precgd::toString(r.verdict).c_str());
  std::printf("hessvecs      %ld%s\n", r.powerItersUsed, r.eigenConverged ? "" : " (eigen estimate not converged)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned gradient descent for overparameterized Burer-Monteiro factorization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", precgd::libraryVersion());

  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string runConfig, outputDir, seedList;
  bool quiet = false;
  run->add_option("config", runConfig, "Experiment config (JSON)")->required();
  run->add_option("--output-dir", outputDir, "Override the config's output directory");
  run->add_option("--seeds", seedList, "Comma-separated seeds overriding the config");
  run->add_flag("--quiet", quiet, "Suppress progress and the summary table");

  auto* cert = app.add_subcommand("certify", "Certify a factor against a config's problem instance");
  std::string certConfig, factorPath;
  std::uint64_t seed = 0;
  bool seedGiven = false;
  double eta = 0.0;
  bool local = false;
  cert->add_option("config", certConfig, "Experiment config (JSON)")->required();
  cert->add_option("--factor", factorPath, "Factor matrix file ('n r' header, then n rows)")->required();
  cert->add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { seed = s, seedGiven = true; }, "Instance seed (default: first config seed)");
  cert->add_option("--eta", eta, "Preconditioner eta for the local certificate");
  cert->add_flag("--local", local, "Report the local-norm certificate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const auto cfg = precgd::parseConfig(runConfig);
      precgd::HarnessOptions opt;
      opt.quiet = quiet;
      if (!outputDir.empty()) opt.outputDir = outputDir;
      if (!seedList.empty()) opt.seeds = parseSeeds(seedList);
      const auto result = precgd::runExperiment(cfg, opt);
      if (!quiet) std::cout << "summary: " << result.summaryFile.string() << '\n';
      return 0;
    }
    const auto cfg = precgd::parseConfig(certConfig);
    const auto inst = precgd::buildInstance(cfg, seedGiven ? seed : cfg.seeds.front());
    const auto X = precgd::readFactorFile(factorPath);
    if (X.rows() != cfg.n) throw precgd::ShapeError("factor has " + std::to_string(X.rows()) + " rows, config n is " +
                                                    std::to_string(cfg.n));
    precgd::EigenConfig eig = cfg.eigen;
    eig.seed = seedGiven ? seed : cfg.seeds.front();
    const auto inputs = precgd::certificateInputs(inst);
    const auto report = local || cfg.certificate == "local"
                            ? precgd::certificateLocal(*inst.model, X, eta, inputs, eig)
                            : precgd::certificateEuclidean(*inst.model, X, inputs, eig);
    printReport(report);
    return 0;
  } catch (const precgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
