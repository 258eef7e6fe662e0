#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "precgd/certify.hpp"
#include "precgd/config.hpp"
#include "precgd/optimizers.hpp"
#include "precgd/problems.hpp"

namespace precgd {

std::string libraryVersion();
/// Description of the random number generator, recorded in summaries.
std::string rngDescription();

struct ProblemInstance {
  GroundTruth truth;
  std::shared_ptr<const CostModel> model;
  Matrix X0;
  std::uint64_t x0Hash = 0;
};

/// Ground truth, model and shared initial point for one seed.
ProblemInstance buildInstance(const ExperimentConfig& cfg, std::uint64_t seed);

/// FNV-1a over the raw bytes of the entries (column-major) and the shape.
std::uint64_t hashMatrix(const Matrix& X);

CertificateInputs certificateInputs(const ProblemInstance& inst);

/// Column order of every trace CSV.
const std::vector<std::string>& traceColumns();
std::string traceCsv(const std::vector<IterateRecord>& trace);
void writeTraceCsv(const std::filesystem::path& path, const std::vector<IterateRecord>& trace);

/// Least-squares slope of log10(err) against k over the final half of the
/// iterations up to the first one with err <= target. Needs at least 20
/// points.
std::optional<double> estimateRate(const std::vector<IterateRecord>& trace, double targetError);
std::optional<long> iterationsToTolerance(const std::vector<IterateRecord>& trace, double targetError);

struct RunResult {
  Method method;
  std::uint64_t seed = 0;
  Status status = Status::Running;
  std::string diagnostic;
  long iterations = 0;
  std::optional<double> finalError;
  double finalF = 0.0;
  std::optional<double> finalGap;
  std::optional<long> itersToTolerance;
  std::optional<double> rate;
  std::optional<long> switchIteration;
  std::optional<CertificateReport> certificate;
  std::string certificateError;
  std::uint64_t x0Hash = 0;
  std::filesystem::path traceFile;
  double seconds = 0.0;
};

struct HarnessOptions {
  std::optional<std::filesystem::path> outputDir;
  std::optional<std::vector<std::uint64_t>> seeds;
  bool quiet = false;
  std::ostream* log = nullptr;  ///< progress and table; stdout when null
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::filesystem::path summaryFile;
  std::vector<std::filesystem::path> traceFiles;
};

/// One run of `method` on a prepared instance, with certificate columns filled
/// every cfg.certifyEvery iterations.
SolverState runMethod(const ExperimentConfig& cfg, const ProblemInstance& inst, Method method, std::uint64_t seed);

/// Runs every (seed, method) pair, writes one CSV per pair and summary.json.
ExperimentResult runExperiment(const ExperimentConfig& cfg, const HarnessOptions& options = {});

/// summary.json contents.
std::string summaryJson(const ExperimentConfig& cfg, const std::vector<RunResult>& runs);
void printSummaryTable(std::ostream& out, const std::vector<RunResult>& runs);

/// Certificate report as a JSON object (full precision).
std::string certificateJson(const CertificateReport& rep);

}  // namespace precgd
