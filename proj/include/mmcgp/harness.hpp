#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmcgp/binning.hpp"
#include "mmcgp/mmc.hpp"
#include "mmcgp/problem.hpp"
#include "mmcgp/surrogate.hpp"

namespace mmcgp {

enum class Method { kMonteCarlo, kMmc, kGpMmc };

std::string to_string(Method m);

/// Experiment settings read from a flat `key = value` file. See
/// configs/README.md for the key list.
struct RunConfig {
  std::string model;
  std::map<std::string, std::string> model_params;  // keys after "model."
  Method method = Method::kMmc;

  std::optional<double> range_lo;
  std::optional<double> range_hi;
  int bins = 0;

  MmcConfig mmc;
  double gamma = 1e-4;
  double beta_max = 0.05;
  int kernel_p = 1;
  std::size_t initial_design = 50;
  std::size_t mc_samples = 1000000;
  std::size_t pilot_samples = 1000;

  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "out";
  bool log_steps = false;

  static RunConfig parse(std::istream& in);
  static RunConfig load(const std::filesystem::path& path);
  /// Throws ConfigError when required fields are missing or inconsistent.
  void validate() const;
};

/// Builds a registered model ("min_distance", "beam", "poisson_kl",
/// "identity") from its parameters. Throws ConfigError for unknown names.
std::unique_ptr<PerformanceModel> make_model(const std::string& name,
                                             const std::map<std::string, std::string>& params);

struct ExperimentResult {
  Method method = Method::kMmc;
  Binning binning{0.0, 1.0, 1};
  std::vector<double> pdf;
  Moments moments;
  LedgerSnapshot ledger;
  std::optional<MmcResult> mmc;
  std::optional<SurrogateCounters> surrogate;
  std::vector<StepRecord> steps;  // filled when step logging is on
  std::uint64_t pilot_evals = 0;
  double runtime_seconds = 0.0;
};

/// Runs the configured method and writes histograms.csv, pdf.csv,
/// summary.json and timing.json into the output directory, plus store.csv
/// and (with log_steps) steps.csv for gpmmc runs.
ExperimentResult run_experiment(const RunConfig& config);

/// A PDF on an equal-width binning as stored in pdf.csv.
struct PdfTable {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> pdf;

  Binning binning() const;
  static PdfTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  static PdfTable from(const Binning& b, const std::vector<double>& pdf);
};

struct ComparisonReport {
  std::vector<std::optional<double>> rel_err;  // empty where the baseline is zero
  double max_rel_err = 0.0;
  double avg_rel_err = 0.0;
  std::size_t compared_bins = 0;
  Moments baseline_moments;
  Moments candidate_moments;
};

/// Per-bin |candidate - baseline| / baseline over bins with a positive
/// baseline. Throws ArgumentError when the binnings differ.
ComparisonReport compare_pdfs(const PdfTable& baseline, const PdfTable& candidate);

std::string report_json(const ComparisonReport& report);
std::string moments_json(const Moments& m);

}  // namespace mmcgp
