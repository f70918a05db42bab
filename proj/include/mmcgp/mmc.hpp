#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmcgp/binning.hpp"
#include "mmcgp/mcmc.hpp"
#include "mmcgp/problem.hpp"

namespace mmcgp {

/// Per-bin divisors Theta_i of the biasing density q(x) = p(x) / Theta_i on
/// the preimage of bin i (zero outside the binned range).
struct WeightTable {
  std::vector<double> theta;
  int iteration = 0;

  /// Theta_0 = 1 in every bin, i.e. q_0 = p restricted to the range.
  static WeightTable uniform(int m) { return {std::vector<double>(static_cast<std::size_t>(m), 1.0), 0}; }
};

struct MmcConfig {
  int iterations = 10;
  std::size_t samples_per_iteration = 100000;
  /// Discarded steps at the start of every iteration; defaults to N/10.
  std::optional<std::size_t> burn_in;
  /// Scalar or per-coordinate, in units of the model's input_scale().
  std::vector<double> proposal_scale{0.5};
  std::uint64_t seed = 0;

  std::size_t effective_burn_in() const {
    return burn_in.value_or(samples_per_iteration / 10);
  }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double central3 = 0.0;
  double central4 = 0.0;
  double central5 = 0.0;
};

struct IterationRecord {
  WeightTable weights;  // the weights the chain sampled under
  Histogram histogram;
  double flatness = 0.0;  // coefficient of variation of the nonzero counts
  double acceptance_rate = 0.0;
  LedgerSnapshot ledger;  // cumulative, at the end of the iteration
};

struct MmcResult {
  std::vector<IterationRecord> iterations;
  WeightTable final_weights;          // Theta after the last update
  std::vector<double> probabilities;  // P_i, sums to 1
  std::vector<double> pdf;            // P_i / width
  Moments moments;
  LedgerSnapshot ledger;
  std::uint64_t initial_state_evals = 0;
  double rho = 1.0;  // 1 - overflow fraction of the final histogram
  std::vector<std::string> warnings;
};

/// log p(x) - log Theta_i for the bin of y; -infinity when y is outside the range.
double log_bias_density(const WeightTable& w, const Binning& b, const PerformanceModel& model,
                        const InputPoint& x, double y);

/// Theta'_i = (N*_i / N) Theta_i for visited bins. An empty bin is scaled by
/// the factor of its nearest visited bin, so its ratio to that bin carries
/// forward. The result is rescaled so that sum Theta' == sum Theta. Throws StateError on an
/// empty histogram and ArgumentError on a length mismatch.
WeightTable update_weights(const WeightTable& w, const Histogram& h);

/// pdf_i proportional to (N*_i / N) Theta_i / width, normalized to unit mass.
std::vector<double> estimate_pdf(const WeightTable& w, const Histogram& h, const Binning& b);

/// Mean and central moments 2..5 of the bin-center measure pdf_i * width.
/// Throws StateError when the pdf carries no mass.
Moments estimate_moments(std::span<const double> pdf, const Binning& b);

/// Coefficient of variation of the nonzero bin counts (0 for fewer than two).
double flatness(const Histogram& h);

/// Called for every kernel transition, burn-in included.
using StepObserver = std::function<void(int iteration, std::size_t step, const Transition& t)>;

/// Multicanonical iteration: K rounds of burn-in + N kernel steps under
/// q_k, each followed by a weight update. The final estimate uses the last
/// round's histogram and weights.
MmcResult run_mmc(const PerformanceModel& model, const Binning& binning, const MmcConfig& config,
                  StepKernel& kernel, const StepObserver& observer = {});

}  // namespace mmcgp
