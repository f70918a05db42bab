#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mmcgp/binning.hpp"
#include "mmcgp/gp.hpp"
#include "mmcgp/mcmc.hpp"
#include "mmcgp/problem.hpp"

namespace mmcgp {

struct SurrogateKernelConfig {
  double gamma = 1e-4;      // probability of a random refinement per step
  double beta_max = 0.05;   // largest accepted misassignment probability
  /// Kernel exponent and correlation lengths (standardized coordinates). Empty
  /// lengths are calibrated from the initial design. The amplitude is
  /// recalibrated at every local build.
  KernelParams kernel{1.0, {}, 1};
  Proposal proposal;        // model coordinates
  std::size_t initial_design = 50;

  void validate() const;
};

enum class RefineReason { kNone, kRandom, kMisassignment, kFallback };

struct StepRecord {
  bool used_surrogate = false;
  std::optional<double> beta;
  bool refined = false;
  bool accepted = false;
  RefineReason reason = RefineReason::kNone;
};

struct Misassignment {
  double beta = 1.0;
  std::optional<int> bin;
};

/// Probability that N(mu, sigma^2) falls outside the bin that contains mu.
/// A mean outside the range has no bin; beta is then the probability of
/// falling inside the range.
Misassignment misassignment_probability(double mu, double sigma, const Binning& b);

struct SurrogateTransition {
  Transition transition;
  StepRecord record;
};

/// One Metropolis-Hastings step where the proposal's performance value comes
/// from a local GP unless a random refinement (probability gamma), a
/// misassignment probability above beta_max, or a failed surrogate build
/// forces a true evaluation. True evaluations are added to the store, which
/// holds points in the standardized coordinates of `coords`.
///
/// RNG consumption per step: proposal stream, then refinement stream (one
/// uniform), then acceptance stream (one uniform).
SurrogateTransition surrogate_mh_step(ChainRng& rng, const ChainState& state,
                                      EvaluationStore& store, const LogTarget& target,
                                      const PerformanceModel& model,
                                      const SurrogateKernelConfig& cfg, const Binning& binning,
                                      const Standardizer& coords, EvalLedger& ledger);

struct SurrogateCounters {
  std::uint64_t design_evals = 0;
  std::uint64_t start_evals = 0;  // prior draws spent finding an in-range start
  std::uint64_t random_refinements = 0;
  std::uint64_t misassignment_refinements = 0;
  std::uint64_t fallbacks = 0;
  std::uint64_t surrogate_steps = 0;
  std::uint64_t steps = 0;

  std::uint64_t true_evals() const {
    return design_evals + start_evals + random_refinements + misassignment_refinements +
           fallbacks;
  }
};

/// StepKernel wrapper that owns the evaluation store across MMC iterations.
class SurrogateKernel : public StepKernel {
 public:
  SurrogateKernel(const PerformanceModel& model, const Binning& binning,
                  SurrogateKernelConfig cfg, EvalLedger& ledger, bool keep_records = false);

  /// Draws the initial design from the init stream, calibrates the
  /// correlation lengths if none were given, and starts from the first
  /// design point inside the range (further prior draws if none is).
  ChainState initial_state(ChainRng& rng, const LogTarget& target) override;
  Transition step(ChainRng& rng, const ChainState& state, const LogTarget& target) override;
  EvalLedger& ledger() override { return ledger_; }

  const EvaluationStore& store() const { return store_; }
  const SurrogateKernelConfig& config() const { return cfg_; }
  const SurrogateCounters& counters() const { return counters_; }
  const std::vector<StepRecord>& records() const { return records_; }

 private:
  const PerformanceModel& model_;
  const Binning& binning_;
  SurrogateKernelConfig cfg_;
  EvalLedger& ledger_;
  Standardizer coords_;
  EvaluationStore store_;
  bool keep_records_;
  std::vector<StepRecord> records_;
  SurrogateCounters counters_;
};

/// CSV with columns step,used_surrogate,beta,refined,accepted.
void write_step_log(const std::filesystem::path& path, const std::vector<StepRecord>& records);

}  // namespace mmcgp
