#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "mmcgp/problem.hpp"

namespace mmcgp {

/// Log of an (unnormalized) target density evaluated at an input point whose
/// performance value is already known. Returns -infinity where the target
/// vanishes.
using LogTarget = std::function<double(const InputPoint& x, double y)>;

struct ChainState {
  InputPoint x;
  double y = 0.0;
  double log_q = 0.0;
  Provenance source = Provenance::kTrueModel;
};

/// Gaussian random-walk proposal x+ = x + scale .* z.
struct Proposal {
  Eigen::VectorXd scale;
};

/// Independent RNG streams per purpose. Kernels that consume a subset of the
/// streams stay aligned with kernels that consume more of them, which keeps
/// the surrogate kernel at gamma = 1 step-for-step identical to the exact one.
struct ChainRng {
  Rng init;        // prior draws for the initial design / chain start
  Rng proposal;    // random-walk increments
  Rng refinement;  // gamma coin
  Rng acceptance;  // Metropolis uniform

  explicit ChainRng(std::uint64_t seed);
};

/// Outcome of one Metropolis-Hastings transition. log_u is the logarithm of
/// the uniform that decided it: accepted == (log_u < log_alpha).
struct Transition {
  ChainState state;
  bool accepted = false;
  double log_alpha = 0.0;
  double log_u = 0.0;
};

InputPoint propose(Rng& rng, const InputPoint& x, const Proposal& prop);

/// Draws uniform u from the acceptance stream and accepts iff log u < log_alpha.
/// The uniform is drawn even when the outcome is certain.
bool metropolis_accept(Rng& rng, double log_alpha, double* log_u_out = nullptr);

/// One random-walk MH step evaluating the true model at the proposal.
Transition mh_step(ChainRng& rng, const ChainState& state, const LogTarget& target,
                   const PerformanceModel& model, const Proposal& prop, EvalLedger& ledger);

/// Draws prior samples (init stream) until one has a finite target density.
/// Throws StateError after max_draws failures.
ChainState find_initial_state(ChainRng& rng, const LogTarget& target,
                              const PerformanceModel& model, EvalLedger& ledger,
                              int max_draws = 1000);

/// A Markov transition kernel driven by the MMC engine.
class StepKernel {
 public:
  virtual ~StepKernel() = default;

  virtual ChainState initial_state(ChainRng& rng, const LogTarget& target) = 0;
  virtual Transition step(ChainRng& rng, const ChainState& state, const LogTarget& target) = 0;
  virtual EvalLedger& ledger() = 0;
};

/// Plain MH against the true model.
class ExactKernel : public StepKernel {
 public:
  ExactKernel(const PerformanceModel& model, Proposal proposal, EvalLedger& ledger);

  ChainState initial_state(ChainRng& rng, const LogTarget& target) override;
  Transition step(ChainRng& rng, const ChainState& state, const LogTarget& target) override;
  EvalLedger& ledger() override { return ledger_; }

 private:
  const PerformanceModel& model_;
  Proposal proposal_;
  EvalLedger& ledger_;
};

/// Proposal scale in model coordinates: a single factor multiplies the
/// model's input_scale(); a full-length vector is taken as given (also in
/// units of input_scale()).
Proposal make_proposal(const PerformanceModel& model, const std::vector<double>& scale);

}  // namespace mmcgp
