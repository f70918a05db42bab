#include "mmcgp/mcmc.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mmcgp/errors.hpp"

namespace mmcgp {

namespace {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace

ChainRng::ChainRng(std::uint64_t seed)
    : init(make_stream(seed, 0)),
      proposal(make_stream(seed, 1)),
      refinement(make_stream(seed, 2)),
      acceptance(make_stream(seed, 3)) {}

InputPoint propose(Rng& rng, const InputPoint& x, const Proposal& prop) {
  if (prop.scale.size() != x.size()) throw ArgumentError("propose: dimension mismatch");
  std::normal_distribution<double> z;
  InputPoint next(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) next[i] = x[i] + prop.scale[i] * z(rng);
  return next;
}

bool metropolis_accept(Rng& rng, double log_alpha, double* log_u_out) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_u = std::log(unif(rng));
  if (log_u_out) *log_u_out = log_u;
  return log_u < log_alpha;
}

Transition mh_step(ChainRng& rng, const ChainState& state, const LogTarget& target,
                   const PerformanceModel& model, const Proposal& prop, EvalLedger& ledger) {
  Transition t;
  InputPoint xp = propose(rng.proposal, state.x, prop);
  const double yp = evaluate(model, xp, ledger);
  const double log_qp = target(xp, yp);
  t.log_alpha = log_qp - state.log_q;
  t.accepted = metropolis_accept(rng.acceptance, t.log_alpha, &t.log_u);
  if (t.accepted) {
    t.state = ChainState{std::move(xp), yp, log_qp, Provenance::kTrueModel};
  } else {
    t.state = state;
  }
  return t;
}

ChainState find_initial_state(ChainRng& rng, const LogTarget& target,
                              const PerformanceModel& model, EvalLedger& ledger, int max_draws) {
  for (int i = 0; i < max_draws; ++i) {
    InputPoint x = model.sample_prior(rng.init);
    const double y = evaluate(model, x, ledger);
    const double lq = target(x, y);
    if (std::isfinite(lq)) return ChainState{std::move(x), y, lq, Provenance::kTrueModel};
  }
  throw StateError("no prior draw landed inside the output range");
}

ExactKernel::ExactKernel(const PerformanceModel& model, Proposal proposal, EvalLedger& ledger)
    : model_(model), proposal_(std::move(proposal)), ledger_(ledger) {
  if (proposal_.scale.size() != model.dimension() || (proposal_.scale.array() <= 0.0).any()) {
    throw ArgumentError("ExactKernel: proposal scale must be positive with model dimension");
  }
}

ChainState ExactKernel::initial_state(ChainRng& rng, const LogTarget& target) {
  return find_initial_state(rng, target, model_, ledger_);
}

Transition ExactKernel::step(ChainRng& rng, const ChainState& state, const LogTarget& target) {
  return mh_step(rng, state, target, model_, proposal_, ledger_);
}

Proposal make_proposal(const PerformanceModel& model, const std::vector<double>& scale) {
  const int d = model.dimension();
  const InputPoint unit = model.input_scale();
  Proposal p{Eigen::VectorXd(d)};
  if (scale.size() == 1) {
    p.scale = scale[0] * unit;
  } else if (static_cast<int>(scale.size()) == d) {
    for (int i = 0; i < d; ++i) p.scale[i] = scale[static_cast<std::size_t>(i)] * unit[i];
  } else {
    throw ArgumentError("proposal scale must be a scalar or have one entry per input");
  }
  if ((p.scale.array() <= 0.0).any() || !p.scale.allFinite()) {
    throw ArgumentError("proposal scale entries must be positive");
  }
  return p;
}

}  // namespace mmcgp
