#include "mmcgp/surrogate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include "mmcgp/errors.hpp"

namespace mmcgp {

namespace {

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

}  // namespace

void SurrogateKernelConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must lie in [0, 1]");
  if (!(beta_max > 0.0 && beta_max < 1.0)) throw ArgumentError("beta_max must lie in (0, 1)");
  if (kernel.exponent != 1 && kernel.exponent != 2) {
    throw ArgumentError("kernel exponent must be 1 or 2");
  }
  if (proposal.scale.size() == 0 || (proposal.scale.array() <= 0.0).any()) {
    throw ArgumentError("proposal scale must be positive");
  }
}

Misassignment misassignment_probability(double mu, double sigma, const Binning& b) {
  if (!(sigma >= 0.0)) throw ArgumentError("misassignment_probability: negative sigma");
  Misassignment m;
  if (!std::isfinite(mu)) return m;
  m.bin = bin_index(b, mu);
  if (!m.bin) {
    // The assignment is "outside the range"; it is wrong if y lands inside.
    if (sigma == 0.0) {
      m.beta = 0.0;
    } else if (mu > b.hi()) {
      m.beta = normal_cdf(b.hi(), mu, sigma) - normal_cdf(b.lo(), mu, sigma);
    } else {
      m.beta = normal_cdf(2.0 * mu - b.lo(), mu, sigma) - normal_cdf(2.0 * mu - b.hi(), mu, sigma);
    }
    return m;
  }
  if (sigma == 0.0) {
    m.beta = 0.0;
    return m;
  }
  const double lo = b.lower_edge(*m.bin);
  const double hi = b.upper_edge(*m.bin);
  m.beta = normal_cdf(lo, mu, sigma) + (1.0 - normal_cdf(hi, mu, sigma));
  return m;
}

SurrogateTransition surrogate_mh_step(ChainRng& rng, const ChainState& state,
                                      EvaluationStore& store, const LogTarget& target,
                                      const PerformanceModel& model,
                                      const SurrogateKernelConfig& cfg, const Binning& binning,
                                      const Standardizer& coords, EvalLedger& ledger) {
  SurrogateTransition out;
  StepRecord& rec = out.record;

  InputPoint xp = propose(rng.proposal, state.x, cfg.proposal);
  const InputPoint up = coords.to_unit(xp);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const bool random_refine = unif(rng.refinement) < cfg.gamma;

  double yp = 0.0;
  Provenance source = Provenance::kTrueModel;
  if (random_refine) {
    rec.reason = RefineReason::kRandom;
  } else {
    try {
      const LocalGP gp = build_local_surrogate(store, up, cfg.kernel);
      const GpPrediction pred = gp.predict(up);
      if (!std::isfinite(pred.mean) || !std::isfinite(pred.variance)) {
        throw SurrogateError("non-finite surrogate prediction");
      }
      const Misassignment m = misassignment_probability(pred.mean, std::sqrt(pred.variance), binning);
      rec.beta = m.beta;
      if (m.beta > cfg.beta_max) {
        rec.reason = RefineReason::kMisassignment;
      } else {
        yp = pred.mean;
        source = Provenance::kSurrogate;
        rec.used_surrogate = true;
        ledger.record_surrogate();
      }
    } catch (const SurrogateError&) {
      rec.beta.reset();
      rec.reason = RefineReason::kFallback;
    }
  }
  if (!rec.used_surrogate) {
    yp = evaluate(model, xp, ledger);
    store.insert(up, yp);
    rec.refined = true;
  }

  Transition& t = out.transition;
  const double log_qp = target(xp, yp);
  t.log_alpha = log_qp - state.log_q;
  t.accepted = metropolis_accept(rng.acceptance, t.log_alpha, &t.log_u);
  t.state = t.accepted ? ChainState{std::move(xp), yp, log_qp, source} : state;
  rec.accepted = t.accepted;
  return out;
}

SurrogateKernel::SurrogateKernel(const PerformanceModel& model, const Binning& binning,
                                 SurrogateKernelConfig cfg, EvalLedger& ledger, bool keep_records)
    : model_(model),
      binning_(binning),
      cfg_(std::move(cfg)),
      ledger_(ledger),
      coords_(Standardizer::for_model(model)),
      store_(model.dimension()),
      keep_records_(keep_records) {
  cfg_.validate();
  if (cfg_.proposal.scale.size() != model.dimension()) {
    throw ArgumentError("SurrogateKernel: proposal dimension mismatch");
  }
  if (cfg_.kernel.lengths.size() != 0 && cfg_.kernel.lengths.size() != model.dimension()) {
    throw ArgumentError("SurrogateKernel: kernel length dimension mismatch");
  }
}

ChainState SurrogateKernel::initial_state(ChainRng& rng, const LogTarget& target) {
  std::vector<Sample> design;
  design.reserve(cfg_.initial_design);
  for (std::size_t i = 0; i < cfg_.initial_design; ++i) {
    InputPoint x = model_.sample_prior(rng.init);
    const double y = evaluate(model_, x, ledger_);
    ++counters_.design_evals;
    store_.insert(coords_.to_unit(x), y);
    design.push_back({std::move(x), y});
  }
  if (cfg_.kernel.lengths.size() == 0) {
    cfg_.kernel.lengths = store_.size() >= 2
                              ? calibrate_lengthscales(store_.samples(), cfg_.kernel.exponent)
                              : Eigen::VectorXd::Ones(model_.dimension());
  }
  for (auto& s : design) {
    const double lq = target(s.x, s.y);
    if (std::isfinite(lq)) return ChainState{std::move(s.x), s.y, lq, Provenance::kTrueModel};
  }
  for (int i = 0; i < 1000; ++i) {
    InputPoint x = model_.sample_prior(rng.init);
    const double y = evaluate(model_, x, ledger_);
    ++counters_.start_evals;
    store_.insert(coords_.to_unit(x), y);
    const double lq = target(x, y);
    if (std::isfinite(lq)) return ChainState{std::move(x), y, lq, Provenance::kTrueModel};
  }
  throw StateError("no prior draw landed inside the output range");
}

Transition SurrogateKernel::step(ChainRng& rng, const ChainState& state, const LogTarget& target) {
  SurrogateTransition st =
      surrogate_mh_step(rng, state, store_, target, model_, cfg_, binning_, coords_, ledger_);
  ++counters_.steps;
  switch (st.record.reason) {
    case RefineReason::kRandom: ++counters_.random_refinements; break;
    case RefineReason::kMisassignment: ++counters_.misassignment_refinements; break;
    case RefineReason::kFallback: ++counters_.fallbacks; break;
    case RefineReason::kNone: ++counters_.surrogate_steps; break;
  }
  if (keep_records_) records_.push_back(st.record);
  return std::move(st.transition);
}

void write_step_log(const std::filesystem::path& path, const std::vector<StepRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,used_surrogate,beta,refined,accepted\n";
  char buf[64];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << i << ',' << (r.used_surrogate ? 1 : 0) << ',';
    if (r.beta) {
      auto res = std::to_chars(buf, buf + sizeof(buf), *r.beta);
      out.write(buf, res.ptr - buf);
    }
    out << ',' << (r.refined ? 1 : 0) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mmcgp
