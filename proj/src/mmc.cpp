#include "mmcgp/mmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmcgp/errors.hpp"

namespace mmcgp {

double log_bias_density(const WeightTable& w, const Binning& b, const PerformanceModel& model,
                        const InputPoint& x, double y) {
  if (!std::isfinite(y)) return -std::numeric_limits<double>::infinity();
  const auto i = bin_index(b, y);
  if (!i) return -std::numeric_limits<double>::infinity();
  return model.log_prior(x) - std::log(w.theta[static_cast<std::size_t>(*i)]);
}

WeightTable update_weights(const WeightTable& w, const Histogram& h) {
  if (w.theta.size() != h.counts.size()) throw ArgumentError("update_weights: length mismatch");
  if (h.total == 0) throw StateError("update_weights: empty histogram");
  const double n = static_cast<double>(h.total);
  WeightTable next{w.theta, w.iteration + 1};
  const std::size_t m = h.counts.size();
  std::vector<double> factor(m, 0.0);
  std::vector<std::size_t> visited;
  for (std::size_t i = 0; i < m; ++i) {
    if (h.counts[i] == 0) continue;
    factor[i] = static_cast<double>(h.counts[i]) / n;
    visited.push_back(i);
  }
  if (visited.empty()) return next;
  // An empty bin keeps its ratio to the nearest visited bin (lower one on ties).
  for (std::size_t i = 0; i < m; ++i) {
    if (h.counts[i] > 0) continue;
    auto it = std::lower_bound(visited.begin(), visited.end(), i);
    std::size_t j;
    if (it == visited.end()) {
      j = visited.back();
    } else if (it == visited.begin()) {
      j = *it;
    } else {
      const std::size_t up = *it, down = *(it - 1);
      j = (up - i < i - down) ? up : down;
    }
    factor[i] = factor[j];
  }
  for (std::size_t i = 0; i < m; ++i) next.theta[i] = factor[i] * w.theta[i];
  const double target = std::accumulate(w.theta.begin(), w.theta.end(), 0.0);
  const double sum = std::accumulate(next.theta.begin(), next.theta.end(), 0.0);
  for (double& t : next.theta) t *= target / sum;
  return next;
}

std::vector<double> estimate_pdf(const WeightTable& w, const Histogram& h, const Binning& b) {
  if (w.theta.size() != h.counts.size() || static_cast<int>(h.counts.size()) != b.bins()) {
    throw ArgumentError("estimate_pdf: length mismatch");
  }
  if (h.total == 0) throw StateError("estimate_pdf: empty histogram");
  const double n = static_cast<double>(h.total);
  std::vector<double> p(h.counts.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<double>(h.counts[i]) / n * w.theta[i];
  }
  const double mass = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(mass > 0.0)) throw StateError("estimate_pdf: no samples inside the range");
  for (double& v : p) v /= mass * b.width();
  return p;
}

Moments estimate_moments(std::span<const double> pdf, const Binning& b) {
  if (static_cast<int>(pdf.size()) != b.bins()) throw ArgumentError("estimate_moments: length mismatch");
  double mass = 0.0;
  double first = 0.0;
  for (int i = 0; i < b.bins(); ++i) {
    const double m = pdf[static_cast<std::size_t>(i)] * b.width();
    mass += m;
    first += m * b.center(i);
  }
  if (!(mass > 0.0)) throw StateError("estimate_moments: pdf carries no mass");
  Moments out;
  out.mean = first / mass;
  for (int i = 0; i < b.bins(); ++i) {
    const double m = pdf[static_cast<std::size_t>(i)] * b.width() / mass;
    const double d = b.center(i) - out.mean;
    const double d2 = d * d;
    out.variance += m * d2;
    out.central3 += m * d2 * d;
    out.central4 += m * d2 * d2;
    out.central5 += m * d2 * d2 * d;
  }
  return out;
}

double flatness(const Histogram& h) {
  double sum = 0.0;
  double sq = 0.0;
  int nonzero = 0;
  for (auto c : h.counts) {
    if (c == 0) continue;
    const double v = static_cast<double>(c);
    sum += v;
    sq += v * v;
    ++nonzero;
  }
  if (nonzero < 2) return 0.0;
  const double mean = sum / nonzero;
  const double var = std::max(0.0, sq / nonzero - mean * mean);
  return std::sqrt(var) / mean;
}

MmcResult run_mmc(const PerformanceModel& model, const Binning& binning, const MmcConfig& config,
                  StepKernel& kernel, const StepObserver& observer) {
  if (config.iterations <= 0) throw ArgumentError("run_mmc: iterations must be positive");
  if (config.samples_per_iteration == 0) throw ArgumentError("run_mmc: samples must be positive");
  const std::size_t burn_in = config.effective_burn_in();
  if (burn_in >= config.samples_per_iteration) {
    throw ArgumentError("run_mmc: burn-in must be smaller than the samples per iteration");
  }

  MmcResult result;
  if (config.samples_per_iteration < static_cast<std::size_t>(binning.bins())) {
    result.warnings.push_back("fewer samples per iteration than bins");
  }

  ChainRng rng(config.seed);
  WeightTable weights = WeightTable::uniform(binning.bins());
  LogTarget target = [&](const InputPoint& x, double y) {
    return log_bias_density(weights, binning, model, x, y);
  };

  EvalLedger& ledger = kernel.ledger();
  const auto before = ledger.true_evals();
  ChainState state = kernel.initial_state(rng, target);
  result.initial_state_evals = ledger.true_evals() - before;

  for (int k = 0; k < config.iterations; ++k) {
    // Theta changed since the state's density was computed.
    state.log_q = target(state.x, state.y);

    IterationRecord rec{weights, Histogram(binning.bins()), 0.0, 0.0, {}};
    std::size_t accepted = 0;
    const std::size_t steps = burn_in + config.samples_per_iteration;
    for (std::size_t s = 0; s < steps; ++s) {
      Transition t = kernel.step(rng, state, target);
      if (observer) observer(k, s, t);
      state = std::move(t.state);
      if (s < burn_in) continue;
      accepted += t.accepted ? 1 : 0;
      rec.histogram.add(binning, state.y);
    }
    rec.flatness = flatness(rec.histogram);
    rec.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(config.samples_per_iteration);
    rec.ledger = ledger.snapshot();
    weights = update_weights(weights, rec.histogram);
    result.iterations.push_back(std::move(rec));
  }

  const IterationRecord& last = result.iterations.back();
  result.final_weights = weights;
  result.pdf = estimate_pdf(last.weights, last.histogram, binning);
  result.probabilities.resize(result.pdf.size());
  for (std::size_t i = 0; i < result.pdf.size(); ++i) {
    result.probabilities[i] = result.pdf[i] * binning.width();
  }
  result.moments = estimate_moments(result.pdf, binning);
  result.ledger = ledger.snapshot();
  result.rho = 1.0 - static_cast<double>(last.histogram.overflow_low + last.histogram.overflow_high) /
                         static_cast<double>(last.histogram.total);
  return result;
}

}  // namespace mmcgp
