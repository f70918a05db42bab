#include "mmcgp/problem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mmcgp/errors.hpp"

namespace mmcgp {

namespace {

void check_dimension(const PerformanceModel& model, const InputPoint& x) {
  if (x.size() != model.dimension()) {
    std::ostringstream msg;
    msg << model.name() << ": input has length " << x.size() << ", expected "
        << model.dimension();
    throw ArgumentError(msg.str());
  }
}

}  // namespace

double evaluate(const PerformanceModel& model, const InputPoint& x, EvalLedger& ledger) {
  check_dimension(model, x);
  const double y = model.eval(x);
  ledger.record_true();
  if (!std::isfinite(y)) {
    throw EvaluationError(model.name() + ": non-finite model output", x);
  }
  return y;
}

double log_prior_density(const PerformanceModel& model, const InputPoint& x) {
  check_dimension(model, x);
  return model.log_prior(x);
}

std::vector<InputPoint> sample_prior(const PerformanceModel& model, Rng& rng, std::size_t n) {
  if (n == 0) throw ArgumentError("sample_prior: n must be positive");
  std::vector<InputPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(model.sample_prior(rng));
  return out;
}

IndependentNormal::IndependentNormal(Eigen::VectorXd means, Eigen::VectorXd variances)
    : means_(std::move(means)), variances_(std::move(variances)) {
  if (means_.size() == 0 || means_.size() != variances_.size()) {
    throw ArgumentError("IndependentNormal: means and variances must be nonempty and equal length");
  }
  if ((variances_.array() <= 0.0).any() || !variances_.allFinite() || !means_.allFinite()) {
    throw ArgumentError("IndependentNormal: variances must be positive and finite");
  }
  log_norm_ = -0.5 * (2.0 * std::numbers::pi * variances_.array()).log().sum();
}

IndependentNormal IndependentNormal::standard(int dim) {
  return IndependentNormal(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

double IndependentNormal::log_density(const InputPoint& x) const {
  const double quad = ((x - means_).array().square() / variances_.array()).sum();
  return log_norm_ - 0.5 * quad;
}

InputPoint IndependentNormal::sample(Rng& rng) const {
  std::normal_distribution<double> z;
  InputPoint x(means_.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = means_[i] + std::sqrt(variances_[i]) * z(rng);
  }
  return x;
}

}  // namespace mmcgp
