#pragma once

#include <atomic>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mmcgp {

using InputPoint = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class Provenance { kTrueModel, kSurrogate };

/// An input point together with its performance value.
struct Sample {
  InputPoint x;
  double y = 0.0;
  Provenance source = Provenance::kTrueModel;
};

/// A deterministic performance function y = g(x) of a random input with
/// known prior density p(x).
///
/// Implementations must be pure: eval() and log_prior() may be called
/// concurrently and must return identical results for identical inputs.
class PerformanceModel {
 public:
  virtual ~PerformanceModel() = default;

  virtual std::string name() const = 0;
  virtual int dimension() const = 0;

  /// g(x) without argument checks or accounting. Use mmcgp::evaluate().
  virtual double eval(const InputPoint& x) const = 0;

  /// log p(x) up to a constant that is fixed for the lifetime of the model.
  virtual double log_prior(const InputPoint& x) const = 0;

  virtual InputPoint sample_prior(Rng& rng) const = 0;

  /// Typical location and per-coordinate spread of the prior. Proposals and
  /// surrogates work in coordinates standardized by these.
  virtual InputPoint input_center() const { return InputPoint::Zero(dimension()); }
  virtual InputPoint input_scale() const { return InputPoint::Ones(dimension()); }
};

struct LedgerSnapshot {
  std::uint64_t true_evals = 0;
  std::uint64_t surrogate_evals = 0;
};

/// Counts true-model and surrogate evaluations. Counters only grow.
class EvalLedger {
 public:
  void record_true() { true_evals_.fetch_add(1, std::memory_order_relaxed); }
  void record_surrogate() { surrogate_evals_.fetch_add(1, std::memory_order_relaxed); }

  std::uint64_t true_evals() const { return true_evals_.load(std::memory_order_relaxed); }
  std::uint64_t surrogate_evals() const {
    return surrogate_evals_.load(std::memory_order_relaxed);
  }
  LedgerSnapshot snapshot() const { return {true_evals(), surrogate_evals()}; }

 private:
  std::atomic<std::uint64_t> true_evals_{0};
  std::atomic<std::uint64_t> surrogate_evals_{0};
};

/// Runs the true model at x and records the evaluation in the ledger.
/// Throws ArgumentError on a dimension mismatch and EvaluationError when
/// the model returns a non-finite value.
double evaluate(const PerformanceModel& model, const InputPoint& x, EvalLedger& ledger);

double log_prior_density(const PerformanceModel& model, const InputPoint& x);

/// n i.i.d. prior draws; n must be positive.
std::vector<InputPoint> sample_prior(const PerformanceModel& model, Rng& rng, std::size_t n);

/// Product of independent normals. log_density uses the normalizing constant
/// -sum(log(2 pi var_i))/2, so the density peak is exactly representable.
class IndependentNormal {
 public:
  IndependentNormal(Eigen::VectorXd means, Eigen::VectorXd variances);
  static IndependentNormal standard(int dim);

  int dimension() const { return static_cast<int>(means_.size()); }
  const Eigen::VectorXd& means() const { return means_; }
  const Eigen::VectorXd& variances() const { return variances_; }
  Eigen::VectorXd stddevs() const { return variances_.cwiseSqrt(); }

  double log_density(const InputPoint& x) const;
  InputPoint sample(Rng& rng) const;

 private:
  Eigen::VectorXd means_;
  Eigen::VectorXd variances_;
  double log_norm_ = 0.0;
};

/// Affine map between model coordinates and unit-scale coordinates.
struct Standardizer {
  InputPoint center;
  InputPoint scale;

  static Standardizer for_model(const PerformanceModel& model) {
    return {model.input_center(), model.input_scale()};
  }
  static Standardizer identity(int dim) {
    return {InputPoint::Zero(dim), InputPoint::Ones(dim)};
  }
  InputPoint to_unit(const InputPoint& x) const {
    return (x - center).cwiseQuotient(scale);
  }
  InputPoint from_unit(const InputPoint& u) const {
    return center + u.cwiseProduct(scale);
  }
};

}  // namespace mmcgp
