#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mmcgp/problem.hpp"

namespace mmcgp {

/// K(x, x') = amplitude * exp(-sum_i |x_i - x'_i|^p / l_i), p in {1, 2}.
struct KernelParams {
  double amplitude = 1.0;
  Eigen::VectorXd lengths;
  int exponent = 2;

  void validate() const;
};

double kernel_eval(const KernelParams& kp, const InputPoint& x, const InputPoint& xp);

/// Number of neighbors used for a local surrogate in d dimensions:
/// ceil(sqrt(d) (d + 1) (d + 2) / 2).
std::size_t local_size(int dim);

/// The set S of true-model evaluations. Points closer than the duplicate
/// tolerance (Euclidean) to an existing entry are not inserted.
class EvaluationStore {
 public:
  explicit EvaluationStore(int dim, double duplicate_tolerance = 1e-12);

  int dimension() const { return dim_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Returns false (and leaves the store unchanged) for a duplicate point.
  bool insert(const InputPoint& x, double y);

  InputPoint point(std::size_t i) const;
  double value(std::size_t i) const { return values_[i]; }
  std::vector<Sample> samples() const;

  /// Indices of the n nearest entries, nearest first; equal distances keep
  /// insertion order. Returns every entry when n >= size().
  std::vector<std::size_t> nearest(const InputPoint& x, std::size_t n) const;

  /// CSV with header x_1..x_d,y and round-trip exact decimal rendering.
  void save_csv(const std::filesystem::path& path) const;
  static EvaluationStore load_csv(const std::filesystem::path& path);

 private:
  int dim_;
  double tol_;
  std::vector<double> coords_;  // row-major, dim_ per entry
  std::vector<double> values_;
};

/// Throws StateError on an empty store.
std::vector<Sample> nearest_neighbors(const EvaluationStore& store, const InputPoint& x,
                                      std::size_t n);

/// Polynomial prior mean over the full monomial basis up to the given
/// degree. Features are evaluated on coordinates centered and scaled by the
/// support it was fitted to.
class QuadraticMean {
 public:
  enum class Degree { kConstant = 0, kLinear = 1, kQuadratic = 2 };

  QuadraticMean() = default;
  static QuadraticMean constant(int dim, double c);

  static std::size_t basis_size(int dim, Degree degree);

  double operator()(const InputPoint& x) const;
  Degree degree() const { return degree_; }
  int dimension() const { return static_cast<int>(center_.size()); }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  /// Feature row for x in this mean's normalized coordinates.
  Eigen::VectorXd features(const InputPoint& x) const;

 private:
  friend QuadraticMean fit_quadratic_mean(std::span<const Sample> support);

  Degree degree_ = Degree::kConstant;
  Eigen::VectorXd center_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd coeffs_;
};

/// Least-squares fit; falls back to linear, then constant, when the
/// support is too small or the design is rank deficient.
QuadraticMean fit_quadratic_mean(std::span<const Sample> support);

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Noise-free GP regression on a fixed support with a polynomial prior mean.
class LocalGP {
 public:
  /// Factorizes the unit-amplitude kernel matrix, adding 1e-10 to the
  /// diagonal and escalating by 10x up to 1e-4. Throws SurrogateError if
  /// that fails.
  LocalGP(std::vector<Sample> support, QuadraticMean mean, KernelParams kp);

  GpPrediction predict(const InputPoint& x) const;

  const KernelParams& params() const { return kp_; }
  const QuadraticMean& mean_function() const { return mean_; }
  const std::vector<Sample>& support() const { return support_; }
  double jitter() const { return jitter_; }

  /// r^T C1^{-1} r for residuals r = y - mean(X) and the unit-amplitude matrix.
  double residual_quadratic_form() const { return quad_form_; }

  void set_amplitude(double a) { kp_.amplitude = a; }

 private:
  std::vector<Sample> support_;
  QuadraticMean mean_;
  KernelParams kp_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;  // C1^{-1} r
  double quad_form_ = 0.0;
};

/// Posterior mean and variance (clamped at zero) at x.
GpPrediction gp_posterior(const LocalGP& gp, const InputPoint& x);

inline constexpr double kAmplitudeFloor = 1e-12;

/// Closed-form marginal-likelihood amplitude r^T C1^{-1} r / n, floored.
double calibrate_amplitude(std::span<const Sample> support, const QuadraticMean& mean,
                           const Eigen::VectorXd& lengths, int exponent);

/// Per-coordinate correlation lengths maximizing the profile marginal
/// likelihood of the data over a 13-point log grid spanning [0.01, 100]
/// times sd_i^p, two coordinate sweeps. Constant data falls back to the
/// coordinate ranges.
Eigen::VectorXd calibrate_lengthscales(std::span<const Sample> data, int exponent);

/// Fits the mean, calibrates the amplitude and factorizes.
LocalGP fit_local_gp(std::vector<Sample> support, const KernelParams& base);

/// Local surrogate at x from its local_size(d) nearest stored evaluations.
LocalGP build_local_surrogate(const EvaluationStore& store, const InputPoint& x,
                              const KernelParams& base);

}  // namespace mmcgp
