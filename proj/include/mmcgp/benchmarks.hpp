#pragma once

#include <string>

#include "mmcgp/problem.hpp"

namespace mmcgp {

enum class DistanceMetric { kEuclidean, kSquaredEuclidean };

/// g(x) = min(dist(x, c1), dist(x, c2)) - 1 with standard normal inputs.
struct MinDistanceSpec {
  InputPoint center1;
  InputPoint center2;
  DistanceMetric metric = DistanceMetric::kEuclidean;

  int dimension() const { return static_cast<int>(center1.size()); }
  void validate() const;

  /// Two-dimensional example with centers (3, 3) and (3, -3).
  static MinDistanceSpec planar(DistanceMetric metric);
  /// Centers (1, ..., 1) and (-1, ..., -1) in d dimensions.
  static MinDistanceSpec diagonal(int dim, DistanceMetric metric);
};

double min_distance_eval(const MinDistanceSpec& spec, const InputPoint& x);

class MinDistanceModel : public PerformanceModel {
 public:
  explicit MinDistanceModel(MinDistanceSpec spec);

  std::string name() const override { return "min_distance"; }
  int dimension() const override { return spec_.dimension(); }
  double eval(const InputPoint& x) const override { return min_distance_eval(spec_, x); }
  double log_prior(const InputPoint& x) const override { return prior_.log_density(x); }
  InputPoint sample_prior(Rng& rng) const override { return prior_.sample(rng); }

  const MinDistanceSpec& spec() const { return spec_; }

 private:
  MinDistanceSpec spec_;
  IndependentNormal prior_;
};

/// Cantilever beam tip deflection with independent normal inputs ordered
/// (w, t, X, Y, E).
struct BeamSpec {
  double length = 100.0;
  Eigen::VectorXd means = (Eigen::VectorXd(5) << 4.0, 4.0, 500.0, 1000.0, 2.9e7).finished();
  Eigen::VectorXd variances =
      (Eigen::VectorXd(5) << 0.001, 0.0001, 100.0, 100.0, 1.45e6).finished();

  void validate() const;
};

/// y = 4 L^3 / (E w t) * sqrt((Y / t^2)^2 + (X / w^2)^2). Throws
/// ArgumentError for nonpositive w, t or E.
double beam_eval(double w, double t, double X, double Y, double E, double L = 100.0);

class BeamModel : public PerformanceModel {
 public:
  explicit BeamModel(BeamSpec spec = {});

  std::string name() const override { return "beam"; }
  int dimension() const override { return 5; }
  double eval(const InputPoint& x) const override;
  double log_prior(const InputPoint& x) const override { return prior_.log_density(x); }
  InputPoint sample_prior(Rng& rng) const override { return prior_.sample(rng); }
  InputPoint input_center() const override { return prior_.means(); }
  InputPoint input_scale() const override { return prior_.stddevs(); }

 private:
  BeamSpec spec_;
  IndependentNormal prior_;
};

/// g(x) = x_1 under a standard normal prior; the exact bin masses are known.
class IdentityModel : public PerformanceModel {
 public:
  explicit IdentityModel(int dim = 1) : prior_(IndependentNormal::standard(dim)) {}

  std::string name() const override { return "identity"; }
  int dimension() const override { return prior_.dimension(); }
  double eval(const InputPoint& x) const override { return x[0]; }
  double log_prior(const InputPoint& x) const override { return prior_.log_density(x); }
  InputPoint sample_prior(Rng& rng) const override { return prior_.sample(rng); }

 private:
  IndependentNormal prior_;
};

}  // namespace mmcgp
