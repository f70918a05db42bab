#include "mmcgp/benchmarks.hpp"

#include <algorithm>
#include <cmath>

#include "mmcgp/errors.hpp"

namespace mmcgp {

void MinDistanceSpec::validate() const {
  if (center1.size() == 0 || center1.size() != center2.size()) {
    throw ArgumentError("min_distance: centers must be nonempty and of equal dimension");
  }
  if (center1 == center2) throw ArgumentError("min_distance: centers must differ");
}

MinDistanceSpec MinDistanceSpec::planar(DistanceMetric metric) {
  return {(InputPoint(2) << 3.0, 3.0).finished(), (InputPoint(2) << 3.0, -3.0).finished(), metric};
}

MinDistanceSpec MinDistanceSpec::diagonal(int dim, DistanceMetric metric) {
  if (dim < 1) throw ArgumentError("min_distance: dimension must be positive");
  return {InputPoint::Ones(dim), -InputPoint::Ones(dim), metric};
}

double min_distance_eval(const MinDistanceSpec& spec, const InputPoint& x) {
  if (x.size() != spec.dimension()) throw ArgumentError("min_distance: dimension mismatch");
  const double d1 = (x - spec.center1).squaredNorm();
  const double d2 = (x - spec.center2).squaredNorm();
  const double d = std::min(d1, d2);
  return (spec.metric == DistanceMetric::kEuclidean ? std::sqrt(d) : d) - 1.0;
}

MinDistanceModel::MinDistanceModel(MinDistanceSpec spec)
    : spec_((spec.validate(), std::move(spec))), prior_(IndependentNormal::standard(spec_.dimension())) {}

void BeamSpec::validate() const {
  if (means.size() != 5 || variances.size() != 5) {
    throw ArgumentError("beam: five means and variances required (w, t, X, Y, E)");
  }
  if ((variances.array() <= 0.0).any()) throw ArgumentError("beam: variances must be positive");
  if (!(length > 0.0)) throw ArgumentError("beam: length must be positive");
}

double beam_eval(double w, double t, double X, double Y, double E, double L) {
  if (!(w > 0.0) || !(t > 0.0) || !(E > 0.0)) {
    throw ArgumentError("beam: w, t and E must be positive");
  }
  const double a = Y / (t * t);
  const double b = X / (w * w);
  return 4.0 * L * L * L / (E * w * t) * std::sqrt(a * a + b * b);
}

BeamModel::BeamModel(BeamSpec spec)
    : spec_((spec.validate(), std::move(spec))), prior_(spec_.means, spec_.variances) {}

double BeamModel::eval(const InputPoint& x) const {
  return beam_eval(x[0], x[1], x[2], x[3], x[4], spec_.length);
}

}  // namespace mmcgp
