#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mmcgp/benchmarks.hpp"
#include "mmcgp/errors.hpp"
#include "mmcgp/problem.hpp"

using namespace mmcgp;

namespace {

class NanModel : public PerformanceModel {
 public:
  std::string name() const override { return "nan"; }
  int dimension() const override { return 2; }
  double eval(const InputPoint& x) const override { return x[0] > 0 ? std::nan("") : 1.0; }
  double log_prior(const InputPoint&) const override { return 0.0; }
  InputPoint sample_prior(Rng&) const override { return InputPoint::Zero(2); }
};

InputPoint pt(std::initializer_list<double> v) {
  InputPoint x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST(Evaluate, MinDistanceAtCenter) {
  MinDistanceModel m(MinDistanceSpec::planar(DistanceMetric::kEuclidean));
  EvalLedger ledger;
  EXPECT_DOUBLE_EQ(evaluate(m, pt({3, 3}), ledger), -1.0);
  EXPECT_NEAR(evaluate(m, pt({0, 0}), ledger), std::sqrt(18.0) - 1.0, 1e-12);
  EXPECT_EQ(ledger.true_evals(), 2u);
}

TEST(Evaluate, WrongDimensionThrows) {
  MinDistanceModel m(MinDistanceSpec::planar(DistanceMetric::kEuclidean));
  EvalLedger ledger;
  EXPECT_THROW(evaluate(m, pt({1, 2, 3}), ledger), ArgumentError);
  EXPECT_EQ(ledger.true_evals(), 0u);
}

TEST(Evaluate, NonFiniteOutputCarriesInput) {
  NanModel m;
  EvalLedger ledger;
  try {
    evaluate(m, pt({0.5, -2.0}), ledger);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.input(), pt({0.5, -2.0}));
  }
}

TEST(Evaluate, DeterministicAndLedgerExact) {
  BeamModel m;
  EvalLedger ledger;
  Rng rng(3);
  for (int k = 1; k <= 25; ++k) {
    const InputPoint x = m.sample_prior(rng);
    const double a = evaluate(m, x, ledger);
    const double b = evaluate(m, x, ledger);
    EXPECT_EQ(a, b);
    EXPECT_EQ(ledger.true_evals(), static_cast<std::uint64_t>(2 * k));
  }
  ledger.record_surrogate();
  EXPECT_EQ(ledger.snapshot().surrogate_evals, 1u);
}

TEST(LogPrior, StandardNormalPeakAndDifference) {
  MinDistanceModel m(MinDistanceSpec::planar(DistanceMetric::kEuclidean));
  EXPECT_NEAR(log_prior_density(m, pt({0, 0})), -std::log(2 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(log_prior_density(m, pt({1, 0})) - log_prior_density(m, pt({0, 0})), -0.5, 1e-14);
  EXPECT_THROW(log_prior_density(m, pt({0})), ArgumentError);
}

TEST(LogPrior, BeamAtMeanIsTheConstant) {
  BeamSpec spec;
  BeamModel m(spec);
  double c = 0.0;
  for (int i = 0; i < 5; ++i) c -= 0.5 * std::log(2 * std::numbers::pi * spec.variances[i]);
  EXPECT_NEAR(log_prior_density(m, spec.means), c, 1e-12);
}

TEST(SamplePrior, ZeroCountThrows) {
  IdentityModel m(2);
  Rng rng(1);
  EXPECT_THROW(sample_prior(m, rng, 0), ArgumentError);
}

TEST(SamplePrior, MomentsMatchStandardNormal) {
  IdentityModel m(2);
  Rng rng(11);
  const auto xs = sample_prior(m, rng, 100000);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  for (const auto& x : xs) {
    mean += x;
    sq += x.cwiseProduct(x);
  }
  mean /= xs.size();
  sq /= xs.size();
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(mean[i]), 0.02);
    EXPECT_NEAR(sq[i] - mean[i] * mean[i], 1.0, 0.05);
  }
}

TEST(SamplePrior, BeamVariancesWithinFivePercent) {
  BeamSpec spec;
  BeamModel m(spec);
  Rng rng(5);
  const auto xs = sample_prior(m, rng, 100000);
  for (int i = 0; i < 5; ++i) {
    double s = 0, s2 = 0;
    for (const auto& x : xs) {
      s += x[i];
      s2 += x[i] * x[i];
    }
    const double n = static_cast<double>(xs.size());
    const double var = s2 / n - (s / n) * (s / n);
    EXPECT_NEAR(var / spec.variances[i], 1.0, 0.05) << "coordinate " << i;
  }
}

TEST(SamplePrior, SameSeedSameSequence) {
  BeamModel m;
  Rng a(99), b(99);
  EXPECT_EQ(sample_prior(m, a, 10), sample_prior(m, b, 10));
}

TEST(IndependentNormal, RejectsBadVariances) {
  EXPECT_THROW(IndependentNormal(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)), ArgumentError);
  EXPECT_THROW(IndependentNormal(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(3)), ArgumentError);
}

TEST(Standardizer, RoundTrip) {
  BeamModel m;
  const Standardizer s = Standardizer::for_model(m);
  const InputPoint x = pt({4.01, 3.99, 510, 990, 2.8e7});
  EXPECT_TRUE(s.from_unit(s.to_unit(x)).isApprox(x, 1e-14));
  EXPECT_TRUE(s.to_unit(m.input_center()).isZero());
}
