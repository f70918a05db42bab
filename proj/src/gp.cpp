#include "mmcgp/gp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/QR>

#include "mmcgp/errors.hpp"

namespace mmcgp {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

double correlation(const Eigen::VectorXd& lengths, int p, const InputPoint& x,
                   const InputPoint& xp) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = std::abs(x[i] - xp[i]);
    s += (p == 1 ? d : d * d) / lengths[i];
  }
  return std::exp(-s);
}

Eigen::MatrixXd correlation_matrix(std::span<const Sample> pts, const Eigen::VectorXd& lengths,
                                   int p) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = correlation(lengths, p, pts[static_cast<std::size_t>(i)].x,
                                   pts[static_cast<std::size_t>(j)].x);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

// Cholesky of c + jitter*I with escalating jitter. Returns false if every
// level fails.
bool factorize(const Eigen::MatrixXd& c, Eigen::LLT<Eigen::MatrixXd>& llt, double& jitter) {
  for (jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    Eigen::MatrixXd m = c;
    m.diagonal().array() += jitter;
    llt.compute(m);
    if (llt.info() != Eigen::Success) continue;
    const auto diag = llt.matrixLLT().diagonal();
    if (diag.allFinite() && (diag.array() > 0.0).all()) return true;
  }
  return false;
}

Eigen::VectorXd residuals(std::span<const Sample> pts, const QuadraticMean& mean) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r[static_cast<Eigen::Index>(i)] = pts[i].y - mean(pts[i].x);
  }
  return r;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("malformed number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void KernelParams::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ArgumentError("kernel amplitude must be positive");
  }
  if (lengths.size() == 0 || (lengths.array() <= 0.0).any() || !lengths.allFinite()) {
    throw ArgumentError("kernel lengths must be positive");
  }
  if (exponent != 1 && exponent != 2) throw ArgumentError("kernel exponent must be 1 or 2");
}

double kernel_eval(const KernelParams& kp, const InputPoint& x, const InputPoint& xp) {
  if (x.size() != xp.size() || x.size() != kp.lengths.size()) {
    throw ArgumentError("kernel_eval: dimension mismatch");
  }
  return kp.amplitude * correlation(kp.lengths, kp.exponent, x, xp);
}

std::size_t local_size(int dim) {
  if (dim < 1) throw ArgumentError("local_size: dimension must be positive");
  const double d = dim;
  return static_cast<std::size_t>(std::ceil(std::sqrt(d) * (d + 1.0) * (d + 2.0) / 2.0));
}

// --- EvaluationStore -------------------------------------------------------

EvaluationStore::EvaluationStore(int dim, double duplicate_tolerance)
    : dim_(dim), tol_(duplicate_tolerance) {
  if (dim < 1) throw ArgumentError("EvaluationStore: dimension must be positive");
}

bool EvaluationStore::insert(const InputPoint& x, double y) {
  if (x.size() != dim_) throw ArgumentError("EvaluationStore::insert: dimension mismatch");
  if (!x.allFinite() || !std::isfinite(y)) {
    throw ArgumentError("EvaluationStore::insert: non-finite entry");
  }
  const double tol2 = tol_ * tol_;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double* row = coords_.data() + i * static_cast<std::size_t>(dim_);
    double d2 = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double d = row[k] - x[k];
      d2 += d * d;
    }
    if (d2 <= tol2) return false;
  }
  coords_.insert(coords_.end(), x.data(), x.data() + dim_);
  values_.push_back(y);
  return true;
}

InputPoint EvaluationStore::point(std::size_t i) const {
  return Eigen::Map<const Eigen::VectorXd>(coords_.data() + i * static_cast<std::size_t>(dim_),
                                           dim_);
}

std::vector<Sample> EvaluationStore::samples() const {
  std::vector<Sample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back({point(i), values_[i]});
  return out;
}

std::vector<std::size_t> EvaluationStore::nearest(const InputPoint& x, std::size_t n) const {
  if (x.size() != dim_) throw ArgumentError("EvaluationStore::nearest: dimension mismatch");
  const std::size_t count = size();
  std::vector<std::pair<double, std::size_t>> dist(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double* row = coords_.data() + i * static_cast<std::size_t>(dim_);
    double d2 = 0.0;
    for (int k = 0; k < dim_; ++k) {
      const double d = row[k] - x[k];
      d2 += d * d;
    }
    dist[i] = {d2, i};
  }
  const std::size_t k = std::min(n, count);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = dist[i].second;
  return idx;
}

void EvaluationStore::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int k = 0; k < dim_; ++k) out << "x_" << (k + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < size(); ++i) {
    const double* row = coords_.data() + i * static_cast<std::size_t>(dim_);
    for (int k = 0; k < dim_; ++k) out << format_double(row[k]) << ',';
    out << format_double(values_[i]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

EvaluationStore EvaluationStore::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty store file " + path.string());
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns < 2) throw IoError("store file needs at least one coordinate column");
  const int dim = static_cast<int>(columns - 1);
  EvaluationStore store(dim);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(row.size()) != dim + 1) throw IoError("ragged row in " + path.string());
    store.coords_.insert(store.coords_.end(), row.begin(), row.end() - 1);
    store.values_.push_back(row.back());
  }
  return store;
}

std::vector<Sample> nearest_neighbors(const EvaluationStore& store, const InputPoint& x,
                                      std::size_t n) {
  if (store.empty()) throw StateError("nearest_neighbors: empty store");
  std::vector<Sample> out;
  for (auto i : store.nearest(x, n)) out.push_back({store.point(i), store.value(i)});
  return out;
}

// --- QuadraticMean ---------------------------------------------------------

QuadraticMean QuadraticMean::constant(int dim, double c) {
  QuadraticMean m;
  m.degree_ = Degree::kConstant;
  m.center_ = Eigen::VectorXd::Zero(dim);
  m.scale_ = Eigen::VectorXd::Ones(dim);
  m.coeffs_ = Eigen::VectorXd::Constant(1, c);
  return m;
}

std::size_t QuadraticMean::basis_size(int dim, Degree degree) {
  const auto d = static_cast<std::size_t>(dim);
  switch (degree) {
    case Degree::kConstant: return 1;
    case Degree::kLinear: return 1 + d;
    case Degree::kQuadratic: return 1 + d + d * (d + 1) / 2;
  }
  return 1;
}

Eigen::VectorXd QuadraticMean::features(const InputPoint& x) const {
  const int d = dimension();
  Eigen::VectorXd f(static_cast<Eigen::Index>(basis_size(d, degree_)));
  f[0] = 1.0;
  if (degree_ == Degree::kConstant) return f;
  const Eigen::VectorXd u = (x - center_).cwiseQuotient(scale_);
  Eigen::Index k = 1;
  for (int i = 0; i < d; ++i) f[k++] = u[i];
  if (degree_ == Degree::kQuadratic) {
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) f[k++] = u[i] * u[j];
    }
  }
  return f;
}

double QuadraticMean::operator()(const InputPoint& x) const { return features(x).dot(coeffs_); }

QuadraticMean fit_quadratic_mean(std::span<const Sample> support) {
  if (support.empty()) throw ArgumentError("fit_quadratic_mean: empty support");
  const int d = static_cast<int>(support.front().x.size());
  const auto n = static_cast<Eigen::Index>(support.size());

  QuadraticMean m;
  m.center_ = Eigen::VectorXd::Zero(d);
  for (const auto& s : support) m.center_ += s.x;
  m.center_ /= static_cast<double>(n);
  m.scale_ = Eigen::VectorXd::Ones(d);
  for (int k = 0; k < d; ++k) {
    double spread = 0.0;
    for (const auto& s : support) spread = std::max(spread, std::abs(s.x[k] - m.center_[k]));
    if (spread > 0.0) m.scale_[k] = spread;
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = support[static_cast<std::size_t>(i)].y;

  using Degree = QuadraticMean::Degree;
  for (Degree deg : {Degree::kQuadratic, Degree::kLinear}) {
    const auto p = static_cast<Eigen::Index>(QuadraticMean::basis_size(d, deg));
    if (n < p) continue;
    m.degree_ = deg;
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      a.row(i) = m.features(support[static_cast<std::size_t>(i)].x).transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) continue;
    m.coeffs_ = qr.solve(y);
    return m;
  }
  m.degree_ = Degree::kConstant;
  m.coeffs_ = Eigen::VectorXd::Constant(1, y.mean());
  return m;
}

// --- LocalGP ---------------------------------------------------------------

LocalGP::LocalGP(std::vector<Sample> support, QuadraticMean mean, KernelParams kp)
    : support_(std::move(support)), mean_(std::move(mean)), kp_(std::move(kp)) {
  kp_.validate();
  if (support_.empty()) throw ArgumentError("LocalGP: empty support");
  for (const auto& s : support_) {
    if (s.x.size() != kp_.lengths.size()) throw ArgumentError("LocalGP: dimension mismatch");
  }
  const Eigen::MatrixXd c = correlation_matrix(support_, kp_.lengths, kp_.exponent);
  if (!factorize(c, chol_, jitter_)) {
    throw SurrogateError("LocalGP: covariance factorization failed at maximum jitter");
  }
  const Eigen::VectorXd r = residuals(support_, mean_);
  weights_ = chol_.solve(r);
  quad_form_ = r.dot(weights_);
}

GpPrediction LocalGP::predict(const InputPoint& x) const {
  const auto n = static_cast<Eigen::Index>(support_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = correlation(kp_.lengths, kp_.exponent, x, support_[static_cast<std::size_t>(i)].x);
  }
  GpPrediction out;
  out.mean = mean_(x) + k.dot(weights_);
  const Eigen::VectorXd v = chol_.matrixL().solve(k);
  out.variance = std::max(0.0, kp_.amplitude * (1.0 - v.squaredNorm()));
  return out;
}

GpPrediction gp_posterior(const LocalGP& gp, const InputPoint& x) { return gp.predict(x); }

double calibrate_amplitude(std::span<const Sample> support, const QuadraticMean& mean,
                           const Eigen::VectorXd& lengths, int exponent) {
  if (support.empty()) throw ArgumentError("calibrate_amplitude: empty support");
  LocalGP gp(std::vector<Sample>(support.begin(), support.end()), mean,
             KernelParams{1.0, lengths, exponent});
  return std::max(kAmplitudeFloor,
                  gp.residual_quadratic_form() / static_cast<double>(support.size()));
}

LocalGP fit_local_gp(std::vector<Sample> support, const KernelParams& base) {
  QuadraticMean mean = fit_quadratic_mean(support);
  const auto n = static_cast<double>(support.size());
  LocalGP gp(std::move(support), std::move(mean), KernelParams{1.0, base.lengths, base.exponent});
  gp.set_amplitude(std::max(kAmplitudeFloor, gp.residual_quadratic_form() / n));
  return gp;
}

LocalGP build_local_surrogate(const EvaluationStore& store, const InputPoint& x,
                              const KernelParams& base) {
  return fit_local_gp(nearest_neighbors(store, x, local_size(store.dimension())), base);
}

// --- length-scale calibration ---------------------------------------------

namespace {

// Profile log marginal likelihood with the amplitude at its maximizer.
// Returns -inf when the matrix cannot be factorized.
double profile_likelihood(std::span<const Sample> data, const Eigen::VectorXd& r,
                          const Eigen::VectorXd& lengths, int p) {
  const Eigen::MatrixXd c = correlation_matrix(data, lengths, p);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  if (!factorize(c, llt, jitter)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(r.size());
  const double quad = r.dot(llt.solve(r));
  const double a = std::max(quad / n, std::numeric_limits<double>::min());
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * n * std::log(a) - 0.5 * logdet;
}

}  // namespace

Eigen::VectorXd calibrate_lengthscales(std::span<const Sample> data, int exponent) {
  if (data.size() < 2) throw ArgumentError("calibrate_lengthscales: need at least two points");
  if (exponent != 1 && exponent != 2) throw ArgumentError("kernel exponent must be 1 or 2");
  const auto d = static_cast<Eigen::Index>(data.front().x.size());
  const double n = static_cast<double>(data.size());

  Eigen::VectorXd lo = data.front().x, hi = data.front().x, mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : data) {
    lo = lo.cwiseMin(s.x);
    hi = hi.cwiseMax(s.x);
    mean += s.x;
  }
  mean /= n;
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(d);
  for (const auto& s : data) sd += (s.x - mean).cwiseAbs2();
  sd = (sd / n).cwiseSqrt();

  Eigen::VectorXd range = hi - lo;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(range[k] > 0.0)) range[k] = 1.0;
  }

  const double y0 = data.front().y;
  const bool constant = std::all_of(data.begin(), data.end(), [&](const Sample& s) {
    return std::abs(s.y - y0) <= 1e-12 * (1.0 + std::abs(y0));
  });
  if (constant) return range;

  const QuadraticMean mu = fit_quadratic_mean(data);
  const Eigen::VectorXd r = residuals(data, mu);
  if (r.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + std::abs(y0))) return range;

  constexpr int kGrid = 13;
  Eigen::VectorXd base(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double s = sd[k] > 0.0 ? sd[k] : 1.0;
    base[k] = exponent == 1 ? s : s * s;
  }
  auto grid_value = [&](Eigen::Index k, int g) {
    return base[k] * std::pow(10.0, -2.0 + g / 3.0);
  };

  Eigen::VectorXd lengths = base;
  double best = profile_likelihood(data, r, lengths, exponent);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (Eigen::Index k = 0; k < d; ++k) {
      double best_value = lengths[k];
      for (int g = 0; g < kGrid; ++g) {
        Eigen::VectorXd trial = lengths;
        trial[k] = grid_value(k, g);
        const double ll = profile_likelihood(data, r, trial, exponent);
        if (ll > best) {
          best = ll;
          best_value = trial[k];
        }
      }
      lengths[k] = best_value;
    }
  }
  return lengths;
}

}  // namespace mmcgp
