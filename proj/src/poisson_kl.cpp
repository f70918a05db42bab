#include "mmcgp/poisson_kl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "mmcgp/errors.hpp"

namespace mmcgp {

void PoissonKLSpec::validate() const {
  if (grid < 8) throw ArgumentError("poisson_kl: grid must have at least 8 cells per side");
  if (modes < 1 || modes > nodes()) throw ArgumentError("poisson_kl: modes out of range");
  if (!(a0 > 0.0) || !(corr > 0.0)) throw ArgumentError("poisson_kl: a0 and corr must be positive");
  if (!(obs_x >= 0.0 && obs_x <= 1.0 && obs_y >= 0.0 && obs_y <= 1.0)) {
    throw ArgumentError("poisson_kl: observation point must lie in the unit square");
  }
}

KLBasis kl_decompose(const PoissonKLSpec& spec) {
  spec.validate();
  const int n = spec.grid;
  const double h = 1.0 / n;

  Eigen::MatrixXd k1(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = (i - j) * h;
      k1(i, j) = h * std::exp(-d * d / spec.corr);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k1);
  if (es.info() != Eigen::Success) throw StateError("kl_decompose: eigen solver failed");

  // Descending 1D pairs; vectors rescaled to unit norm under weight h.
  const int keep = std::min(n, spec.modes);
  std::vector<double> mu(static_cast<std::size_t>(keep));
  Eigen::MatrixXd xi(n, keep);
  for (int k = 0; k < keep; ++k) {
    mu[static_cast<std::size_t>(k)] = std::max(0.0, es.eigenvalues()[n - 1 - k]);
    xi.col(k) = es.eigenvectors().col(n - 1 - k) / std::sqrt(h);
  }

  struct Pair {
    double lambda;
    int a;
    int b;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < keep; ++a) {
    for (int b = 0; b < keep; ++b) {
      pairs.push_back({mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)], a, b});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& l, const Pair& r) {
    if (l.lambda != r.lambda) return l.lambda > r.lambda;
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  });

  KLBasis basis;
  basis.grid = n;
  basis.corr = spec.corr;
  basis.eigenvalues.resize(spec.modes);
  basis.modes.resize(spec.nodes(), spec.modes);
  for (int j = 0; j < spec.modes; ++j) {
    const Pair& p = pairs[static_cast<std::size_t>(j)];
    basis.eigenvalues[j] = p.lambda;
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) basis.modes(ix + n * iy, j) = xi(ix, p.a) * xi(iy, p.b);
    }
    const double scale = basis.modes.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < basis.modes.rows(); ++r) {
      const double v = basis.modes(r, j);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) basis.modes.col(j) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

Eigen::VectorXd realize_field(const KLBasis& basis, const Eigen::VectorXd& c, double a0) {
  if (c.size() != basis.size()) throw ArgumentError("realize_field: coefficient count mismatch");
  const Eigen::VectorXd z = basis.modes * c.cwiseProduct(basis.eigenvalues.cwiseSqrt());
  return a0 * z.array().exp().matrix();
}

Eigen::VectorXd solve_poisson(const Eigen::VectorXd& a, const PoissonKLSpec& spec) {
  const int n = spec.grid;
  if (a.size() != spec.nodes()) throw ArgumentError("solve_poisson: field size mismatch");
  if (!(a.array() > 0.0).all() || !a.allFinite()) {
    throw ArgumentError("solve_poisson: coefficient must be positive");
  }
  const double h = 1.0 / n;
  auto idx = [n](int ix, int iy) { return ix + n * iy; };

  // Sum over faces of T_f (u_c - u_nb) = -f h^2, with T = harmonic mean
  // inside and 2 a_c toward a wall (half-cell distance, u_wall = 0).
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5 * spec.nodes()));
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int c = idx(ix, iy);
      const double ac = a[c];
      double diag = 0.0;
      const int nbx[4] = {ix - 1, ix + 1, ix, ix};
      const int nby[4] = {iy, iy, iy - 1, iy + 1};
      for (int f = 0; f < 4; ++f) {
        if (nbx[f] < 0 || nbx[f] >= n || nby[f] < 0 || nby[f] >= n) {
          diag += 2.0 * ac;
          continue;
        }
        const int nb = idx(nbx[f], nby[f]);
        const double t = 2.0 * ac * a[nb] / (ac + a[nb]);
        diag += t;
        trips.emplace_back(c, nb, -t);
      }
      trips.emplace_back(c, c, diag);
    }
  }
  Eigen::SparseMatrix<double> A(spec.nodes(), spec.nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(spec.nodes(), -spec.forcing * h * h);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw StateError("solve_poisson: factorization failed");
  Eigen::VectorXd u = solver.solve(rhs);
  const double rel = (A * u - rhs).norm() / rhs.norm();
  if (!(rel <= 1e-10)) throw StateError("solve_poisson: residual above tolerance");
  return u;
}

double interpolate_grid(const Eigen::VectorXd& u, int grid, double x, double y) {
  const double h = 1.0 / grid;
  // Axis nodes: the wall, every cell center, the wall.
  auto locate = [&](double p, int& i0, double& t) {
    const double s = p / h + 0.5;  // node coordinate: 0 = wall, k = center k-1
    if (s < 1.0) {
      i0 = 0;
      t = std::clamp(p / (0.5 * h), 0.0, 1.0);
    } else if (s >= grid) {
      i0 = grid;
      t = std::clamp((p - (1.0 - 0.5 * h)) / (0.5 * h), 0.0, 1.0);
    } else {
      i0 = static_cast<int>(std::floor(s));
      t = s - i0;
    }
  };
  auto node = [&](int kx, int ky) {
    if (kx == 0 || ky == 0 || kx == grid + 1 || ky == grid + 1) return 0.0;
    return u[(kx - 1) + grid * (ky - 1)];
  };
  int ix = 0, iy = 0;
  double tx = 0.0, ty = 0.0;
  locate(x, ix, tx);
  locate(y, iy, ty);
  return (1 - tx) * (1 - ty) * node(ix, iy) + tx * (1 - ty) * node(ix + 1, iy) +
         (1 - tx) * ty * node(ix, iy + 1) + tx * ty * node(ix + 1, iy + 1);
}

double pde_eval(const PoissonKLSpec& spec, const KLBasis& basis, const Eigen::VectorXd& c) {
  if (basis.grid != spec.grid || basis.size() != spec.modes) {
    throw ArgumentError("pde_eval: basis does not match the problem settings");
  }
  const Eigen::VectorXd a = realize_field(basis, c, spec.a0);
  const Eigen::VectorXd u = solve_poisson(a, spec);
  return interpolate_grid(u, spec.grid, spec.obs_x, spec.obs_y);
}

// --- cache -------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string cache_key(int grid, double corr, int modes) {
  return "# kl_basis grid=" + std::to_string(grid) + " corr=" + fmt(corr) +
         " modes=" + std::to_string(modes);
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    std::string_view tok(line.data() + start, comma - start);
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw IoError("malformed KL cache entry");
    }
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string kl_cache_name(const PoissonKLSpec& spec) {
  return "kl_g" + std::to_string(spec.grid) + "_c" + fmt(spec.corr) + "_J" +
         std::to_string(spec.modes) + ".csv";
}

void save_kl_basis(const std::filesystem::path& path, const KLBasis& basis) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << cache_key(basis.grid, basis.corr, basis.size()) << '\n';
  for (int j = 0; j < basis.size(); ++j) out << (j ? "," : "") << fmt(basis.eigenvalues[j]);
  out << '\n';
  for (Eigen::Index r = 0; r < basis.modes.rows(); ++r) {
    for (Eigen::Index j = 0; j < basis.modes.cols(); ++j) {
      out << (j ? "," : "") << fmt(basis.modes(r, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<KLBasis> load_kl_basis(const std::filesystem::path& path,
                                     const PoissonKLSpec& spec) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != cache_key(spec.grid, spec.corr, spec.modes)) return std::nullopt;
  KLBasis basis;
  basis.grid = spec.grid;
  basis.corr = spec.corr;
  if (!std::getline(in, line)) throw IoError("truncated KL cache " + path.string());
  const auto lambdas = split_numbers(line);
  if (static_cast<int>(lambdas.size()) != spec.modes) throw IoError("bad KL cache header row");
  basis.eigenvalues = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), spec.modes);
  basis.modes.resize(spec.nodes(), spec.modes);
  for (int r = 0; r < spec.nodes(); ++r) {
    if (!std::getline(in, line)) throw IoError("truncated KL cache " + path.string());
    const auto row = split_numbers(line);
    if (static_cast<int>(row.size()) != spec.modes) throw IoError("ragged KL cache row");
    for (int j = 0; j < spec.modes; ++j) basis.modes(r, j) = row[static_cast<std::size_t>(j)];
  }
  return basis;
}

KLBasis kl_basis_cached(const PoissonKLSpec& spec, const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return kl_decompose(spec);
  const auto path = cache_dir / kl_cache_name(spec);
  if (auto cached = load_kl_basis(path, spec)) return *std::move(cached);
  KLBasis basis = kl_decompose(spec);
  std::filesystem::create_directories(cache_dir);
  save_kl_basis(path, basis);
  return basis;
}

PoissonKLModel::PoissonKLModel(PoissonKLSpec spec, std::shared_ptr<const KLBasis> basis)
    : spec_(std::move(spec)), basis_(std::move(basis)), prior_(IndependentNormal::standard(spec_.modes)) {
  spec_.validate();
  if (!basis_ || basis_->grid != spec_.grid || basis_->size() != spec_.modes) {
    throw ArgumentError("PoissonKLModel: basis does not match the problem settings");
  }
}

PoissonKLModel::PoissonKLModel(PoissonKLSpec spec)
    : PoissonKLModel(spec, std::make_shared<const KLBasis>(kl_decompose(spec))) {}

}  // namespace mmcgp
