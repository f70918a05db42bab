#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "mmcgp/problem.hpp"

namespace mmcgp {

/// div(a grad u) = f on the unit square, u = 0 on the boundary, with
/// log a a Gaussian field with covariance exp(-|x - x'|^2 / corr) truncated
/// to `modes` KL terms. The grid has `grid` x `grid` cells; unknowns and KL
/// nodes sit at the cell centers.
struct PoissonKLSpec {
  int grid = 65;
  double a0 = 1.0;
  double corr = 0.6;
  int modes = 10;
  double forcing = 1.0;
  double obs_x = 0.5;
  double obs_y = 0.5;

  void validate() const;
  int nodes() const { return grid * grid; }
};

/// Discrete KL eigenpairs. Column j of `modes` holds xi_j at the cell
/// centers (index ix + grid * iy), orthonormal under the weight h^2.
struct KLBasis {
  int grid = 0;
  double corr = 0.0;
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXd modes;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double weight() const { return 1.0 / (static_cast<double>(grid) * grid); }
};

/// Top eigenpairs of the quadrature-weighted covariance matrix. The kernel
/// factorizes over the two axes, so the 2D pairs are products of the 1D
/// pairs. Degenerate eigenvalues are ordered by (x-mode, y-mode) index. Each
/// mode's first nonzero entry is positive.
KLBasis kl_decompose(const PoissonKLSpec& spec);

/// a0 * exp(sum_j c_j sqrt(lambda_j) xi_j) at every node.
Eigen::VectorXd realize_field(const KLBasis& basis, const Eigen::VectorXd& c, double a0 = 1.0);

/// Cell-centered finite-volume solve with harmonic-mean face coefficients.
/// Throws StateError if the relative residual exceeds 1e-10.
Eigen::VectorXd solve_poisson(const Eigen::VectorXd& a, const PoissonKLSpec& spec);

/// Bilinear interpolation of cell-centered values, taking u = 0 on the walls.
double interpolate_grid(const Eigen::VectorXd& u, int grid, double x, double y);

/// u(x*) for the field with KL coordinates c.
double pde_eval(const PoissonKLSpec& spec, const KLBasis& basis, const Eigen::VectorXd& c);

std::string kl_cache_name(const PoissonKLSpec& spec);
void save_kl_basis(const std::filesystem::path& path, const KLBasis& basis);
/// Returns nullopt when the file is absent or was written for other settings.
std::optional<KLBasis> load_kl_basis(const std::filesystem::path& path, const PoissonKLSpec& spec);

/// Loads the basis from `cache_dir` if present, otherwise decomposes and
/// writes it there. An empty cache_dir disables caching.
KLBasis kl_basis_cached(const PoissonKLSpec& spec, const std::filesystem::path& cache_dir);

class PoissonKLModel : public PerformanceModel {
 public:
  PoissonKLModel(PoissonKLSpec spec, std::shared_ptr<const KLBasis> basis);
  explicit PoissonKLModel(PoissonKLSpec spec);

  std::string name() const override { return "poisson_kl"; }
  int dimension() const override { return spec_.modes; }
  double eval(const InputPoint& c) const override { return pde_eval(spec_, *basis_, c); }
  double log_prior(const InputPoint& c) const override { return prior_.log_density(c); }
  InputPoint sample_prior(Rng& rng) const override { return prior_.sample(rng); }

  const KLBasis& basis() const { return *basis_; }
  const PoissonKLSpec& spec() const { return spec_; }

 private:
  PoissonKLSpec spec_;
  std::shared_ptr<const KLBasis> basis_;
  IndependentNormal prior_;
};

}  // namespace mmcgp
