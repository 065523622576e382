#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bloch/fields.hpp"
#include "bloch/torus.hpp"

namespace bloch {

/// Riemannian metric g0 on the transverse torus T^{n-1}, sampled per node.
class TransverseMetric {
 public:
  static TransverseMetric flat(const TorusGrid& grid);
  /// Symmetric matrix of trig polynomials in the transverse coordinates;
  /// only the upper triangle is read.
  static TransverseMetric from_trig(const TorusGrid& grid,
                                    std::vector<std::vector<TrigPolynomial>> components);
  /// Raw samples: one row-major d x d matrix per node, with declared bandwidth.
  static TransverseMetric from_samples(const TorusGrid& grid, std::vector<double> components,
                                       int bandwidth);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  int bandwidth() const { return bandwidth_; }
  bool is_flat() const { return flat_; }
  /// Diagonal metric whose a-th entry depends on x_a only; -Delta then separates.
  bool is_separable() const { return separable_; }

  Eigen::MatrixXd components(std::size_t node) const;
  Eigen::MatrixXd inverse(std::size_t node) const;
  std::span<const double> density() const { return *density_; }
  const std::shared_ptr<const std::vector<double>>& shared_density() const { return density_; }
  const std::optional<std::vector<std::vector<TrigPolynomial>>>& trig() const { return trig_; }

  /// The same metric (re)sampled on another grid; requires a trig description.
  TransverseMetric resampled(const TorusGrid& grid) const;
  /// s * g0.
  TransverseMetric scaled(double s) const;
  /// One-dimensional factor a(x_axis) of a separable metric, as a metric on T^1.
  TransverseMetric separable_factor(int axis) const;

 private:
  TransverseMetric(TorusGrid grid, std::vector<double> comps, int bandwidth);
  void finish();

  TorusGrid grid_;
  std::vector<double> comps_;
  std::vector<double> inverse_;
  std::shared_ptr<const std::vector<double>> density_;
  int bandwidth_ = 0;
  bool flat_ = false;
  bool separable_ = false;
  std::optional<std::vector<std::vector<TrigPolynomial>>> trig_;
};

/// Fourier-Galerkin stiffness and mass for -Delta_{g0} on e^{i k.x}, |k|_inf <= K_max.
struct TransverseForms {
  std::vector<std::vector<int>> modes;
  Eigen::MatrixXcd stiffness;
  Eigen::MatrixXcd mass;
  int max_mode = 0;
};

/// Throws std::invalid_argument when N < 2 (2 K_max + bandwidth), unless
/// grid_quadrature is set; the forms are then the exact discrete ones on
/// the grid (aliasing included), K_max <= N/2 - 1.
TransverseForms assemble_forms(const TransverseMetric& metric, int max_mode,
                               bool grid_quadrature = false);

class TransverseBasis;

/// Generalized Hermitian eigenproblem; all eigenpairs, ascending. Degenerate
/// groups are rotated onto their dominant Fourier indices, ordered
/// lexicographically.
TransverseBasis eigendecompose(const TransverseForms& forms, const TransverseMetric& metric);

/// Eigenpairs (lambda_k, psi_k) of -Delta_{g0}, orthonormal in the weighted
/// grid inner product.
class TransverseBasis {
 public:
  enum class Kind { plane_wave, galerkin, separable };

  Kind kind() const { return kind_; }
  const TorusGrid& grid() const { return grid_; }
  int count() const { return static_cast<int>(eigenvalues_.size()); }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  double eigenvalue(int k) const { return eigenvalues_[k]; }
  /// Every eigenvalue of -Delta_{g0} not in this basis is >= this value.
  double missing_lower_bound() const { return missing_lower_bound_; }
  const std::shared_ptr<const std::vector<double>>& density() const { return density_; }
  /// Dominant Fourier index of psi_k (plane wave: its wave vector).
  const std::vector<int>& dominant_index(int k) const { return dominant_[k]; }
  /// Fourier coefficients of psi_k (galerkin bases; empty otherwise).
  const Eigen::MatrixXcd& fourier_coefficients() const { return fourier_; }
  const std::vector<std::vector<int>>& fourier_modes() const { return fourier_modes_; }

  GridFunction eigenfunction(int k) const;

  /// Batched transforms over `slices` contiguous transverse slices.
  /// analyze: c[s*K + k] = <f_s, psi_k>; synthesize: f_s = sum_k c[s*K + k] psi_k.
  void analyze(std::span<const cplx> values, int slices, std::span<cplx> coefs) const;
  void synthesize(std::span<const cplx> coefs, int slices, std::span<cplx> values) const;

  /// The first `count` modes.
  TransverseBasis truncated(int count) const;
  /// Modes with lambda <= cut.
  TransverseBasis below(double cut) const;
  /// An arbitrary subset (kept in the given order).
  TransverseBasis subset(const std::vector<int>& indices) const;
  /// The `count` modes whose eigenvalues lie closest to `target`.
  TransverseBasis nearest_to(double target, int count) const;

  /// Plane waves (2 pi)^{-d/2} e^{i k.x} ordered by |k|^2, then k
  /// lexicographically; all |k|_inf <= N/2 - 1 when count < 0.
  static TransverseBasis plane_waves(const TorusGrid& grid, int count = -1);
  /// Tensor products of one-dimensional bases for a separable metric.
  static TransverseBasis separable(const TransverseMetric& metric, int max_mode_1d);

 private:
  friend TransverseBasis eigendecompose(const TransverseForms&, const TransverseMetric&);
  TransverseBasis(Kind kind, TorusGrid grid) : kind_(kind), grid_(grid) {}

  Kind kind_;
  TorusGrid grid_;
  std::vector<double> eigenvalues_;
  std::vector<std::vector<int>> dominant_;
  double missing_lower_bound_ = 0.0;
  std::shared_ptr<const std::vector<double>> density_;

  // galerkin
  Eigen::MatrixXcd fourier_;
  std::vector<std::vector<int>> fourier_modes_;
  Eigen::MatrixXcd samples_;  // nodes x K
  // separable: per-axis 1-D samples (N x M_a) and weights; mode -> per-axis index
  std::vector<Eigen::MatrixXcd> factors_;
  std::vector<std::vector<double>> factor_weights_;
  std::vector<std::vector<int>> tuples_;
  // plane wave: DFT bin per mode
  std::vector<std::size_t> bins_;
};

/// Transverse eigensolver entry point: plane waves for a flat metric,
/// tensor products for a separable one, dense Galerkin otherwise.
struct TransverseOptions {
  int max_mode = 4;
  int count = 64;
  bool grid_quadrature = false;
};
TransverseBasis solve_transverse(const TransverseMetric& metric, const TransverseOptions& options);

/// Distinct flat eigenvalues |k|^2 <= cut of T^d (d = 1, 2) with multiplicities.
std::vector<std::pair<long long, int>> flat_spectrum(int dim, long long cut);

}  // namespace bloch
