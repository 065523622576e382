#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "bloch/fields.hpp"
#include "bloch/modes.hpp"
#include "bloch/transverse.hpp"

namespace bloch {

struct ShiftParameters {
  std::vector<cplx> theta;
  double tau = 0.0;

  /// theta_tau = (1/2 + i tau, 0, ..., 0).
  static ShiftParameters thomas(int dim, double tau);
  static ShiftParameters real(std::span<const double> theta);
};

/// g = c (dx1^2 + g0(x')) sampled on T^n.
class FullMetric {
 public:
  FullMetric(const TorusGrid& grid, ScalarField conformal, TransverseMetric transverse);
  static FullMetric flat(const TorusGrid& grid);

  const TorusGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  const ScalarField& conformal_field() const { return conformal_; }
  std::span<const double> conformal() const { return c_; }
  const TransverseMetric& transverse() const { return transverse_; }
  /// |g|^{1/2} = c^{n/2} |g0|^{1/2}.
  std::span<const double> density() const { return *density_; }
  const std::shared_ptr<const std::vector<double>>& shared_density() const { return density_; }
  /// g^{ab} at a node.
  double inverse(std::size_t node, int a, int b) const;
  /// c == 1 identically.
  bool is_product() const { return product_; }
  bool is_flat() const { return product_ && transverse_.is_flat(); }
  /// Declared bandwidth of the sampled coefficients; -1 when not a trig polynomial.
  int bandwidth() const;
  /// The product metric c^{-1} g.
  FullMetric product_part() const;

 private:
  TorusGrid grid_;
  ScalarField conformal_;
  TransverseMetric transverse_;
  std::vector<double> c_;
  std::shared_ptr<const std::vector<double>> density_;
  bool product_ = true;
};

/// Fourier-Galerkin representation of H(theta) on e^{i m.x}, m in a box
/// of half widths W_a centred at -round(Re theta): shifting theta by an
/// integer vector permutes the basis.
struct FloquetMatrix {
  std::vector<std::vector<int>> modes;
  Eigen::MatrixXcd form;  // h(theta)[e_b, e_a]
  Eigen::MatrixXcd mass;  // <e_b, e_a>
  Eigen::MatrixXcd op;    // L^{-1} form L^{-*}, mass = L L^*

  /// Eigenvalues sorted by real part, then imaginary part.
  Eigen::VectorXcd eigenvalues() const;
  /// Ascending eigenvalues of the Hermitian part (real theta, real q).
  Eigen::VectorXd hermitian_eigenvalues() const;
};

FloquetMatrix build_floquet_matrix(const FullMetric& metric, const Potential& q,
                                   std::span<const cplx> theta, std::span<const int> half_width);

/// h(theta)[u, v] by spectral differentiation and trapezoidal quadrature.
cplx evaluate_form(const GridFunction& u, const GridFunction& v, const FullMetric& metric,
                   std::span<const double> q, std::span<const cplx> theta);

/// Metric H^1 norm squared, int g^{jk} d_k u conj(d_j u) + |u|^2 with |g|^{1/2}.
double h1_norm_squared(const GridFunction& u, const FullMetric& metric);

struct CoercivityResult {
  double c0 = 0.0;
  double c1 = 0.0;
  int samples = 0;
  double worst_margin = 0.0;  // min over samples of Re h - c0 |u|_{H1}^2 + C1 |u|^2, scaled by |u|^2
};

/// Empirical (c0, C1) with Re h(theta)[u,u] >= c0 |u|_{H1}^2 - C1 |u|^2 on
/// random trig polynomials u. c0 is 1 for theta = 0 and 1/2 otherwise (the
/// first-order cross terms are absorbed at half strength); C1 is the
/// smallest multiple of 2^{-10} covering all samples.
CoercivityResult coercivity_scan(const FullMetric& metric, std::span<const double> q,
                                 std::span<const cplx> theta, int samples, std::uint64_t seed);

/// Laplace-Beltrami operator Delta_g f = |g|^{-1/2} d_j(|g|^{1/2} g^{jk} d_k f).
std::vector<cplx> laplace_beltrami(const FullMetric& metric, std::span<const cplx> f);

/// q_c = c q + c^{(n+2)/4} (-Delta_g)(c^{-(n-2)/4}).
std::vector<double> conformal_potential(const FullMetric& metric, std::span<const double> q);

/// || c^{(n+2)/4}(-Delta_g + q)(c^{-(n-2)/4} u) - (-Delta_{c^{-1} g} + q_c) u ||_2 / ||u||_2.
double verify_conformal_identity(const FullMetric& metric, std::span<const double> q, const GridFunction& u);

/// H(theta_tau) for a product metric in the tensor basis: rows span the
/// padded range j_min - w .. j_max + w, columns the inner range, so that the
/// matrix acts exactly on inner data when q has x1 bandwidth <= w.
class TensorModeOperator {
 public:
  TensorModeOperator(ModeSpace inner, int padding, double tau, std::span<const double> q,
                     const TorusGrid& grid);

  const ModeSpace& inner() const { return inner_; }
  const ModeSpace& padded() const { return padded_; }
  double tau() const { return tau_; }
  int padding() const { return padding_; }
  /// q depends on x1 only: the coupling is the identity in k.
  bool x1_only() const { return x1_only_; }
  bool potential_free() const { return zero_q_; }

  Eigen::MatrixXcd matrix() const;
  /// Smallest singular value of matrix().
  double sigma_min() const;
  /// (H0(theta_tau) + q) u on the padded space.
  ModeCoefficients apply(const ModeCoefficients& u) const;

 private:
  cplx coupling(int delta, int k_row, int k_col) const;

  ModeSpace inner_;
  ModeSpace padded_;
  int padding_;
  double tau_;
  bool x1_only_ = true;
  bool zero_q_ = true;
  int max_delta_ = 0;
  // per delta (offset by max_delta_): K x K block, or its scalar when x1_only_
  std::vector<Eigen::MatrixXcd> blocks_;
  std::vector<cplx> scalars_;
};

}  // namespace bloch
