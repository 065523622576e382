#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bloch/floquet.hpp"

namespace bloch {

/// Samples on the supercell [0, 2 pi P)^n with N nodes per cell axis, so
/// (P N)^n values, row-major with axis 0 slowest. Viewed as one period of a
/// compactly supported function on R^n.
class SupercellFunction {
 public:
  SupercellFunction(int cells, TorusGrid cell, std::vector<cplx> values);
  static SupercellFunction zeros(int cells, TorusGrid cell);

  int cells() const { return cells_; }
  const TorusGrid& cell_grid() const { return cell_; }
  int points_per_axis() const { return cells_ * cell_.points_per_axis(); }
  std::vector<int> shape() const { return std::vector<int>(cell_.dim(), points_per_axis()); }
  std::span<const cplx> values() const { return values_; }
  std::vector<cplx>& mutable_values() { return values_; }

  /// Node at cell offset k (0 <= k_a < P) and cell node i.
  std::size_t node(std::span<const int> k, std::span<const int> i) const;
  /// Flat L^2 norm squared over the supercell.
  double norm_squared() const;

 private:
  int cells_;
  TorusGrid cell_;
  std::vector<cplx> values_;
};

/// Gaussian samples; with `resolved` every supercell frequency s/P with
/// |s_a| > P (N/2 - 1) is removed so spectral derivatives are exact on the
/// supercell and on every fiber.
SupercellFunction random_supercell(int cells, const TorusGrid& cell, std::uint64_t seed, bool resolved);

struct BlochFiber {
  std::vector<int> label;  // theta = label / P
  std::vector<cplx> values;
};

/// Fibers v(theta, .) on the cell torus for theta on the dual lattice {l / P}.
/// A class l mod P may carry several representatives; they must satisfy
/// v(theta + e_a, x) = e^{-i x_a} v(theta, x).
struct BlochField {
  int cells = 1;
  TorusGrid cell{1, 2};
  std::vector<BlochFiber> fibers;

  std::vector<double> theta(const BlochFiber& f) const;
  /// Flat L^2 norm squared averaged over the P^n classes (first representative).
  double norm_squared() const;
};

/// (Uu)(theta, x) = e^{-i x.theta} sum_k e^{-2 pi i k.theta} u(x + 2 pi k),
/// one fiber per l in {0..P-1}^n.
BlochField gelfand_forward(const SupercellFunction& u);

/// Largest relative mismatch between representatives of one class; 0 when
/// every class has a single representative. Throws std::invalid_argument when
/// a class is missing or a fiber has the wrong size.
double quasiperiodicity_violation(const BlochField& v);

/// (U* v)(x + 2 pi k) = P^{-n} sum_theta e^{i (x + 2 pi k).theta} v(theta, x).
/// Throws std::invalid_argument reporting the violation when it exceeds `tolerance`.
SupercellFunction gelfand_inverse(const BlochField& v, double tolerance = 1e-10);

/// v(theta + e_axis, .) computed from v(theta, .).
BlochFiber shifted_representative(const BlochField& v, const BlochFiber& fiber, int axis);

/// max_theta sup |D_a (Uu) - U(D_a u) + theta_a Uu| / sup |U(D_a u)| with D = -i d.
double derivative_commutation_residual(const SupercellFunction& u, int axis);

struct DirectIntegralCheck {
  cplx supercell_form;  // h[u, u] on the supercell, coefficients repeated per cell
  cplx fiber_average;   // P^{-n} sum_theta h(theta)[(Uu)(theta), (Uu)(theta)]
  double residual = 0.0;
};

/// `metric` and `q` live on the cell grid of `u`.
DirectIntegralCheck direct_integral_check(const SupercellFunction& u, const FullMetric& metric,
                                          std::span<const double> q);

struct BandRow {
  std::vector<double> theta;
  std::vector<cplx> values;  // ascending
};

/// Lowest `bands` eigenvalues of build_floquet_matrix(theta) along the path.
std::vector<BandRow> band_structure(const FullMetric& metric, const Potential& q,
                                    const std::vector<std::vector<double>>& path, int bands,
                                    std::span<const int> half_width, int threads = 1);

struct ThomasRow {
  double tau = 0.0;
  double sigma_min = 0.0;
  int truncation_j = 0;
  int truncation_k = 0;
  bool inconclusive = false;  // sigma_min below the zero tolerance
};

struct ThomasScan {
  std::vector<ThomasRow> rows;
  /// Smallest scanned tau from which sigma_min stays above the tolerance and
  /// does not decrease.
  std::optional<double> onset;
};

/// sigma_min of the padded tensor truncation of H(theta_tau) per tau (ascending).
ThomasScan thomas_scan(const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis,
                       std::span<const double> q, std::span<const double> taus, int J, int padding,
                       double zero_tolerance = 1e-9, int threads = 1);

}  // namespace bloch
