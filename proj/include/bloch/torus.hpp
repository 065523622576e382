#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bloch/fft.hpp"

namespace bloch {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform tensor grid on T^dim = R^dim / 2*pi Z^dim with N nodes per axis.
/// Nodes are laid out row-major with axis 0 (the x1 direction) slowest.
class TorusGrid {
 public:
  TorusGrid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  /// Trapezoidal weight per node, (2*pi/N)^dim.
  double cell_weight() const;
  double volume() const;
  std::vector<int> shape() const { return std::vector<int>(dim_, n_); }

  std::vector<int> multi_index(std::size_t node) const;
  std::size_t node(std::span<const int> index) const;
  double coordinate(std::size_t node, int axis) const;
  std::vector<double> point(std::size_t node) const;

  /// Grid on the transverse torus T^{dim-1} with the same N.
  TorusGrid transverse() const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

/// A sampled complex field together with the Riemannian density |g|^{1/2}
/// at every node. All norms and inner products use that density.
class GridFunction {
 public:
  /// Flat density (|g|^{1/2} = 1).
  GridFunction(TorusGrid grid, std::vector<cplx> values);
  GridFunction(TorusGrid grid, std::vector<cplx> values,
               std::shared_ptr<const std::vector<double>> weight);

  static GridFunction zeros(TorusGrid grid, std::shared_ptr<const std::vector<double>> weight);
  static std::shared_ptr<const std::vector<double>> flat_weight(const TorusGrid& grid);

  const TorusGrid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::vector<cplx>& mutable_values() { return values_; }
  std::span<const double> weight() const { return *weight_; }
  const std::shared_ptr<const std::vector<double>>& shared_weight() const { return weight_; }

  /// Same grid and density, new samples.
  GridFunction with_values(std::vector<cplx> values) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(cplx s);

 private:
  TorusGrid grid_;
  std::vector<cplx> values_;
  std::shared_ptr<const std::vector<double>> weight_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx s, GridFunction a);

/// Weighted discrete L^p norm, (sum |f|^p |g|^{1/2} h^dim)^{1/p}.
/// Throws std::domain_error naming the first non-finite node.
double lebesgue_norm(const GridFunction& f, double p);
double sup_norm(const GridFunction& f);
/// <f, g> = sum f conj(g) |g|^{1/2} h^dim.
cplx inner_product(const GridFunction& f, const GridFunction& g);

/// Dyadic block of x1 frequencies: {0} for nu = 0, {2^{nu-1} <= |j| < 2^nu} otherwise.
struct FrequencyBlock {
  int nu = 0;

  bool contains(int j) const;
  static FrequencyBlock of(int j);
  int lowest() const { return nu == 0 ? 0 : 1 << (nu - 1); }
  int highest() const { return nu == 0 ? 0 : (1 << nu) - 1; }
};

/// Littlewood-Paley localization in x1: the pieces f~_nu, nu = 0..nu_max,
/// where nu_max covers the grid Nyquist frequency. Sum of pieces is f.
std::vector<std::pair<FrequencyBlock, GridFunction>> lp_decompose(const GridFunction& f);

/// Keep only the x1 frequencies of one block.
GridFunction lp_block(const GridFunction& f, const FrequencyBlock& block);

/// x1 Fourier coefficients f_j(x') = (1/2pi) int f(y1, x') e^{-i j y1} dy1
/// for |j| <= N/2 - 1, as fields on the transverse torus. Requires the
/// density to be independent of x1.
std::map<int, GridFunction> x1_fourier_modes(const GridFunction& f);

/// Inverse of x1_fourier_modes on the full grid.
GridFunction assemble_x1_modes(const std::map<int, GridFunction>& modes, const TorusGrid& grid,
                               std::shared_ptr<const std::vector<double>> weight);

/// True when the density does not vary along x1 (within rel_tol).
bool weight_independent_of_x1(const GridFunction& f, double rel_tol = 1e-14);

}  // namespace bloch
