#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bloch/fields.hpp"
#include "bloch/lp_norm.hpp"
#include "bloch/modes.hpp"

namespace bloch {

struct EstimateReport {
  std::string name;
  std::vector<std::pair<std::string, double>> parameters;
  double measured_constant = 0.0;
  std::optional<double> bound_claimed;  // empty: boundedness only
  bool pass = false;
  std::string note;
  std::string truncation_note;
};

/// Exponents 2n/(n+2) and its conjugate 2n/(n-2).
double sobolev_lower_exponent(int n);
double sobolev_upper_exponent(int n);

struct CarlemanWitness {
  double tau = 0.0;
  double min_modulus = 0.0;  // over the truncation |j| <= J, k < K
  int j = 0;
  int k = 0;
  double lambda = 0.0;
  double tail_lower = 0.0;   // lower bound for |mu| on every mode outside the truncation
  bool holds = false;        // min(min_modulus, tail_lower) >= |tau|
};

/// min |mu_{j,k}(tau)| over |j| <= J and the basis, with the witness mode.
/// Outside the truncation |mu| >= max(2|tau||s|, s^2 + lambda - tau^2) gives
/// tail_lower from J and the basis's missing-eigenvalue bound.
CarlemanWitness carleman_min_modulus(double tau, const TransverseBasis& basis, int J);

/// Builds the transverse basis for a given transverse grid.
using BasisFactory = std::function<std::shared_ptr<const TransverseBasis>(const TorusGrid&)>;
BasisFactory flat_basis_factory();
/// Separable metric: tensor products of 1-D bases, every mode the grid resolves.
BasisFactory separable_basis_factory(TransverseMetric metric);

struct ClusterMeasurement {
  int m = 0;
  int grid_n = 0;
  int members = 0;
  double forward = 0.0;  // ||chi_m||_{p -> 2}, p = 2n/(n+2)
  double dual = 0.0;     // ||chi_m||_{2 -> p'}
  double constant() const { return forward / std::sqrt(1.0 + m); }
  double dual_constant() const { return dual / std::sqrt(1.0 + m); }
  double gap() const { return std::abs(forward - dual) / std::max(forward, dual); }
};

/// Even grid size resolving every member of chi_m with margin.
int cluster_grid_points(int m);
ClusterMeasurement cluster_constant(int m, int dim, const BasisFactory& basis, const LpOptions& options);

struct ResolventLpPoint {
  double tau = 0.0;
  int grid_n = 0;
  std::size_t modes = 0;
  double g_to2 = 0.0;  // ||G_tau||_{p -> 2}
  double g_to6 = 0.0;  // ||G_tau||_{p -> p'}
  double r_to6 = 0.0;  // ||R(tau^2 - i tau)||_{p -> p'}
  double g_2to2 = 0.0; // 1 / min |mu|
  double scaled_to2() const { return g_to2 * std::sqrt(std::abs(tau)); }
};

/// Grid size for the tau sweep: resolves the sphere |xi| ~ |tau| with margin.
int resolvent_grid_points(double tau);
ResolventLpPoint resolvent_lp_point(double tau, int dim, const BasisFactory& basis, const LpOptions& options);
/// Per-tau reports plus one variation report per quantity; verdicts from
/// max/min across the sweep against `factor`.
std::vector<EstimateReport> resolvent_lp_bounds(const std::vector<ResolventLpPoint>& points, double factor);

/// max/min of positive values (infinity when any is zero).
double variation(const std::vector<double>& values);

struct PotentialSplit {
  std::vector<double> sharp;
  std::vector<double> remainder;
  double epsilon = 0.0;
  double cutoff = 0.0;          // M
  double remainder_norm = 0.0;  // L^{n/2}
  double exponent = 0.0;        // n/2
};

/// q_sharp = q 1_{|q| <= M}, M the least sample magnitude (or 0) with
/// ||q - q_sharp||_{n/2} <= epsilon; the norm uses `weight` as density.
PotentialSplit split_potential(const TorusGrid& grid, std::span<const double> q, double epsilon,
                               std::span<const double> weight = {});

/// sigma_min of H(theta_tau) on a padded tensor truncation against |tau| - sup|q|.
EstimateReport injectivity_bounded(double tau, const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis,
                                   int J, int padding, std::span<const double> q, double q_sup);

struct InjectivityResult {
  double ratio = 0.0;     // min over candidates of ||(H0 + q) u||_p / ||u||_{p'}
  double c0 = 0.0;        // measured ||G_tau||_{p -> p'}
  PotentialSplit split;
  int candidates = 0;
  bool admissible = false;  // |tau| >= 2 M
};

/// Singular potential: split at epsilon = 1/(4 C0) and minimize the ratio over
/// candidates u = G_tau f refined by gradient descent.
InjectivityResult injectivity_singular(double tau, const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis,
                                       std::span<const double> q, int candidates, int descent_steps,
                                       const LpOptions& options);

}  // namespace bloch
