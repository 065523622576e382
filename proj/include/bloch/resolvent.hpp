#pragma once

#include <utility>
#include <vector>

#include "bloch/modes.hpp"

namespace bloch {

/// mu_{j,k}(tau) = (j+1/2)^2 + 2 i tau (j+1/2) - tau^2 + lambda_k.
cplx mu(int j, double lambda, double tau);
cplx mu(int j, int k, double tau, const TransverseBasis& basis);

/// Cluster label m = floor(sqrt(energy)).
int cluster_of(double energy);
/// Members (j, k) of chi_m inside the truncation.
std::vector<std::pair<int, int>> cluster_members(const ModeSpace& space, int m);

ModeCoefficients project_mode(const ModeCoefficients& f, int j, int k);
ModeCoefficients cluster_project(const ModeCoefficients& f, int m);

/// G_tau f = sum pi_{j,k} f / mu_{j,k}(tau). |tau| < 1 throws unless
/// allow_small_tau is set.
ModeCoefficients apply_G_tau(const ModeCoefficients& f, double tau, bool allow_small_tau = false);
/// H0(theta_tau) f = sum mu_{j,k}(tau) pi_{j,k} f.
ModeCoefficients apply_H0(const ModeCoefficients& f, double tau);
/// R(zeta) f = sum pi_{j,k} f / ((j+1/2)^2 + lambda_k - zeta); throws when
/// zeta is within 1e-10 of a truncated eigenvalue.
ModeCoefficients reference_resolvent(const ModeCoefficients& f, cplx zeta);
/// (H0(theta_0) - zeta) f.
ModeCoefficients apply_H0_real_shift(const ModeCoefficients& f, cplx zeta);

/// Distinct transverse eigenvalues, sorted, complete below `complete_below`
/// (every eigenvalue < complete_below is listed).
struct TransverseSpectrum {
  std::vector<double> values;
  double complete_below = 0.0;

  static TransverseSpectrum flat(int dim, long long cut);
  static TransverseSpectrum of(const TransverseBasis& basis);
};

struct ClusterTerm {
  int m = 0;
  double lower = 0.0;   // (1+m) sup over listed members
  double upper = 0.0;   // (1+m) bound including members beyond the list
  double majorant = 0.0;  // (1+m) / (dist(tau^2, [m^2, (m+1)^2))^2 + tau^2)
  double quartic = 0.0;   // 4 (1+m) / ((m^2 - tau^2)^2 + tau^2)
};

/// S(tau) = sum_m (1+m) sup_{chi_m} |mu|^{-2}; S lies in
/// [truncated_sum, truncated_sum + tail_bound].
struct SeriesReport {
  double tau = 0.0;
  int m_max = 0;
  int m_exact = 0;
  double truncated_sum = 0.0;
  double tail_bound = 0.0;
  bool majorant_holds = true;
  double max_quartic_ratio = 0.0;
  std::vector<ClusterTerm> terms;
};

/// Clusters m <= m_exact are enumerated over the listed eigenvalues; for
/// m_exact < m <= m_max only a single witness enters the lower sum.
/// Requires m_max >= 4|tau|, |tau| >= 1.
SeriesReport series_S(double tau, const TransverseSpectrum& spectrum, int m_max, int m_exact = -1);

/// |Im sqrt(zeta)| = sqrt((|zeta| - Re zeta)/2), zeta = tau^2 - i rho tau.
double im_sqrt_shift(double tau, double rho);

/// a_{j,k,nu}(tau) per mode of `space`, zero outside the dyadic block.
std::vector<cplx> correction_coefficients(double tau, int nu, const ModeSpace& space);
cplx correction_coefficient(int j, double lambda, double tau, int nu);

/// sum_m (1+m) sup_{chi_m, |j| in block nu} |a_{j,k,nu}(tau)| with an
/// analytic tail bound beyond m_max.
struct CorrectionReport {
  double tau = 0.0;
  int nu = 0;
  double weighted_sum = 0.0;
  double tail_bound = 0.0;
};
CorrectionReport correction_weighted_sum(double tau, int nu, const TransverseSpectrum& spectrum,
                                         int m_max);

}  // namespace bloch
