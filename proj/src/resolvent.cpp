#include "bloch/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bloch {

cplx mu(int j, double lambda, double tau) {
  const double s = j + 0.5;
  return {s * s - tau * tau + lambda, 2.0 * tau * s};
}

cplx mu(int j, int k, double tau, const TransverseBasis& basis) {
  if (k < 0 || k >= basis.count()) throw std::out_of_range("mu: transverse index out of range");
  return mu(j, basis.eigenvalue(k), tau);
}

int cluster_of(double energy) {
  int m = static_cast<int>(std::floor(std::sqrt(std::max(0.0, energy))));
  while (static_cast<double>(m) * m > energy) --m;
  while (static_cast<double>(m + 1) * (m + 1) <= energy) ++m;
  return m;
}

std::vector<std::pair<int, int>> cluster_members(const ModeSpace& space, int m) {
  std::vector<std::pair<int, int>> out;
  for (int j = space.j_min(); j <= space.j_max(); ++j)
    for (int k = 0; k < space.k_count(); ++k)
      if (cluster_of(space.energy(j, k)) == m) out.emplace_back(j, k);
  return out;
}

ModeCoefficients project_mode(const ModeCoefficients& f, int j, int k) {
  if (!f.space().contains(j) || k < 0 || k >= f.space().k_count())
    throw std::out_of_range("project_mode: (j, k) outside the truncation");
  ModeCoefficients out(f.space());
  out(j, k) = f(j, k);
  return out;
}

ModeCoefficients cluster_project(const ModeCoefficients& f, int m) {
  if (m < 0) throw std::invalid_argument("cluster_project: m must be >= 0");
  const auto& sp = f.space();
  ModeCoefficients out(sp);
  for (std::size_t i = 0; i < sp.size(); ++i)
    if (cluster_of(sp.energy(sp.j_of(i), sp.k_of(i))) == m) out.mutable_values()[i] = f.values()[i];
  return out;
}

namespace {

template <class F>
ModeCoefficients diagonal(const ModeCoefficients& f, F&& factor) {
  const auto& sp = f.space();
  ModeCoefficients out(sp);
  for (std::size_t i = 0; i < sp.size(); ++i)
    out.mutable_values()[i] = factor(sp.j_of(i), sp.k_of(i)) * f.values()[i];
  return out;
}

}  // namespace

ModeCoefficients apply_G_tau(const ModeCoefficients& f, double tau, bool allow_small_tau) {
  if (std::abs(tau) < 1.0 && !allow_small_tau)
    throw std::domain_error("apply_G_tau: |tau| < 1 is outside the proved regime (override required)");
  const auto& basis = f.space().basis();
  return diagonal(f, [&](int j, int k) {
    const cplx m = mu(j, k, tau, basis);
    if (m == cplx{}) throw std::domain_error("apply_G_tau: mu vanishes");
    return 1.0 / m;
  });
}

ModeCoefficients apply_H0(const ModeCoefficients& f, double tau) {
  const auto& basis = f.space().basis();
  return diagonal(f, [&](int j, int k) { return mu(j, k, tau, basis); });
}

ModeCoefficients reference_resolvent(const ModeCoefficients& f, cplx zeta) {
  const auto& sp = f.space();
  return diagonal(f, [&](int j, int k) {
    const cplx d = sp.energy(j, k) - zeta;
    if (std::abs(d) < 1e-10) {
      std::ostringstream msg;
      msg << "reference_resolvent: zeta = " << zeta << " is within 1e-10 of the eigenvalue of mode (" << j
          << ", " << k << ")";
      throw std::domain_error(msg.str());
    }
    return 1.0 / d;
  });
}

ModeCoefficients apply_H0_real_shift(const ModeCoefficients& f, cplx zeta) {
  const auto& sp = f.space();
  return diagonal(f, [&](int j, int k) { return sp.energy(j, k) - zeta; });
}

// ---------------------------------------------------------------------------

TransverseSpectrum TransverseSpectrum::flat(int dim, long long cut) {
  TransverseSpectrum s;
  for (const auto& [v, mult] : flat_spectrum(dim, cut)) s.values.push_back(static_cast<double>(v));
  s.complete_below = static_cast<double>(cut) + 1.0;
  return s;
}

TransverseSpectrum TransverseSpectrum::of(const TransverseBasis& basis) {
  TransverseSpectrum s;
  std::vector<double> v(basis.eigenvalues().begin(), basis.eigenvalues().end());
  std::sort(v.begin(), v.end());
  for (double x : v)
    if (s.values.empty() || x - s.values.back() > 1e-12 * (1.0 + std::abs(x))) s.values.push_back(x);
  s.complete_below = basis.missing_lower_bound();
  return s;
}

namespace {

// Smallest |s| = t + 1/2 with s^2 + lambda >= m^2; returns false when that
// energy already leaves [m^2, (m+1)^2).
bool lowest_member(int m, double lambda, double& s) {
  const double m2 = static_cast<double>(m) * m;
  const double need = m2 - lambda;
  long long t = 0;
  if (need > 0.25) {
    t = static_cast<long long>(std::ceil(std::sqrt(need) - 0.5));
    while ((t + 0.5) * (t + 0.5) < need) ++t;
    while (t > 0 && (t - 0.5) * (t - 0.5) >= need) --t;
  }
  s = t + 0.5;
  return s * s + lambda < static_cast<double>(m + 1) * (m + 1);
}

double interval_distance(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

// sum_{m > M} (1+m)/(m^2 - tau^2)^2 for M >= 4|tau|, using m^2 - tau^2 >= 15 m^2 / 16
double quartic_tail(int m_max) {
  const double mm = m_max;
  return (256.0 / 225.0) * (1.0 / (2.0 * mm * mm) + 1.0 / (3.0 * mm * mm * mm));
}

}  // namespace

SeriesReport series_S(double tau, const TransverseSpectrum& spectrum, int m_max, int m_exact) {
  const double at = std::abs(tau);
  if (at < 1.0) throw std::domain_error("series_S: |tau| >= 1 required");
  if (m_max < 4.0 * at)
    throw std::invalid_argument("series_S: m_max must be at least 4|tau|");
  if (spectrum.values.empty()) throw std::invalid_argument("series_S: empty spectrum");
  const double lam_done = spectrum.complete_below;
  if (m_exact < 0) {
    m_exact = 0;
    while (m_exact + 1 <= m_max && static_cast<double>(m_exact + 2) * (m_exact + 2) <= lam_done + 0.25)
      ++m_exact;
  }
  m_exact = std::min(m_exact, m_max);

  SeriesReport rep;
  rep.tau = tau;
  rep.m_max = m_max;
  rep.m_exact = m_exact;
  rep.terms.reserve(static_cast<std::size_t>(m_max) + 1);
  const double t2 = tau * tau;
  double gap = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    const double w = 1.0 + m;
    const double lo_e = static_cast<double>(m) * m, hi_e = static_cast<double>(m + 1) * (m + 1);
    ClusterTerm term;
    term.m = m;
    const double d = interval_distance(t2, lo_e, hi_e);
    term.majorant = w / (d * d + t2);
    term.quartic = 4.0 * w / ((lo_e - t2) * (lo_e - t2) + t2);

    double best = 0.0;
    auto visit = [&](double lambda) {
      double s = 0.0;
      if (!lowest_member(m, lambda, s)) return;
      const double e = s * s + lambda;
      const double mod2 = (e - t2) * (e - t2) + 4.0 * t2 * s * s;
      best = std::max(best, 1.0 / mod2);
    };
    if (m <= m_exact) {
      for (double lambda : spectrum.values) {
        if (lambda + 0.25 >= hi_e) break;
        visit(lambda);
      }
      term.lower = w * best;
      const double unknown_lo = std::max(lo_e, lam_done + 0.25);
      double upper = term.lower;
      if (unknown_lo < hi_e) {
        const double du = interval_distance(t2, unknown_lo, hi_e);
        upper = std::max(upper, w / (du * du + t2));
      }
      term.upper = upper;
    } else {
      visit(spectrum.values.front());
      term.lower = w * best;
      term.upper = term.majorant;
    }
    rep.truncated_sum += term.lower;
    gap += term.upper - term.lower;
    if (term.upper > term.majorant * (1.0 + 1e-12)) rep.majorant_holds = false;
    rep.max_quartic_ratio = std::max(rep.max_quartic_ratio, term.lower / term.quartic);
    rep.terms.push_back(term);
  }
  rep.tail_bound = gap + quartic_tail(m_max);
  return rep;
}

double im_sqrt_shift(double tau, double rho) {
  const double re = tau * tau;
  const double im = -rho * tau;
  const double modulus = std::hypot(re, im);
  // |zeta| - Re zeta without cancellation for Re zeta > 0
  const double diff = re > 0.0 ? im * im / (modulus + re) : modulus - re;
  return std::sqrt(0.5 * diff);
}

cplx correction_coefficient(int j, double lambda, double tau, int nu) {
  if (nu < 1) throw std::invalid_argument("correction_coefficient: nu must be >= 1");
  if (!FrequencyBlock{nu}.contains(j)) return {};
  const double p = std::ldexp(1.0, nu);
  const double s = j + 0.5;
  const cplx denom = mu(j, lambda, tau) * cplx(s * s - tau * tau + lambda, (p + 1.0) * tau);
  return cplx(0.0, tau * (2.0 * j - p)) / denom;
}

std::vector<cplx> correction_coefficients(double tau, int nu, const ModeSpace& space) {
  if (std::abs(tau) < 1.0) throw std::domain_error("correction_coefficients: |tau| >= 1 required");
  std::vector<cplx> a(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    a[i] = correction_coefficient(space.j_of(i), space.lambda(space.k_of(i)), tau, nu);
  return a;
}

CorrectionReport correction_weighted_sum(double tau, int nu, const TransverseSpectrum& spectrum, int m_max) {
  const double at = std::abs(tau);
  if (at < 1.0) throw std::domain_error("correction_weighted_sum: |tau| >= 1 required");
  if (nu < 1) throw std::invalid_argument("correction_weighted_sum: nu must be >= 1");
  if (m_max < 4.0 * at) throw std::invalid_argument("correction_weighted_sum: m_max must be at least 4|tau|");
  const double top = static_cast<double>(m_max + 1) * (m_max + 1);
  if (spectrum.complete_below < top)
    throw std::invalid_argument("correction_weighted_sum: spectrum incomplete below (m_max+1)^2");
  std::vector<double> sup(static_cast<std::size_t>(m_max) + 1, 0.0);
  const int lo = 1 << (nu - 1), hi = (1 << nu) - 1;
  for (int sign : {1, -1})
    for (int aj = lo; aj <= hi; ++aj) {
      const int j = sign * aj;
      const double s2 = (j + 0.5) * (j + 0.5);
      for (double lambda : spectrum.values) {
        const double e = s2 + lambda;
        if (e >= top) break;
        const int m = cluster_of(e);
        sup[m] = std::max(sup[m], std::abs(correction_coefficient(j, lambda, tau, nu)));
      }
    }
  CorrectionReport rep;
  rep.tau = tau;
  rep.nu = nu;
  for (int m = 0; m <= m_max; ++m) rep.weighted_sum += (1.0 + m) * sup[m];
  rep.tail_bound = 3.0 * at * std::ldexp(1.0, nu) * quartic_tail(m_max);
  return rep;
}

}  // namespace bloch
