#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace bloch::oracle {

// Lattice oracle for S(tau) on flat T^3: every (j, k1, k2) with energy below
// (m_b + 1)^2 is visited, per-cluster suprema taken directly.
inline double lattice_series(double tau, int m_b) {
  const double top = static_cast<double>(m_b + 1) * (m_b + 1);
  std::vector<double> sup(static_cast<std::size_t>(m_b) + 1, 0.0);
  const double t2 = tau * tau;
  const int kmax = m_b + 1;
  for (int j = -kmax - 1; j <= kmax; ++j) {
    const double s = j + 0.5;
    const double s2 = s * s;
    if (s2 >= top) continue;
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
      const double e1 = s2 + static_cast<double>(k1) * k1;
      if (e1 >= top) continue;
      for (int k2 = -kmax; k2 <= kmax; ++k2) {
        const double e = e1 + static_cast<double>(k2) * k2;
        if (e >= top) continue;
        const int m = static_cast<int>(std::sqrt(e));
        const double v = 1.0 / ((e - t2) * (e - t2) + 4.0 * t2 * s2);
        if (v > sup[m]) sup[m] = v;
      }
    }
  }
  double total = 0.0;
  for (int m = 0; m <= m_b; ++m) total += (1.0 + m) * sup[m];
  return total;
}

// sum over m_b < m <= m_end of (1+m) / (dist(tau^2, [m^2, (m+1)^2))^2 + tau^2),
// then (1+m)/(m^2 - tau^2)^2 summed as an integral beyond m_end.
inline double lattice_tail(double tau, int m_b, int m_end) {
  const double t2 = tau * tau;
  double total = 0.0;
  for (int m = m_b + 1; m <= m_end; ++m) {
    const double lo = static_cast<double>(m) * m, hi = static_cast<double>(m + 1) * (m + 1);
    const double d = t2 < lo ? lo - t2 : (t2 > hi ? t2 - hi : 0.0);
    total += (1.0 + m) / (d * d + t2);
  }
  const double M = m_end;
  // int_M^inf (1+x)/(x^2 - tau^2)^2 dx <= (1/(2M^2) + 1/(3M^3)) / (1 - tau^2/M^2)^2
  const double shrink = 1.0 - t2 / (M * M);
  return total + (1.0 / (2.0 * M * M) + 1.0 / (3.0 * M * M * M)) / (shrink * shrink);
}

// min over |j| <= J, k in Z^2 of |(j + 1/2 + i tau)^2 + |k|^2| on flat T^3.
inline double flat_carleman_min(double tau, int J, int R) {
  double best = INFINITY;
  for (int j = -J; j <= J; ++j)
    for (int k1 = -R; k1 <= R; ++k1)
      for (int k2 = -R; k2 <= R; ++k2) {
        const std::complex<double> z(j + 0.5, tau);
        best = std::min(best, std::abs(z * z + static_cast<double>(k1 * k1 + k2 * k2)));
      }
  return best;
}

// Lowest `count` values of |m + theta|^2 over m in a cube of half width R.
inline std::vector<double> free_band_energies(const std::vector<double>& theta, int count, int R) {
  std::vector<double> e;
  const int n = static_cast<int>(theta.size());
  std::vector<int> m(n, -R);
  while (true) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += (m[a] + theta[a]) * (m[a] + theta[a]);
    e.push_back(s);
    int a = 0;
    while (a < n && ++m[a] > R) m[a++] = -R;
    if (a == n) break;
  }
  std::sort(e.begin(), e.end());
  e.resize(count);
  return e;
}

}  // namespace bloch::oracle
