#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "bloch/resolvent.hpp"
#include "../oracles.hpp"
#include "doctest.h"

using namespace bloch;
using namespace bloch::oracle;

namespace {

std::shared_ptr<const TransverseBasis> flat_basis(int n, int count) {
  return std::make_shared<const TransverseBasis>(TransverseBasis::plane_waves(TorusGrid(2, n), count));
}

ModeCoefficients random_coefficients(const ModeSpace& sp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ModeCoefficients f(sp);
  for (auto& c : f.mutable_values()) c = cplx(nd(rng), nd(rng));
  return f;
}

}  // namespace

TEST_CASE("mode space transfer round trip and Parseval") {
  const TorusGrid grid(3, 16);
  const auto basis = flat_basis(16, 20);
  const auto sp = ModeSpace::symmetric(5, basis);
  const auto f = random_coefficients(sp, 3);
  const GridFunction u = synthesize(f, grid);
  CHECK(lebesgue_norm(u, 2.0) == doctest::Approx(f.norm()).epsilon(1e-12));
  const auto back = analyze(u, sp);
  double err = 0.0;
  for (std::size_t i = 0; i < sp.size(); ++i) err = std::max(err, std::abs(back.values()[i] - f.values()[i]));
  CHECK(err < 1e-12);
  CHECK_THROWS_AS(analyze(u, ModeSpace::symmetric(8, basis)), std::invalid_argument);
}

TEST_CASE("G_tau on the ground mode at tau = 1") {
  const auto sp = ModeSpace::symmetric(3, flat_basis(8, 5));
  const auto f = ModeCoefficients::unit(sp, 0, 0);
  const auto g = apply_G_tau(f, 1.0);
  CHECK(std::abs(g(0, 0) - cplx(-0.48, -0.64)) < 1e-15);
  CHECK(std::abs(mu(0, 1.0, 1.0) - cplx(0.25, 1.0)) < 1e-15);
  CHECK_THROWS_AS(apply_G_tau(f, 0.5), std::domain_error);
  CHECK_NOTHROW(apply_G_tau(f, 0.5, true));
}

TEST_CASE("G_tau is bounded by 1/|tau| and inverts H0") {
  const auto sp = ModeSpace::symmetric(12, flat_basis(16, 40));
  const auto f = random_coefficients(sp, 11);
  for (double tau : {1.0, -1.5, 2.0, 5.0, 37.0}) {
    const auto g = apply_G_tau(f, tau);
    CHECK(g.norm() <= f.norm() / std::abs(tau) * (1.0 + 1e-14));
    const auto back = apply_H0(g, tau);
    CHECK((back - f).norm() < 1e-12 * f.norm());
  }
}

TEST_CASE("reference resolvent norms") {
  const auto sp = ModeSpace::symmetric(6, flat_basis(8, 13));
  const auto ground = ModeCoefficients::unit(sp, -1, 0);
  CHECK(reference_resolvent(ground, -1.0).norm() == doctest::Approx(0.8 * ground.norm()).epsilon(1e-14));
  const auto f = random_coefficients(sp, 5);
  CHECK(reference_resolvent(f, -1.0).norm() <= 0.8 * f.norm() * (1.0 + 1e-14));
  CHECK(reference_resolvent(f, cplx(3.0, 5.0)).norm() <= 0.2 * f.norm() * (1.0 + 1e-14));
  const auto back = apply_H0_real_shift(reference_resolvent(f, cplx(3.0, 5.0)), cplx(3.0, 5.0));
  CHECK((back - f).norm() < 1e-12 * f.norm());
  CHECK_THROWS_AS(reference_resolvent(f, 0.25), std::domain_error);
}

TEST_CASE("cluster projectors") {
  const auto sp = ModeSpace::symmetric(6, flat_basis(16, 60));
  CHECK(cluster_members(sp, 0).size() == 2);
  const auto f = random_coefficients(sp, 9);
  ModeCoefficients sum(sp);
  for (int m = 0; m <= 12; ++m) {
    const auto p = cluster_project(f, m);
    CHECK((cluster_project(p, m) - p).norm() == 0.0);
    sum += p;
  }
  CHECK((sum - f).norm() < 1e-14);
  CHECK(cluster_of(0.9999999) == 0);
  CHECK(cluster_of(1.0) == 1);
  CHECK(cluster_of(15.99) == 3);
  CHECK(project_mode(f, 2, 3).norm() == doctest::Approx(std::sqrt(kTwoPi) * std::abs(f(2, 3))));
}

TEST_CASE("correction coefficients match the resolvent difference") {
  const auto sp = ModeSpace::symmetric(40, flat_basis(16, 30));
  for (double tau : {4.0, 16.0, 64.0})
    for (int nu = 1; nu <= 5; ++nu) {
      const auto f = random_coefficients(sp, 100 + nu);
      ModeCoefficients block(sp);
      for (std::size_t i = 0; i < sp.size(); ++i)
        if (FrequencyBlock{nu}.contains(sp.j_of(i))) block.mutable_values()[i] = f.values()[i];
      const cplx zeta(tau * tau, -(std::ldexp(1.0, nu) + 1.0) * tau);
      const auto lhs = reference_resolvent(block, zeta) - apply_G_tau(block, tau);
      const auto a = correction_coefficients(tau, nu, sp);
      ModeCoefficients rhs(sp);
      for (std::size_t i = 0; i < sp.size(); ++i) rhs.mutable_values()[i] = a[i] * block.values()[i];
      CHECK((lhs - rhs).norm() <= 1e-10 * lhs.norm());
      for (std::size_t i = 0; i < sp.size(); ++i)
        if (!FrequencyBlock{nu}.contains(sp.j_of(i))) CHECK(a[i] == cplx{});
    }
}

TEST_CASE("Im sqrt zeta") {
  CHECK(std::abs(im_sqrt_shift(100.0, 1.0) - 0.4999937) < 1e-6);
  CHECK(std::abs(im_sqrt_shift(100.0, 2.0) - 1.0) < 1e-3);
  for (double tau : {100.0, 12.0, -37.0}) {
    const double direct = std::abs(std::sqrt(cplx(tau * tau, -tau)).imag());
    CHECK(im_sqrt_shift(tau, 1.0) == doctest::Approx(direct).epsilon(1e-13));
  }
  double lowest = 1.0;
  for (double tau = 10.0; tau <= 1e4; tau *= 1.37)
    for (double rho = 1.0; rho <= 1048576.0; rho *= 2.0)
      for (double s : {1.0, -1.0}) lowest = std::min(lowest, im_sqrt_shift(s * tau, rho));
  CHECK(lowest >= 0.25);
}

TEST_CASE("S series against a lattice oracle at tau = 10") {
  const double tau = 10.0;
  const int m_b = 240;
  const double oracle = lattice_series(tau, m_b);
  const auto spectrum = TransverseSpectrum::flat(2, static_cast<long long>(m_b + 1) * (m_b + 1));
  const auto exact = series_S(tau, spectrum, m_b, m_b);
  CHECK(exact.truncated_sum == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(exact.majorant_holds);

  const int m_far = 100000;
  const double oracle_hi = oracle + lattice_tail(tau, m_b, m_far);
  const auto rep = series_S(tau, spectrum, m_far);
  CHECK(rep.m_exact == m_b);
  CHECK(rep.truncated_sum <= oracle_hi);
  CHECK(oracle <= rep.truncated_sum + rep.tail_bound);
  CHECK(rep.tail_bound < 0.05 * rep.truncated_sum);
}

TEST_CASE("S series rejects short truncations") {
  const auto spectrum = TransverseSpectrum::flat(2, 400);
  CHECK_THROWS_AS(series_S(10.0, spectrum, 39), std::invalid_argument);
  CHECK_THROWS_AS(series_S(0.5, spectrum, 39), std::domain_error);
}

TEST_CASE("quartic cluster bound fails where tau^2 sits inside a cluster") {
  // tau^2 = 120.9 lies in [100, 121); the flat eigenvalue 117 = 9^2 + 6^2
  // with j = 0 gives energy 117.25 in cluster 10.
  const double tau = std::sqrt(120.9);
  const auto spectrum = TransverseSpectrum::flat(2, 40000);
  const auto rep = series_S(tau, spectrum, 60);
  const auto& t = rep.terms[10];
  CHECK(t.lower > t.quartic);
  CHECK(t.lower == doctest::Approx(11.0 / (3.65 * 3.65 + 120.9)).epsilon(1e-12));
  CHECK(rep.majorant_holds);
  CHECK(rep.max_quartic_ratio > 1.0);
}

TEST_CASE("correction weighted sums stay bounded") {
  double lo = 1e300, hi = 0.0;
  for (double tau : {4.0, 16.0}) {
    const int m_max = static_cast<int>(8 * tau);
    const auto spectrum = TransverseSpectrum::flat(2, static_cast<long long>(m_max + 2) * (m_max + 2));
    for (int nu = 1; nu <= 4; ++nu) {
      const auto rep = correction_weighted_sum(tau, nu, spectrum, m_max);
      CHECK(std::isfinite(rep.weighted_sum));
      lo = std::min(lo, rep.weighted_sum);
      hi = std::max(hi, rep.weighted_sum + rep.tail_bound);
    }
  }
  CHECK(hi > 0.0);
  const auto short_spec = TransverseSpectrum::flat(2, 100);
  CHECK_THROWS_AS(correction_weighted_sum(4.0, 1, short_spec, 32), std::invalid_argument);
}
