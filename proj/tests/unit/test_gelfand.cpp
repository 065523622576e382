#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bloch/estimates.hpp"
#include "bloch/gelfand.hpp"
#include "doctest.h"

using namespace bloch;

namespace {

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Lowest eigenvalues of the free fiber by direct enumeration of the lattice.
std::vector<double> free_band_oracle(const std::vector<double>& theta, int count) {
  const int R = 4;
  const int n = static_cast<int>(theta.size());
  std::vector<double> e;
  std::vector<int> m(n, -R);
  while (true) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += (m[a] + theta[a]) * (m[a] + theta[a]);
    e.push_back(s);
    int a = n - 1;
    while (a >= 0 && ++m[a] > R) m[a--] = -R;
    if (a < 0) break;
  }
  std::sort(e.begin(), e.end());
  e.resize(count);
  return e;
}


// Hill matrix (m + t)^2 on the diagonal, 3/2 beside it.
double hill_lowest(double t) {
  const int M = 30;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * M + 1, 2 * M + 1);
  for (int i = 0; i <= 2 * M; ++i) {
    a(i, i) = (i - M + t) * (i - M + t);
    if (i < 2 * M) a(i, i + 1) = a(i + 1, i) = 1.5;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST_CASE("one-cell support and integer plane waves") {
  const TorusGrid cell(2, 8);
  const int P = 3;
  auto u = SupercellFunction::zeros(P, cell);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const std::vector<int> k0{0, 0};
  for (std::size_t node = 0; node < cell.size(); ++node) {
    const auto i = cell.multi_index(node);
    u.mutable_values()[u.node(k0, i)] = cplx(nd(rng), nd(rng));
  }
  const auto v = gelfand_forward(u);
  REQUIRE(v.fibers.size() == 9);
  for (const auto& f : v.fibers) {
    const auto th = v.theta(f);
    double err = 0.0;
    for (std::size_t node = 0; node < cell.size(); ++node) {
      const double phase = cell.coordinate(node, 0) * th[0] + cell.coordinate(node, 1) * th[1];
      const cplx expect = std::polar(1.0, -phase) * u.values()[u.node(k0, cell.multi_index(node))];
      err = std::max(err, std::abs(f.values[node] - expect));
    }
    CHECK(err < 1e-13);
  }

  // e^{i m.x}, m integer: the k-sum is P^n at theta = 0 and a vanishing
  // geometric sum elsewhere.
  const std::vector<int> m{2, -1};
  auto w = SupercellFunction::zeros(P, cell);
  const double h = cell.spacing();
  const int side = w.points_per_axis();
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) w.mutable_values()[a * side + b] = std::polar(1.0, h * (m[0] * a + m[1] * b));
  const auto vw = gelfand_forward(w);
  for (const auto& f : vw.fibers) {
    const bool zero_class = f.label[0] == 0 && f.label[1] == 0;
    double err = 0.0;
    for (std::size_t node = 0; node < cell.size(); ++node) {
      const double phase = m[0] * cell.coordinate(node, 0) + m[1] * cell.coordinate(node, 1);
      const cplx expect = zero_class ? 9.0 * std::polar(1.0, phase) : cplx{};
      err = std::max(err, std::abs(f.values[node] - expect));
    }
    CHECK(err < 1e-12);
  }
}

TEST_CASE("isometry and round trip on random supercell functions") {
  const TorusGrid cell(3, 6);
  for (int s = 0; s < 50; ++s) {
    const int P = s % 2 == 0 ? 2 : 3;
    const auto u = random_supercell(P, cell, 100 + s, false);
    const auto v = gelfand_forward(u);
    const double nu = u.norm_squared();
    CHECK(std::abs(v.norm_squared() - nu) / nu < 1e-10);
    const auto back = gelfand_inverse(v);
    CHECK(max_diff(back.values(), u.values()) < 1e-10 * std::sqrt(nu));
  }
}

TEST_CASE("forward inverts the adjoint on quasiperiodic fields") {
  const TorusGrid cell(2, 8);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  BlochField v{2, cell, {}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      BlochFiber f{{a, b}, std::vector<cplx>(cell.size())};
      for (auto& x : f.values) x = cplx(nd(rng), nd(rng));
      v.fibers.push_back(f);
    }
  const auto again = gelfand_forward(gelfand_inverse(v));
  for (std::size_t i = 0; i < v.fibers.size(); ++i) CHECK(max_diff(again.fibers[i].values, v.fibers[i].values) < 1e-12);

  // a valid extra representative is accepted and changes nothing
  BlochField extended = v;
  extended.fibers.push_back(shifted_representative(v, v.fibers[3], 0));
  CHECK(quasiperiodicity_violation(extended) < 1e-14);
  CHECK(max_diff(gelfand_inverse(extended).values(), gelfand_inverse(v).values()) < 1e-13);

  // one that ignores the phase is rejected and the violation reported
  BlochField broken = v;
  BlochFiber bad = v.fibers[1];
  bad.label[1] += 2;
  broken.fibers.push_back(bad);
  CHECK(quasiperiodicity_violation(broken) > 0.1);
  CHECK_THROWS_WITH_AS(gelfand_inverse(broken), doctest::Contains("max relative violation"), std::invalid_argument);

  BlochField missing = v;
  missing.fibers.pop_back();
  CHECK_THROWS_WITH_AS(gelfand_inverse(missing), doctest::Contains("no fiber"), std::invalid_argument);
}

TEST_CASE("derivatives commute up to the quasimomentum") {
  const TorusGrid cell(2, 8);
  for (int P : {2, 3}) {
    const auto u = random_supercell(P, cell, 7 + P, true);
    for (int a = 0; a < 2; ++a) CHECK(derivative_commutation_residual(u, a) < 1e-8);
  }
}

TEST_CASE("direct integral of fiber forms") {
  SUBCASE("one-cell bump, flat, q = 0") {
    const TorusGrid cell(2, 32);
    auto u = SupercellFunction::zeros(2, cell);
    const int side = u.points_per_axis();
    const double h = cell.spacing();
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) {
        const double x = a * h - M_PI, y = b * h - M_PI;
        u.mutable_values()[a * side + b] = std::exp(-2.0 * (x * x + y * y));
      }
    const std::vector<double> q(cell.size(), 0.0);
    CHECK(direct_integral_check(u, FullMetric::flat(cell), q).residual < 1e-10);
  }
  SUBCASE("constant u sees only the potential") {
    const TorusGrid cell(2, 8);
    auto u = SupercellFunction::zeros(2, cell);
    std::fill(u.mutable_values().begin(), u.mutable_values().end(), cplx(1.5));
    const auto q = Potential::trigonometric(TrigPolynomial(2, 2.0, {{{1, 0}, 1.0, 0.0}})).sample(cell);
    const auto r = direct_integral_check(u, FullMetric::flat(cell), q);
    // 4 cells, int q = 2 (2 pi)^2 per cell
    const double expect = 4.0 * 2.25 * 2.0 * kTwoPi * kTwoPi;
    CHECK(r.supercell_form.real() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.fiber_average.real() == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("random resolved u on a curved cell") {
    const TorusGrid cell(3, 8);
    const ScalarField c{ScalarField::Kind::exp_trig, TrigPolynomial(3, 0.0, {{{1, 0, 0}, 0.0, 0.2}})};
    const auto g0 = TransverseMetric::from_trig(
        cell.transverse(), {{TrigPolynomial(2, 1.0, {{{0, 1}, 0.2, 0.0}}), TrigPolynomial::constant(2, 0.0)},
                            {TrigPolynomial::constant(2, 0.0), TrigPolynomial(2, 1.1, {{{1, 0}, 0.0, 0.1}})}});
    const FullMetric metric(cell, c, g0);
    const auto q = Potential::trigonometric(TrigPolynomial(3, 0.0, {{{1, 0, 0}, 3.0, 0.0}})).sample(cell);
    for (int s = 0; s < 3; ++s) {
      const auto u = random_supercell(2, cell, 50 + s, true);
      CHECK(direct_integral_check(u, metric, q).residual < 1e-8);
    }
  }
}

TEST_CASE("free bands") {
  const TorusGrid grid(3, 16);
  const auto flat = FullMetric::flat(grid);
  const std::vector<int> w{3, 3, 3};
  std::vector<std::vector<double>> path;
  for (int i = 0; i <= 20; ++i) path.push_back({i / 20.0, 0.0, 0.0});
  path.push_back({0.3, 0.2, -0.1});
  const auto rows = band_structure(flat, Potential::none(), path, 8, w, 2);
  double err = 0.0, lo = 1e9, hi = -1e9;
  for (const auto& r : rows) {
    const auto e = free_band_oracle(r.theta, 8);
    for (int b = 0; b < 8; ++b) err = std::max(err, std::abs(r.values[b] - e[b]));
    if (r.theta[1] == 0.0) {
      lo = std::min(lo, r.values[0].real());
      hi = std::max(hi, r.values[0].real());
      const double t = r.theta[0];
      CHECK(r.values[0].real() == doctest::Approx(std::min(t * t, (1 - t) * (1 - t))).epsilon(1e-12));
    }
  }
  CHECK(err < 1e-10);
  CHECK(std::abs(lo) < 1e-10);
  CHECK(std::abs(hi - 0.25) < 1e-10);
}

TEST_CASE("Mathieu bands are non-constant and periodic") {
  const TorusGrid grid(2, 52);
  const auto flat = FullMetric::flat(grid);
  const auto q2 = Potential::trigonometric(TrigPolynomial(2, 0.0, {{{1, 0}, 3.0, 0.0}}));
  const std::vector<int> w{12, 0};
  std::vector<std::vector<double>> path;
  for (int i = 0; i < 10; ++i) path.push_back({i / 10.0, 0.0});
  const auto rows = band_structure(flat, q2, path, 2, w, 2);
  double lo = 1e9, hi = -1e9, lo2 = 1e9, hi2 = -1e9;
  for (const auto& r : rows) {
    CHECK(r.values[0].real() == doctest::Approx(hill_lowest(r.theta[0])).epsilon(1e-9));
    lo = std::min(lo, r.values[0].real());
    hi = std::max(hi, r.values[0].real());
    lo2 = std::min(lo2, r.values[1].real());
    hi2 = std::max(hi2, r.values[1].real());
  }
  // the well is deep: the ground band is narrow but not flat
  CHECK(hi - lo > 1e-3);
  CHECK(hi - lo < 2e-3);
  CHECK(hi2 - lo2 > 0.01);

  const auto q = Potential::trigonometric(TrigPolynomial(3, 0.0, {{{1, 0, 0}, 3.0, 0.0}}));
  const std::vector<int> ws{3, 2, 2};
  const TorusGrid small(3, 16);
  const auto fs = FullMetric::flat(small);
  const auto a = band_structure(fs, q, {{0.3, 0.1, 0.0}}, 6, ws);
  const auto b = band_structure(fs, q, {{1.3, 0.1, 0.0}}, 6, ws);
  const auto c = band_structure(fs, q, {{0.3, -0.9, 0.0}}, 6, ws);
  CHECK(max_diff(a[0].values, b[0].values) < 1e-8);
  CHECK(max_diff(a[0].values, c[0].values) < 1e-8);
  CHECK_THROWS_AS(band_structure(fs, q, {{0.0, 0.0, 0.0}}, 1000, ws), std::invalid_argument);
}

TEST_CASE("Thomas scan") {
  const TorusGrid grid(3, 32);
  auto basis = std::make_shared<const TransverseBasis>(TransverseBasis::plane_waves(grid.transverse(), 21));
  const std::vector<double> zero(grid.size(), 0.0);
  const std::vector<double> taus{1.0, 1.5, 2.0, 5.0, 10.0};
  const auto free = thomas_scan(grid, basis, zero, taus, 12, 0);
  for (const auto& r : free.rows) {
    CHECK(r.sigma_min == doctest::Approx(carleman_min_modulus(r.tau, *basis, 12).min_modulus).epsilon(1e-13));
    CHECK(r.sigma_min >= r.tau);
    CHECK(r.truncation_k == 21);
  }
  REQUIRE(free.onset);
  CHECK(*free.onset == 1.0);

  const auto q = Potential::trigonometric(TrigPolynomial(3, 0.0, {{{1, 0, 0}, 3.0, 0.0}})).sample(grid);
  std::vector<double> sweep;
  for (int t = 4; t <= 20; t += 2) sweep.push_back(t);
  const auto scan = thomas_scan(grid, basis, q, sweep, 16, 1, 1e-9, 3);
  for (const auto& r : scan.rows) CHECK(r.sigma_min >= r.tau - 3.0 - 1e-6);

  // (j + 1/2)^2 + lambda - 1/4 vanishes at j = 0, k = 0 when tau = 0
  const std::vector<double> shift(grid.size(), -0.25);
  const auto flagged = thomas_scan(grid, basis, shift, std::vector<double>{0.0, 3.0}, 4, 0);
  CHECK(flagged.rows[0].inconclusive);
  CHECK(!flagged.rows[1].inconclusive);
  REQUIRE(flagged.onset);
  CHECK(*flagged.onset == 3.0);
  CHECK_THROWS_AS(thomas_scan(grid, basis, zero, std::vector<double>{2.0, 1.0}, 4, 0), std::invalid_argument);
}
