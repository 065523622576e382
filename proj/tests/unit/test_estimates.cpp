#include <algorithm>
#include <cmath>
#include <random>

#include "bloch/estimates.hpp"
#include "bloch/resolvent.hpp"
#include "doctest.h"

using namespace bloch;

namespace {

TransverseMetric perturbed(const TorusGrid& g) {
  TrigPolynomial a(2, 1.0, {{{1, 0}, 0.3, 0.0}});
  TrigPolynomial b(2, 1.0, {{{0, 1}, 0.3, 0.0}});
  const auto zero = TrigPolynomial::constant(2, 0.0);
  return TransverseMetric::from_trig(g, {{a, zero}, {zero, b}});
}

TransverseMetric sheared(const TorusGrid& g) {
  TrigPolynomial a(2, 1.2, {{{1, 1}, 0.2, 0.0}});
  TrigPolynomial c(2, 0.0, {{{0, 1}, 0.0, 0.1}});
  TrigPolynomial b(2, 0.9, {{{1, 0}, 0.0, 0.15}});
  return TransverseMetric::from_trig(g, {{a, c}, {c, b}});
}

// sup over g = a + b e^{-i x1} of ||g||_6 / ||g||_2 on T^3 by sampling
// (a, b) on the unit sphere of C^2; |g|^2 = 1 + 2 Re(a conj(b) e^{i x1}).
double two_mode_sampling_oracle(int samples) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  const int quad = 64;
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    double acc = 0.0;
    for (int i = 0; i < quad; ++i) {
      const double x = kTwoPi * i / quad;
      acc += std::pow(std::norm(a + b * std::exp(cplx(0.0, -x))), 3.0);
    }
    const double l6 = std::pow(acc / quad * std::pow(kTwoPi, 3), 1.0 / 6.0);
    best = std::max(best, l6 / std::pow(kTwoPi, 1.5));
  }
  return best;
}

}  // namespace

TEST_CASE("identity and orthogonal projection norms") {
  const TorusGrid grid(3, 8);
  const auto proto = GridFunction::zeros(grid, GridFunction::flat_weight(grid));
  LpOptions opt;
  opt.restarts = 4;
  CHECK(lp_operator_bound_lower(identity_operator(), proto, 1.5, 1.5, opt).ratio ==
        doctest::Approx(1.0).epsilon(1e-12));

  auto basis = std::make_shared<const TransverseBasis>(TransverseBasis::plane_waves(grid.transverse()));
  const auto space = full_grid_space(grid, basis);
  std::vector<cplx> d(space.size());
  d[space.index(0, 0)] = 1.0;
  const auto pi00 = mode_multiplier(grid, space, d, "pi_00");
  CHECK(lp_operator_bound_lower(pi00, proto, 2.0, 2.0, opt).ratio == doctest::Approx(1.0).epsilon(1e-9));

  const auto zero = mode_multiplier(grid, space, std::vector<cplx>(space.size()), "zero");
  CHECK(lp_operator_bound_lower(zero, proto, 1.2, 6.0, opt).ratio == 0.0);
}

TEST_CASE("mode multiplier adjoint") {
  const TorusGrid grid(3, 8);
  auto basis = std::make_shared<const TransverseBasis>(TransverseBasis::separable(perturbed(grid.transverse()), 3));
  const auto space = full_grid_space(grid, basis);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<cplx> d(space.size());
  for (auto& x : d) x = cplx(nd(rng), nd(rng));
  const auto op = mode_multiplier(grid, space, d, "random");
  const auto w = lifted_density(grid, *basis);
  std::vector<cplx> a(grid.size()), b(grid.size());
  for (auto& x : a) x = cplx(nd(rng), nd(rng));
  for (auto& x : b) x = cplx(nd(rng), nd(rng));
  const GridFunction f(grid, a, w), g(grid, b, w);
  const cplx lhs = inner_product(op.apply(f), g), rhs = inner_product(f, op.adjoint(g));
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("cluster 0 on flat T^3") {
  LpOptions opt;
  opt.restarts = 6;
  const auto c = cluster_constant(0, 3, flat_basis_factory(), opt);
  CHECK(c.members == 2);
  const double closed_form = std::pow(2.5, 1.0 / 6.0) / kTwoPi;
  CHECK(c.forward == doctest::Approx(closed_form).epsilon(1e-3));
  CHECK(std::abs(c.forward - two_mode_sampling_oracle(10000)) < 0.05 * c.forward);
  CHECK(c.gap() < 0.02);
}

TEST_CASE("cluster constants stay comparable") {
  LpOptions opt;
  opt.restarts = 4;
  opt.iterations = 20;
  std::vector<double> cs;
  for (int m : {1, 4, 8}) {
    const auto c = cluster_constant(m, 3, flat_basis_factory(), opt);
    CHECK(c.gap() < 0.05);
    cs.push_back(c.constant());
  }
  CHECK(variation(cs) < 10.0);
}

TEST_CASE("Carleman minimum modulus") {
  const TorusGrid tg(2, 16);
  const auto flat = TransverseBasis::plane_waves(tg);
  const auto w1 = carleman_min_modulus(1.0, flat, 16);
  CHECK(std::abs(w1.min_modulus - std::sqrt(17.0) / 4.0) < 1e-12);
  CHECK(w1.lambda == 1.0);
  CHECK((w1.j == 0 || w1.j == -1));
  CHECK(w1.holds);
  CHECK(carleman_min_modulus(0.0, flat, 8).min_modulus == 0.25);

  std::vector<TransverseBasis> bases;
  bases.push_back(flat);
  bases.push_back(solve_transverse(perturbed(TorusGrid(2, 20)), {4, 64, false}));
  bases.push_back(solve_transverse(sheared(TorusGrid(2, 20)), {4, 64, false}));
  for (const auto& b : bases)
    for (double tau : {1.0, 1.5, 2.0, 5.0, 10.0, 100.0, -3.0}) {
      const auto w = carleman_min_modulus(tau, b, 16);
      CHECK(w.min_modulus >= std::abs(tau));
      CHECK(w.tail_lower >= std::abs(tau));
      CHECK(w.holds);
      for (int j = -16; j <= 16; ++j)
        for (int k = 0; k < b.count(); ++k) {
          const double lam = b.eigenvalue(k);
          const double s = j + 0.5;
          CHECK(2.0 * std::abs(mu(j, lam, tau)) >= std::abs(s * s + lam - tau * tau) + std::abs(tau));
        }
    }
}

TEST_CASE("potential split") {
  const TorusGrid grid(3, 16);
  const auto bounded = Potential::trigonometric(TrigPolynomial(3, 0.0, {{{1, 0, 0}, 3.0, 0.0}})).sample(grid);
  const auto s0 = split_potential(grid, bounded, 1e-12);
  double sup = 0.0;
  for (double v : bounded) sup = std::max(sup, std::abs(v));
  CHECK(s0.cutoff == sup);
  CHECK(s0.remainder_norm == 0.0);
  CHECK(std::all_of(s0.remainder.begin(), s0.remainder.end(), [](double v) { return v == 0.0; }));
  CHECK_THROWS_AS(split_potential(grid, bounded, 0.0), std::invalid_argument);

  const double h = grid.spacing();
  const SingularPower sp{1.0, 1.5, {kTwoPi / 2 + h / 2, kTwoPi / 2 + h / 2, kTwoPi / 2 + h / 2}};
  const auto q = Potential::power(sp).sample(grid);
  const auto s = split_potential(grid, q, 0.1);
  auto remainder_norm = [&](double cutoff) {
    double acc = 0.0;
    for (double v : q)
      if (std::abs(v) > cutoff) acc += std::pow(std::abs(v), 1.5) * grid.cell_weight();
    return std::pow(acc, 1.0 / 1.5);
  };
  CHECK(remainder_norm(s.cutoff) <= 0.1);
  CHECK(s.remainder_norm == doctest::Approx(remainder_norm(s.cutoff)).epsilon(1e-12));
  double prev = remainder_norm(0.0);
  for (double m = 0.5; m < 100.0; m *= 1.7) {
    const double r = remainder_norm(m);
    CHECK(r <= prev);
    prev = r;
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(s.sharp[i] + s.remainder[i] == q[i]);
    CHECK(std::abs(s.sharp[i]) <= s.cutoff);
  }
  // a lower cutoff from the sample lattice would exceed epsilon
  double below = 0.0;
  for (double v : q)
    if (std::abs(v) < s.cutoff) below = std::max(below, std::abs(v));
  CHECK(remainder_norm(below) > 0.1);

  // Hoelder: ||q_sharp u||_{6/5} <= vol^{1/3} ||q_sharp||_inf ||u||_2
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double sharp_sup = 0.0;
  for (double v : s.sharp) sharp_sup = std::max(sharp_sup, std::abs(v));
  for (int t = 0; t < 20; ++t) {
    std::vector<cplx> u(grid.size()), qu(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = cplx(nd(rng), nd(rng));
      qu[i] = s.sharp[i] * u[i];
    }
    const double lhs = lebesgue_norm(GridFunction(grid, qu), 1.2);
    const double rhs = std::cbrt(grid.volume()) * sharp_sup * lebesgue_norm(GridFunction(grid, u), 2.0);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("bounded-potential injectivity") {
  const TorusGrid grid(3, 32);
  auto basis = std::make_shared<const TransverseBasis>(TransverseBasis::plane_waves(grid.transverse(), 21));
  const auto q = Potential::trigonometric(TrigPolynomial(3, 0.0, {{{1, 0, 0}, 3.0, 0.0}})).sample(grid);
  for (double tau : {4.0, 8.0, 12.0, 20.0}) {
    const auto r = injectivity_bounded(tau, grid, basis, 16, 1, q, 3.0);
    CHECK(r.pass);
    CHECK(r.measured_constant >= tau - 3.0 - 1e-6);
  }
  const std::vector<double> zero(grid.size(), 0.0);
  const auto r0 = injectivity_bounded(2.0, grid, basis, 16, 0, zero, 0.0);
  CHECK(r0.measured_constant == doctest::Approx(carleman_min_modulus(2.0, *basis, 16).min_modulus).epsilon(1e-14));
}

TEST_CASE("resolvent sweep bookkeeping") {
  LpOptions opt;
  opt.restarts = 3;
  opt.iterations = 10;
  const auto p = resolvent_lp_point(4.0, 3, flat_basis_factory(), opt);
  CHECK(p.grid_n == 16);
  CHECK(p.g_2to2 <= 0.25);
  CHECK(p.g_to2 > 0.0);
  const auto reports = resolvent_lp_bounds({p, p}, 4.0);
  CHECK(reports.size() == 3 * 3 + 2);
  for (const auto& r : reports) CHECK(r.pass);
  CHECK(variation({1.0, 3.0}) == 3.0);
  CHECK(std::isinf(variation({0.0, 1.0})));
}

TEST_CASE("singular-potential injectivity ratio") {
  const TorusGrid grid(3, 16);
  auto basis = std::make_shared<const TransverseBasis>(TransverseBasis::plane_waves(grid.transverse()));
  const double h = grid.spacing();
  const SingularPower sp{1.0, 1.5, {kTwoPi / 2 + h / 2, kTwoPi / 2 + h / 2, kTwoPi / 2 + h / 2}};
  const auto q = Potential::power(sp).sample(grid);
  LpOptions opt;
  opt.restarts = 3;
  opt.iterations = 10;
  const auto r = injectivity_singular(4.0, grid, basis, q, 4, 5, opt);
  CHECK(r.c0 > 0.0);
  CHECK(r.ratio > 0.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(r.split.epsilon == doctest::Approx(1.0 / (4.0 * r.c0)));
  CHECK(r.admissible == (4.0 >= 2.0 * r.split.cutoff));
}
