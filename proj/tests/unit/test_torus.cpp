#include <cmath>
#include <random>

#include "bloch/fields.hpp"
#include "bloch/torus.hpp"
#include "doctest.h"

using namespace bloch;

namespace {

GridFunction sample(const TorusGrid& g, auto&& f) {
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.point(i));
  return GridFunction(g, std::move(v));
}

GridFunction random_smooth(const TorusGrid& g, std::mt19937_64& rng, int band) {
  std::normal_distribution<double> nd;
  std::vector<std::pair<std::vector<int>, cplx>> terms;
  for (int t = 0; t < 12; ++t) {
    std::vector<int> k(g.dim());
    for (auto& c : k) c = static_cast<int>(rng() % (2 * band + 1)) - band;
    terms.emplace_back(k, cplx(nd(rng), nd(rng)));
  }
  return sample(g, [&](const std::vector<double>& x) {
    cplx s{};
    for (const auto& [k, a] : terms) {
      double ph = 0;
      for (std::size_t d = 0; d < x.size(); ++d) ph += k[d] * x[d];
      s += a * std::polar(1.0, ph);
    }
    return s;
  });
}

}  // namespace

TEST_CASE("grid layout and quadrature weight") {
  TorusGrid g(3, 8);
  CHECK(g.size() == 512);
  CHECK(g.cell_weight() == doctest::Approx(std::pow(kTwoPi / 8, 3)).epsilon(1e-15));
  std::vector<int> idx{1, 2, 3};
  auto node = g.node(idx);
  CHECK(g.multi_index(node) == idx);
  CHECK(g.coordinate(node, 0) == doctest::Approx(kTwoPi / 8));
  CHECK(g.coordinate(node, 2) == doctest::Approx(3 * kTwoPi / 8));
  CHECK_THROWS_AS(TorusGrid(3, 7), std::invalid_argument);
}

TEST_CASE("lebesgue norm of constants and single modes") {
  TorusGrid g(3, 16);
  auto one = sample(g, [](const auto&) { return cplx(1.0); });
  CHECK(lebesgue_norm(one, 2.0) == doctest::Approx(std::pow(kTwoPi, 1.5)).epsilon(1e-13));
  CHECK(lebesgue_norm(one, 2.0) == doctest::Approx(15.7496).epsilon(1e-5));
  auto c1 = sample(g, [](const auto& x) { return cplx(std::cos(x[0])); });
  CHECK(lebesgue_norm(c1, 2.0) == doctest::Approx(11.1366).epsilon(1e-5));
  CHECK(lebesgue_norm(c1, 2.0) == doctest::Approx(std::sqrt(std::pow(kTwoPi, 3) / 2)).epsilon(1e-13));
}

TEST_CASE("lebesgue norm rejects non-finite samples with the node") {
  TorusGrid g(3, 8);
  auto f = GridFunction::zeros(g, GridFunction::flat_weight(g));
  f.mutable_values()[37] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)lebesgue_norm(f, 1.5);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("node 37") != std::string::npos);
  }
}

TEST_CASE("p = 3/2 norm against a refined Riemann sum") {
  std::mt19937_64 rng(11);
  // smooth positive-ish field so |f|^{3/2} is resolved: exp of a low trig poly
  auto field = [](const std::vector<double>& x) {
    return cplx(std::exp(0.3 * std::sin(x[0]) + 0.2 * std::cos(x[1] - x[2])), 0.4 * std::cos(x[2]));
  };
  TorusGrid g(3, 16), fine(3, 32);
  double coarse = lebesgue_norm(sample(g, field), 1.5);
  double s = 0;
  for (std::size_t i = 0; i < fine.size(); ++i) s += std::pow(std::abs(field(fine.point(i))), 1.5);
  double oracle = std::pow(s * fine.cell_weight(), 1.0 / 1.5);
  CHECK(std::abs(coarse - oracle) / oracle < 1e-6);
}

TEST_CASE("quadrature exactness and Hoelder pairing") {
  std::mt19937_64 rng(3);
  TorusGrid g(3, 16);
  auto f = random_smooth(g, rng, 3);
  // analytic norm of sum a_k e^{ikx}: (2pi)^3 sum |a_k|^2 after merging equal k
  auto modes = x1_fourier_modes(f);
  double parseval = 0;
  for (const auto& [j, fj] : modes) parseval += kTwoPi * std::pow(lebesgue_norm(fj, 2.0), 2);
  CHECK(std::abs(parseval - std::pow(lebesgue_norm(f, 2.0), 2)) < 1e-10 * parseval);
  for (int t = 0; t < 100; ++t) {
    auto a = random_smooth(g, rng, 4);
    auto b = random_smooth(g, rng, 4);
    CHECK(std::abs(inner_product(a, b)) <= lebesgue_norm(a, 6.0) * lebesgue_norm(b, 1.2) * (1 + 1e-12));
  }
}

TEST_CASE("frequency blocks partition the integers") {
  for (int j = -70; j <= 70; ++j) {
    int hits = 0;
    for (int nu = 0; nu < 10; ++nu) hits += FrequencyBlock{nu}.contains(j);
    CHECK(hits == 1);
    CHECK(FrequencyBlock::of(j).contains(j));
  }
  CHECK(FrequencyBlock::of(3).nu == 2);
  CHECK(FrequencyBlock{3}.lowest() == 4);
  CHECK(FrequencyBlock{3}.highest() == 7);
}

TEST_CASE("Littlewood-Paley decomposition") {
  TorusGrid g(3, 16);
  auto h = [](const std::vector<double>& x) { return std::cos(x[1]) + cplx(0, 1) * std::sin(2 * x[2]); };
  SUBCASE("single block for a pure x1 mode") {
    auto f = sample(g, [&](const auto& x) { return std::polar(1.0, 3 * x[0]) * h(x); });
    for (const auto& [block, piece] : lp_decompose(f)) {
      const double nrm = lebesgue_norm(piece, 2.0);
      if (block.nu == 2) CHECK(std::abs(nrm - lebesgue_norm(f, 2.0)) < 1e-12 * nrm);
      else CHECK(nrm < 1e-12);
    }
  }
  SUBCASE("x1-independent data sits in block 0") {
    auto f = sample(g, h);
    for (const auto& [block, piece] : lp_decompose(f))
      if (block.nu != 0) CHECK(lebesgue_norm(piece, 2.0) < 1e-12);
  }
  SUBCASE("reconstruction and orthogonality") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<cplx> v(g.size());
    for (auto& e : v) e = {nd(rng), nd(rng)};
    GridFunction f(g, v);
    auto parts = lp_decompose(f);
    auto sum = GridFunction::zeros(g, f.shared_weight());
    for (const auto& [b, p] : parts) sum += p;
    CHECK(lebesgue_norm(sum - f, 2.0) < 1e-12 * lebesgue_norm(f, 2.0));
    for (std::size_t a = 0; a < parts.size(); ++a)
      for (std::size_t b = a + 1; b < parts.size(); ++b)
        CHECK(std::abs(inner_product(parts[a].second, parts[b].second)) < 1e-10);
  }
}

TEST_CASE("x1 Fourier modes") {
  TorusGrid g(3, 16);
  auto e2 = sample(g, [](const auto& x) { return std::polar(1.0, 2 * x[0]); });
  auto modes = x1_fourier_modes(e2);
  for (const auto& [j, fj] : modes) {
    for (auto v : fj.values()) CHECK(std::abs(v - cplx(j == 2 ? 1.0 : 0.0)) < 1e-12);
  }
  std::mt19937_64 rng(9);
  auto f = random_smooth(g, rng, 5);
  std::vector<cplx> re(f.values().begin(), f.values().end());
  for (auto& v : re) v = v.real();
  GridFunction fr(g, re);
  auto m = x1_fourier_modes(fr);
  for (int j = 1; j <= 7; ++j)
    for (std::size_t i = 0; i < m.at(j).values().size(); ++i)
      CHECK(std::abs(m.at(-j).values()[i] - std::conj(m.at(j).values()[i])) < 1e-12);
  auto back = assemble_x1_modes(x1_fourier_modes(f), g, f.shared_weight());
  CHECK(lebesgue_norm(back - f, 2.0) < 1e-12 * lebesgue_norm(f, 2.0));
}

TEST_CASE("trig polynomial coefficients") {
  TrigPolynomial p(2, 1.0, {{{1, 0}, 0.3, 0.0}, {{0, 2}, 0.0, 0.5}});
  CHECK(p.bandwidth() == 2);
  CHECK(p.sup_bound() == doctest::Approx(1.8));
  auto c = p.fourier_coefficients();
  CHECK(std::abs(c[{1, 0}] - cplx(0.15, 0)) < 1e-15);
  CHECK(std::abs(c[{0, -2}] - cplx(0, 0.25)) < 1e-15);
  std::vector<double> x{0.3, 1.1};
  cplx s{};
  for (const auto& [k, a] : c) s += a * std::polar(1.0, k[0] * x[0] + k[1] * x[1]);
  CHECK(std::abs(s - p(x)) < 1e-14);
  CHECK_FALSE(p.depends_only_on(0));
  CHECK(TrigPolynomial(2, 1.0, {{{0, 3}, 1.0, 0.0}}).depends_only_on(1));
}

TEST_CASE("torus distance uses the nearest image") {
  std::vector<double> a{0.1, 0.0, 0.0}, b{kTwoPi - 0.1, 0.0, 0.0};
  CHECK(torus_distance(a, b) == doctest::Approx(0.2));
}
