#include "bloch/fields.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bloch {

TrigPolynomial::TrigPolynomial(int dim, double constant, std::vector<TrigTerm> terms)
    : dim_(dim), constant_(constant), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    if (static_cast<int>(t.wave.size()) != dim_)
      throw std::invalid_argument("TrigPolynomial: wave vector length differs from dimension");
}

double TrigPolynomial::operator()(std::span<const double> x) const {
  double v = constant_;
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (int a = 0; a < dim_; ++a) phase += t.wave[a] * x[a];
    v += t.cos_coef * std::cos(phase) + t.sin_coef * std::sin(phase);
  }
  return v;
}

std::vector<double> TrigPolynomial::sample(const TorusGrid& grid) const {
  if (grid.dim() != dim_) throw std::invalid_argument("TrigPolynomial: grid dimension mismatch");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid.point(i));
  return out;
}

int TrigPolynomial::bandwidth() const {
  int b = 0;
  for (const auto& t : terms_)
    for (int k : t.wave) b = std::max(b, std::abs(k));
  return b;
}

double TrigPolynomial::sup_bound() const {
  double s = std::abs(constant_);
  for (const auto& t : terms_) s += std::abs(t.cos_coef) + std::abs(t.sin_coef);
  return s;
}

std::map<std::vector<int>, cplx> TrigPolynomial::fourier_coefficients() const {
  std::map<std::vector<int>, cplx> c;
  c[std::vector<int>(dim_, 0)] += constant_;
  for (const auto& t : terms_) {
    bool zero = true;
    for (int k : t.wave) zero = zero && k == 0;
    if (zero) {
      c[t.wave] += t.cos_coef;
      continue;
    }
    std::vector<int> neg(t.wave);
    for (auto& k : neg) k = -k;
    // a cos + b sin = (a - i b)/2 e^{i k x} + (a + i b)/2 e^{-i k x}
    c[t.wave] += cplx(t.cos_coef, -t.sin_coef) * 0.5;
    c[neg] += cplx(t.cos_coef, t.sin_coef) * 0.5;
  }
  return c;
}

bool TrigPolynomial::depends_only_on(int axis) const {
  for (const auto& t : terms_)
    for (int a = 0; a < dim_; ++a)
      if (a != axis && t.wave[a] != 0 && (t.cos_coef != 0.0 || t.sin_coef != 0.0)) return false;
  return true;
}

double ScalarField::operator()(std::span<const double> x) const {
  const double p = poly(x);
  return kind == Kind::trig ? p : std::exp(p);
}

std::vector<double> ScalarField::sample(const TorusGrid& grid) const {
  auto v = poly.sample(grid);
  if (kind == Kind::exp_trig)
    for (auto& e : v) e = std::exp(e);
  return v;
}

bool ScalarField::is_identically_one() const {
  bool no_terms = true;
  for (const auto& t : poly.terms()) no_terms = no_terms && t.cos_coef == 0.0 && t.sin_coef == 0.0;
  if (!no_terms) return false;
  return kind == Kind::trig ? poly.constant_term() == 1.0 : poly.constant_term() == 0.0;
}

int ScalarField::bandwidth() const {
  if (kind == Kind::trig || poly.bandwidth() == 0) return poly.bandwidth();
  return -1;
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    double d = std::fmod(std::abs(x[a] - y[a]), kTwoPi);
    d = std::min(d, kTwoPi - d);
    s += d * d;
  }
  return std::sqrt(s);
}

double SingularPower::operator()(std::span<const double> x) const {
  const double d = torus_distance(x, center);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return amplitude * std::pow(d, -alpha);
}

std::vector<double> SingularPower::sample(const TorusGrid& grid) const {
  if (static_cast<int>(center.size()) != grid.dim())
    throw std::invalid_argument("SingularPower: center dimension mismatch");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (*this)(grid.point(i));
  return out;
}

std::vector<double> Potential::sample(const TorusGrid& grid) const {
  switch (kind) {
    case Kind::zero: return std::vector<double>(grid.size(), 0.0);
    case Kind::trig: return trig.sample(grid);
    case Kind::singular: return singular.sample(grid);
    case Kind::samples:
      if (samples.size() != grid.size() || samples_points != grid.points_per_axis())
        throw std::invalid_argument("Potential: sample file does not match the grid");
      return samples;
  }
  return {};
}

int Potential::bandwidth() const {
  switch (kind) {
    case Kind::zero: return 0;
    case Kind::trig: return trig.bandwidth();
    default: return -1;
  }
}

double Potential::sup_bound() const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::trig: return trig.sup_bound();
    case Kind::singular: return std::numeric_limits<double>::infinity();
    case Kind::samples: {
      double m = 0.0;
      for (double v : samples) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

std::vector<cplx> to_complex(std::span<const double> v) { return {v.begin(), v.end()}; }

}  // namespace bloch
