#pragma once

#include <map>
#include <span>
#include <vector>

#include "bloch/torus.hpp"

namespace bloch {

/// Real trigonometric polynomial
///   p(x) = constant + sum_t (a_t cos(k_t.x) + b_t sin(k_t.x)).
struct TrigTerm {
  std::vector<int> wave;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  TrigPolynomial(int dim, double constant, std::vector<TrigTerm> terms = {});

  static TrigPolynomial constant(int dim, double value) { return TrigPolynomial(dim, value); }

  int dim() const { return dim_; }
  double constant_term() const { return constant_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  double operator()(std::span<const double> x) const;
  std::vector<double> sample(const TorusGrid& grid) const;
  /// max_t |k_t|_inf; 0 for a constant.
  int bandwidth() const;
  /// |constant| + sum |a_t| + |b_t|, an upper bound for sup |p|.
  double sup_bound() const;
  /// Exponential Fourier coefficients: p = sum_m c_m e^{i m.x}.
  std::map<std::vector<int>, cplx> fourier_coefficients() const;
  /// True when p depends on coordinate `axis` only (or is constant).
  bool depends_only_on(int axis) const;

 private:
  int dim_ = 0;
  double constant_ = 0.0;
  std::vector<TrigTerm> terms_;
};

/// Positive scalar field given either as p(x) or as exp(p(x)).
struct ScalarField {
  enum class Kind { trig, exp_trig };
  Kind kind = Kind::trig;
  TrigPolynomial poly;

  static ScalarField one(int dim) { return {Kind::trig, TrigPolynomial::constant(dim, 1.0)}; }
  double operator()(std::span<const double> x) const;
  std::vector<double> sample(const TorusGrid& grid) const;
  bool is_identically_one() const;
  /// Declared bandwidth; -1 when the field is not a finite trig polynomial.
  int bandwidth() const;
};

/// amplitude * d(x, center)^{-alpha}, d the flat distance on T^n to the
/// nearest periodic image of the center.
struct SingularPower {
  double amplitude = 1.0;
  double alpha = 1.5;
  std::vector<double> center;

  double operator()(std::span<const double> x) const;
  std::vector<double> sample(const TorusGrid& grid) const;
};

/// Potential q: zero, trig polynomial, periodized power singularity or raw samples.
struct Potential {
  enum class Kind { zero, trig, singular, samples };
  Kind kind = Kind::zero;
  TrigPolynomial trig;
  SingularPower singular;
  std::vector<double> samples;
  int samples_points = 0;

  static Potential none() { return {}; }
  static Potential trigonometric(TrigPolynomial p) { return {Kind::trig, std::move(p), {}, {}, 0}; }
  static Potential power(SingularPower s) { return {Kind::singular, {}, std::move(s), {}, 0}; }

  std::vector<double> sample(const TorusGrid& grid) const;
  /// Declared bandwidth; -1 when q is not a trig polynomial.
  int bandwidth() const;
  /// Upper bound for sup |q| (infinite for a singular potential).
  double sup_bound() const;
  bool is_zero() const { return kind == Kind::zero; }
};

/// Minimal-image distance on T^n = R^n / 2*pi Z^n.
double torus_distance(std::span<const double> x, std::span<const double> y);

/// Complex samples of a real field, for use as a GridFunction.
std::vector<cplx> to_complex(std::span<const double> v);

}  // namespace bloch
