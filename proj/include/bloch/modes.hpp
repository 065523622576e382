#pragma once

#include <memory>
#include <vector>

#include "bloch/torus.hpp"
#include "bloch/transverse.hpp"

namespace bloch {

/// Tensor index set {(j, k) : j_min <= j <= j_max, 0 <= k < K} for the
/// basis psi~_{j,k}(x) = e^{i j x1} psi_k(x').
class ModeSpace {
 public:
  ModeSpace(int j_min, int j_max, std::shared_ptr<const TransverseBasis> basis);
  static ModeSpace symmetric(int j_max, std::shared_ptr<const TransverseBasis> basis) {
    return ModeSpace(-j_max, j_max, std::move(basis));
  }

  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int j_count() const { return j_max_ - j_min_ + 1; }
  int k_count() const { return basis_->count(); }
  std::size_t size() const { return static_cast<std::size_t>(j_count()) * k_count(); }
  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>(j - j_min_) * k_count() + k;
  }
  int j_of(std::size_t i) const { return j_min_ + static_cast<int>(i / k_count()); }
  int k_of(std::size_t i) const { return static_cast<int>(i % k_count()); }
  bool contains(int j) const { return j >= j_min_ && j <= j_max_; }

  const TransverseBasis& basis() const { return *basis_; }
  const std::shared_ptr<const TransverseBasis>& shared_basis() const { return basis_; }
  double lambda(int k) const { return basis_->eigenvalue(k); }
  /// (j + 1/2)^2 + lambda_k, the eigenvalue of H0(theta_0) on psi~_{j,k}.
  double energy(int j, int k) const { return (j + 0.5) * (j + 0.5) + lambda(k); }

  bool operator==(const ModeSpace& o) const {
    return j_min_ == o.j_min_ && j_max_ == o.j_max_ && basis_ == o.basis_;
  }

 private:
  int j_min_;
  int j_max_;
  std::shared_ptr<const TransverseBasis> basis_;
};

/// f = sum c_{j,k} psi~_{j,k}; ||psi~_{j,k}||^2 = 2 pi.
class ModeCoefficients {
 public:
  explicit ModeCoefficients(ModeSpace space);
  ModeCoefficients(ModeSpace space, std::vector<cplx> coefs);
  static ModeCoefficients unit(const ModeSpace& space, int j, int k);

  const ModeSpace& space() const { return space_; }
  std::span<const cplx> values() const { return coefs_; }
  std::vector<cplx>& mutable_values() { return coefs_; }
  cplx operator()(int j, int k) const { return coefs_[space_.index(j, k)]; }
  cplx& operator()(int j, int k) { return coefs_[space_.index(j, k)]; }

  double norm() const;
  /// <f, g> = 2 pi sum c conj(d).
  cplx inner(const ModeCoefficients& other) const;

  ModeCoefficients& operator+=(const ModeCoefficients& o);
  ModeCoefficients& operator-=(const ModeCoefficients& o);
  ModeCoefficients& operator*=(cplx s);

 private:
  ModeSpace space_;
  std::vector<cplx> coefs_;
};

ModeCoefficients operator+(ModeCoefficients a, const ModeCoefficients& b);
ModeCoefficients operator-(ModeCoefficients a, const ModeCoefficients& b);
ModeCoefficients operator*(cplx s, ModeCoefficients a);

/// Weighted density |g0(x')|^{1/2} lifted to T^n (constant in x1).
std::shared_ptr<const std::vector<double>> lifted_density(const TorusGrid& grid,
                                                          const TransverseBasis& basis);

/// Sample sum c psi~ on the full grid; needs max |j| <= N/2 - 1.
GridFunction synthesize(const ModeCoefficients& f, const TorusGrid& grid);
/// c_{j,k} = <f, psi~_{j,k}> / 2 pi for the modes of `space`.
ModeCoefficients analyze(const GridFunction& f, const ModeSpace& space);

}  // namespace bloch
