#include "bloch/modes.hpp"

#include <cmath>
#include <stdexcept>

#include "bloch/fft.hpp"

namespace bloch {

ModeSpace::ModeSpace(int j_min, int j_max, std::shared_ptr<const TransverseBasis> basis)
    : j_min_(j_min), j_max_(j_max), basis_(std::move(basis)) {
  if (!basis_) throw std::invalid_argument("ModeSpace: missing transverse basis");
  if (j_max_ < j_min_) throw std::invalid_argument("ModeSpace: empty j range");
}

ModeCoefficients::ModeCoefficients(ModeSpace space) : space_(std::move(space)), coefs_(space_.size()) {}

ModeCoefficients::ModeCoefficients(ModeSpace space, std::vector<cplx> coefs)
    : space_(std::move(space)), coefs_(std::move(coefs)) {
  if (coefs_.size() != space_.size()) throw std::invalid_argument("ModeCoefficients: size mismatch");
}

ModeCoefficients ModeCoefficients::unit(const ModeSpace& space, int j, int k) {
  ModeCoefficients f(space);
  f(j, k) = 1.0;
  return f;
}

double ModeCoefficients::norm() const {
  double s = 0.0;
  for (const auto& c : coefs_) s += std::norm(c);
  return std::sqrt(kTwoPi * s);
}

cplx ModeCoefficients::inner(const ModeCoefficients& other) const {
  if (!(space_ == other.space_)) throw std::invalid_argument("ModeCoefficients: space mismatch");
  cplx s{};
  for (std::size_t i = 0; i < coefs_.size(); ++i) s += coefs_[i] * std::conj(other.coefs_[i]);
  return kTwoPi * s;
}

ModeCoefficients& ModeCoefficients::operator+=(const ModeCoefficients& o) {
  if (!(space_ == o.space_)) throw std::invalid_argument("ModeCoefficients: space mismatch");
  for (std::size_t i = 0; i < coefs_.size(); ++i) coefs_[i] += o.coefs_[i];
  return *this;
}

ModeCoefficients& ModeCoefficients::operator-=(const ModeCoefficients& o) {
  if (!(space_ == o.space_)) throw std::invalid_argument("ModeCoefficients: space mismatch");
  for (std::size_t i = 0; i < coefs_.size(); ++i) coefs_[i] -= o.coefs_[i];
  return *this;
}

ModeCoefficients& ModeCoefficients::operator*=(cplx s) {
  for (auto& c : coefs_) c *= s;
  return *this;
}

ModeCoefficients operator+(ModeCoefficients a, const ModeCoefficients& b) { return a += b; }
ModeCoefficients operator-(ModeCoefficients a, const ModeCoefficients& b) { return a -= b; }
ModeCoefficients operator*(cplx s, ModeCoefficients a) { return a *= s; }

std::shared_ptr<const std::vector<double>> lifted_density(const TorusGrid& grid,
                                                          const TransverseBasis& basis) {
  if (!(grid.transverse() == basis.grid()))
    throw std::invalid_argument("lifted_density: transverse grid mismatch");
  const auto& rho = *basis.density();
  auto out = std::make_shared<std::vector<double>>(grid.size());
  const std::size_t slice = rho.size();
  for (std::size_t i = 0; i < out->size(); ++i) (*out)[i] = rho[i % slice];
  return out;
}

namespace {

void check_grid(const TorusGrid& grid, const ModeSpace& space) {
  if (!(grid.transverse() == space.basis().grid()))
    throw std::invalid_argument("mode transfer: transverse grid mismatch");
  const int nyq = grid.points_per_axis() / 2 - 1;
  if (space.j_min() < -nyq || space.j_max() > nyq)
    throw std::invalid_argument("mode transfer: x1 modes exceed the grid Nyquist limit");
}

}  // namespace

GridFunction synthesize(const ModeCoefficients& f, const TorusGrid& grid) {
  const ModeSpace& space = f.space();
  check_grid(grid, space);
  const int n = grid.points_per_axis();
  const std::size_t slice = grid.size() / n;
  std::vector<cplx> slices(slice * space.j_count());
  space.basis().synthesize(f.values(), space.j_count(), slices);
  std::vector<cplx> spec(grid.size());
  for (int j = space.j_min(); j <= space.j_max(); ++j) {
    const std::size_t b = fft::bin(j, n);
    std::copy_n(slices.begin() + static_cast<std::ptrdiff_t>((j - space.j_min()) * slice), slice,
                spec.begin() + static_cast<std::ptrdiff_t>(b * slice));
  }
  const auto shape = grid.shape();
  fft::transform_axis(spec, shape, 0, fft::Direction::backward);
  return GridFunction(grid, std::move(spec), lifted_density(grid, space.basis()));
}

ModeCoefficients analyze(const GridFunction& f, const ModeSpace& space) {
  const TorusGrid& grid = f.grid();
  check_grid(grid, space);
  const int n = grid.points_per_axis();
  const std::size_t slice = grid.size() / n;
  std::vector<cplx> spec(f.values().begin(), f.values().end());
  const auto shape = grid.shape();
  fft::transform_axis(spec, shape, 0, fft::Direction::forward);
  std::vector<cplx> slices(slice * space.j_count());
  for (int j = space.j_min(); j <= space.j_max(); ++j) {
    const std::size_t b = fft::bin(j, n);
    for (std::size_t t = 0; t < slice; ++t)
      slices[(j - space.j_min()) * slice + t] = spec[b * slice + t] / static_cast<double>(n);
  }
  ModeCoefficients out(space);
  space.basis().analyze(slices, space.j_count(), out.mutable_values());
  return out;
}

}  // namespace bloch
