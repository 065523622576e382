#include "bloch/torus.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bloch {

TorusGrid::TorusGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis), size_(1) {
  if (dim < 1) throw std::invalid_argument("TorusGrid: dimension must be >= 1");
  if (points_per_axis < 4 || points_per_axis % 2 != 0)
    throw std::invalid_argument("TorusGrid: points per axis must be even and >= 4, got " +
                                std::to_string(points_per_axis));
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n_);
}

double TorusGrid::cell_weight() const { return std::pow(spacing(), dim_); }

double TorusGrid::volume() const { return std::pow(kTwoPi, dim_); }

std::vector<int> TorusGrid::multi_index(std::size_t node) const {
  std::vector<int> idx(dim_);
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % n_);
    node /= n_;
  }
  return idx;
}

std::size_t TorusGrid::node(std::span<const int> index) const {
  std::size_t out = 0;
  for (int a = 0; a < dim_; ++a) out = out * n_ + static_cast<std::size_t>(fft::bin(index[a], n_));
  return out;
}

double TorusGrid::coordinate(std::size_t node, int axis) const {
  std::size_t stride = 1;
  for (int a = dim_ - 1; a > axis; --a) stride *= n_;
  return spacing() * static_cast<double>((node / stride) % n_);
}

std::vector<double> TorusGrid::point(std::size_t node) const {
  auto idx = multi_index(node);
  std::vector<double> x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = spacing() * idx[a];
  return x;
}

TorusGrid TorusGrid::transverse() const {
  if (dim_ < 2) throw std::invalid_argument("TorusGrid: no transverse torus for dim 1");
  return TorusGrid(dim_ - 1, n_);
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(TorusGrid grid, std::vector<cplx> values)
    : GridFunction(grid, std::move(values), flat_weight(grid)) {}

GridFunction::GridFunction(TorusGrid grid, std::vector<cplx> values,
                           std::shared_ptr<const std::vector<double>> weight)
    : grid_(grid), values_(std::move(values)), weight_(std::move(weight)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("GridFunction: value count does not match node count");
  if (!weight_ || weight_->size() != grid_.size())
    throw std::invalid_argument("GridFunction: weight count does not match node count");
}

GridFunction GridFunction::zeros(TorusGrid grid, std::shared_ptr<const std::vector<double>> weight) {
  return GridFunction(grid, std::vector<cplx>(grid.size()), std::move(weight));
}

std::shared_ptr<const std::vector<double>> GridFunction::flat_weight(const TorusGrid& grid) {
  return std::make_shared<const std::vector<double>>(grid.size(), 1.0);
}

GridFunction GridFunction::with_values(std::vector<cplx> values) const {
  return GridFunction(grid_, std::move(values), weight_);
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (!(other.grid_ == grid_)) throw std::invalid_argument("GridFunction: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (!(other.grid_ == grid_)) throw std::invalid_argument("GridFunction: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx s, GridFunction a) { return a *= s; }

// ---------------------------------------------------------------------------

double lebesgue_norm(const GridFunction& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lebesgue_norm: p must be in [1, inf)");
  const auto vals = f.values();
  const auto w = f.weight();
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = std::abs(vals[i]);
    if (!std::isfinite(a)) {
      std::ostringstream msg;
      msg << "lebesgue_norm: non-finite sample at node " << i << " (index";
      for (int c : f.grid().multi_index(i)) msg << ' ' << c;
      msg << ')';
      throw std::domain_error(msg.str());
    }
    if (a == 0.0) continue;
    acc += (p == 2.0 ? a * a : std::pow(a, p)) * w[i];
  }
  return std::pow(acc * f.grid().cell_weight(), 1.0 / p);
}

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

cplx inner_product(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("inner_product: grid mismatch");
  const auto a = f.values();
  const auto b = g.values();
  const auto w = f.weight();
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]) * w[i];
  return acc * f.grid().cell_weight();
}

// ---------------------------------------------------------------------------

bool FrequencyBlock::contains(int j) const {
  const int a = std::abs(j);
  if (nu == 0) return a == 0;
  return a >= (1 << (nu - 1)) && a < (1 << nu);
}

FrequencyBlock FrequencyBlock::of(int j) {
  int a = std::abs(j);
  int nu = 0;
  while (a > 0) {
    a >>= 1;
    ++nu;
  }
  return FrequencyBlock{nu};
}

namespace {

// x1 DFT of f: rows indexed by x1 bin, each row a transverse slice.
std::vector<cplx> x1_spectrum(const GridFunction& f) {
  std::vector<cplx> work(f.values().begin(), f.values().end());
  const auto shape = f.grid().shape();
  fft::transform_axis(work, shape, 0, fft::Direction::forward);
  return work;
}

GridFunction from_x1_spectrum(std::vector<cplx> spec, const GridFunction& like) {
  const auto shape = like.grid().shape();
  fft::transform_axis(spec, shape, 0, fft::Direction::backward);
  const double scale = 1.0 / like.grid().points_per_axis();
  for (auto& v : spec) v *= scale;
  return like.with_values(std::move(spec));
}

}  // namespace

GridFunction lp_block(const GridFunction& f, const FrequencyBlock& block) {
  auto spec = x1_spectrum(f);
  const int n = f.grid().points_per_axis();
  const std::size_t slice = f.grid().size() / n;
  for (int i = 0; i < n; ++i) {
    if (block.contains(fft::wavenumber(i, n))) continue;
    std::fill_n(spec.begin() + static_cast<std::ptrdiff_t>(i * slice), slice, cplx{});
  }
  return from_x1_spectrum(std::move(spec), f);
}

std::vector<std::pair<FrequencyBlock, GridFunction>> lp_decompose(const GridFunction& f) {
  const int n = f.grid().points_per_axis();
  const int nu_max = FrequencyBlock::of(n / 2).nu;
  const auto spec = x1_spectrum(f);
  const std::size_t slice = f.grid().size() / n;
  std::vector<std::pair<FrequencyBlock, GridFunction>> out;
  out.reserve(nu_max + 1);
  for (int nu = 0; nu <= nu_max; ++nu) {
    FrequencyBlock block{nu};
    std::vector<cplx> piece(spec.size());
    for (int i = 0; i < n; ++i) {
      if (!block.contains(fft::wavenumber(i, n))) continue;
      std::copy_n(spec.begin() + static_cast<std::ptrdiff_t>(i * slice), slice,
                  piece.begin() + static_cast<std::ptrdiff_t>(i * slice));
    }
    out.emplace_back(block, from_x1_spectrum(std::move(piece), f));
  }
  return out;
}

bool weight_independent_of_x1(const GridFunction& f, double rel_tol) {
  const int n = f.grid().points_per_axis();
  const std::size_t slice = f.grid().size() / n;
  const auto w = f.weight();
  for (int i = 1; i < n; ++i)
    for (std::size_t t = 0; t < slice; ++t)
      if (std::abs(w[i * slice + t] - w[t]) > rel_tol * std::abs(w[t])) return false;
  return true;
}

std::map<int, GridFunction> x1_fourier_modes(const GridFunction& f) {
  if (f.grid().dim() < 2) throw std::invalid_argument("x1_fourier_modes: need dim >= 2");
  if (!weight_independent_of_x1(f))
    throw std::invalid_argument("x1_fourier_modes: density depends on x1");
  const int n = f.grid().points_per_axis();
  const auto spec = x1_spectrum(f);
  const TorusGrid tgrid = f.grid().transverse();
  const std::size_t slice = tgrid.size();
  auto tweight = std::make_shared<const std::vector<double>>(f.weight().begin(),
                                                             f.weight().begin() + slice);
  std::map<int, GridFunction> modes;
  for (int j = -(n / 2 - 1); j <= n / 2 - 1; ++j) {
    const int i = fft::bin(j, n);
    std::vector<cplx> vals(spec.begin() + static_cast<std::ptrdiff_t>(i * slice),
                           spec.begin() + static_cast<std::ptrdiff_t>((i + 1) * slice));
    for (auto& v : vals) v /= static_cast<double>(n);
    modes.emplace(j, GridFunction(tgrid, std::move(vals), tweight));
  }
  return modes;
}

GridFunction assemble_x1_modes(const std::map<int, GridFunction>& modes, const TorusGrid& grid,
                               std::shared_ptr<const std::vector<double>> weight) {
  const int n = grid.points_per_axis();
  const std::size_t slice = grid.size() / n;
  std::vector<cplx> spec(grid.size());
  for (const auto& [j, fj] : modes) {
    if (std::abs(j) >= n / 2) throw std::invalid_argument("assemble_x1_modes: |j| beyond grid Nyquist");
    if (fj.values().size() != slice) throw std::invalid_argument("assemble_x1_modes: slice size mismatch");
    const std::size_t i = fft::bin(j, n);
    for (std::size_t t = 0; t < slice; ++t) spec[i * slice + t] += fj.values()[t];
  }
  fft::transform_axis(spec, grid.shape(), 0, fft::Direction::backward);
  return GridFunction(grid, std::move(spec), std::move(weight));
}

}  // namespace bloch
