#include "bloch/transverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bloch/fft.hpp"

namespace bloch {
namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_zero_poly(const TrigPolynomial& p) {
  if (p.constant_term() != 0.0) return false;
  for (const auto& t : p.terms())
    if (t.cos_coef != 0.0 || t.sin_coef != 0.0) return false;
  return true;
}

bool is_constant_poly(const TrigPolynomial& p, double value) {
  if (p.constant_term() != value) return false;
  for (const auto& t : p.terms()) {
    bool zero_wave = std::all_of(t.wave.begin(), t.wave.end(), [](int k) { return k == 0; });
    if (zero_wave ? t.cos_coef != 0.0 : (t.cos_coef != 0.0 || t.sin_coef != 0.0)) return false;
  }
  return true;
}

TrigPolynomial scale_poly(const TrigPolynomial& p, double s) {
  auto terms = p.terms();
  for (auto& t : terms) {
    t.cos_coef *= s;
    t.sin_coef *= s;
  }
  return TrigPolynomial(p.dim(), s * p.constant_term(), std::move(terms));
}

// out[o, r, i] = sum_c a(r, c) in[o, c, i] for the axis of `shape`.
std::vector<cplx> apply_axis(const std::vector<cplx>& in, std::vector<int>& shape, int axis,
                             const Eigen::MatrixXcd& a) {
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= shape[d];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];
  const auto n_in = static_cast<Eigen::Index>(shape[axis]);
  const auto n_out = a.rows();
  std::vector<cplx> out(outer * n_out * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    Eigen::Map<const RowMat> src(in.data() + o * n_in * inner, n_in, static_cast<Eigen::Index>(inner));
    Eigen::Map<RowMat> dst(out.data() + o * n_out * inner, n_out, static_cast<Eigen::Index>(inner));
    dst.noalias() = a * src;
  }
  shape[axis] = static_cast<int>(n_out);
  return out;
}

double det_sqrt(const Eigen::MatrixXd& g) { return std::sqrt(g.determinant()); }

std::vector<std::vector<int>> box_modes(int dim, int max_mode) {
  std::vector<std::vector<int>> modes;
  std::vector<int> k(dim, -max_mode);
  while (true) {
    modes.push_back(k);
    int a = dim - 1;
    while (a >= 0 && k[a] == max_mode) k[a--] = -max_mode;
    if (a < 0) break;
    ++k[a];
  }
  return modes;
}

// Forward DFT of real samples divided by the node count: c(m) = avg f e^{-i m.x}.
std::vector<cplx> averaged_dft(std::span<const double> samples, const TorusGrid& grid) {
  std::vector<cplx> work(samples.begin(), samples.end());
  const auto shape = grid.shape();
  fft::transform(work, shape, fft::Direction::forward);
  const double inv = 1.0 / static_cast<double>(grid.size());
  for (auto& v : work) v *= inv;
  return work;
}

std::size_t bin_of(std::span<const int> k, const TorusGrid& grid) {
  std::size_t b = 0;
  for (int v : k) b = b * grid.points_per_axis() + fft::bin(v, grid.points_per_axis());
  return b;
}

long long norm2(const std::vector<int>& k) {
  long long s = 0;
  for (int v : k) s += static_cast<long long>(v) * v;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

TransverseMetric::TransverseMetric(TorusGrid grid, std::vector<double> comps, int bandwidth)
    : grid_(grid), comps_(std::move(comps)), bandwidth_(bandwidth) {}

void TransverseMetric::finish() {
  const int d = dim();
  if (comps_.size() != grid_.size() * d * d)
    throw std::invalid_argument("TransverseMetric: component array has wrong length");
  inverse_.resize(comps_.size());
  auto density = std::make_shared<std::vector<double>>(grid_.size());
  flat_ = true;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    Eigen::Map<const Eigen::MatrixXd> g(comps_.data() + i * d * d, d, d);
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + g.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("TransverseMetric: components not symmetric at node " +
                                  std::to_string(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw std::invalid_argument("TransverseMetric: not positive definite at node " +
                                  std::to_string(i));
    Eigen::Map<Eigen::MatrixXd>(inverse_.data() + i * d * d, d, d) = g.inverse();
    (*density)[i] = det_sqrt(g);
    flat_ = flat_ && g.isIdentity(0.0);
  }
  density_ = std::move(density);
}

TransverseMetric TransverseMetric::flat(const TorusGrid& grid) {
  const int d = grid.dim();
  std::vector<std::vector<TrigPolynomial>> c(d, std::vector<TrigPolynomial>(d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) c[a][b] = TrigPolynomial::constant(d, a == b ? 1.0 : 0.0);
  return from_trig(grid, std::move(c));
}

TransverseMetric TransverseMetric::from_trig(const TorusGrid& grid,
                                             std::vector<std::vector<TrigPolynomial>> components) {
  const int d = grid.dim();
  if (static_cast<int>(components.size()) != d)
    throw std::invalid_argument("TransverseMetric: component matrix has wrong size");
  for (int a = 0; a < d; ++a) {
    if (static_cast<int>(components[a].size()) != d)
      throw std::invalid_argument("TransverseMetric: component matrix has wrong size");
    for (int b = 0; b < a; ++b) components[a][b] = components[b][a];
  }
  int bw = 0;
  std::vector<double> comps(grid.size() * d * d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      const auto& p = components[a][b];
      if (p.dim() != d) throw std::invalid_argument("TransverseMetric: polynomial dimension mismatch");
      bw = std::max(bw, p.bandwidth());
      auto s = p.sample(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        comps[i * d * d + a * d + b] = s[i];
        comps[i * d * d + b * d + a] = s[i];
      }
    }
  TransverseMetric m(grid, std::move(comps), bw);
  m.finish();
  bool sep = true;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      sep = sep && (a == b ? components[a][a].depends_only_on(a) : is_zero_poly(components[a][b]));
  m.separable_ = sep;
  bool flat = true;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) flat = flat && is_constant_poly(components[a][b], a == b ? 1.0 : 0.0);
  m.flat_ = flat;
  m.trig_ = std::move(components);
  return m;
}

TransverseMetric TransverseMetric::from_samples(const TorusGrid& grid, std::vector<double> components,
                                                int bandwidth) {
  TransverseMetric m(grid, std::move(components), bandwidth);
  m.finish();
  return m;
}

Eigen::MatrixXd TransverseMetric::components(std::size_t node) const {
  const int d = dim();
  return Eigen::Map<const Eigen::MatrixXd>(comps_.data() + node * d * d, d, d);
}

Eigen::MatrixXd TransverseMetric::inverse(std::size_t node) const {
  const int d = dim();
  return Eigen::Map<const Eigen::MatrixXd>(inverse_.data() + node * d * d, d, d);
}

TransverseMetric TransverseMetric::resampled(const TorusGrid& grid) const {
  if (!trig_) throw std::invalid_argument("TransverseMetric: sampled metric cannot be resampled");
  if (grid.dim() != dim()) throw std::invalid_argument("TransverseMetric: grid dimension mismatch");
  return from_trig(grid, *trig_);
}

TransverseMetric TransverseMetric::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("TransverseMetric: scale must be positive");
  if (trig_) {
    auto c = *trig_;
    for (auto& row : c)
      for (auto& p : row) p = scale_poly(p, s);
    return from_trig(grid_, std::move(c));
  }
  auto c = comps_;
  for (auto& v : c) v *= s;
  return from_samples(grid_, std::move(c), bandwidth_);
}

TransverseMetric TransverseMetric::separable_factor(int axis) const {
  if (!separable_ || !trig_) throw std::invalid_argument("TransverseMetric: metric is not separable");
  const auto& p = (*trig_)[axis][axis];
  std::vector<TrigTerm> terms;
  for (const auto& t : p.terms()) terms.push_back({{t.wave[axis]}, t.cos_coef, t.sin_coef});
  TorusGrid g1(1, grid_.points_per_axis());
  return from_trig(g1, {{TrigPolynomial(1, p.constant_term(), std::move(terms))}});
}

// ---------------------------------------------------------------------------

TransverseForms assemble_forms(const TransverseMetric& metric, int max_mode, bool grid_quadrature) {
  const TorusGrid& grid = metric.grid();
  const int d = metric.dim();
  const int n = grid.points_per_axis();
  if (max_mode < 0) throw std::invalid_argument("assemble_forms: max_mode must be >= 0");
  if (grid_quadrature) {
    if (max_mode > n / 2 - 1)
      throw std::invalid_argument("assemble_forms: max_mode exceeds grid Nyquist");
  } else if (n < 2 * (2 * max_mode + metric.bandwidth())) {
    std::ostringstream msg;
    msg << "assemble_forms: grid N = " << n << " under-resolves K_max = " << max_mode
        << " with metric bandwidth " << metric.bandwidth() << " (need N >= "
        << 2 * (2 * max_mode + metric.bandwidth()) << ")";
    throw std::invalid_argument(msg.str());
  }

  // G^{ab} = |g0|^{1/2} g0^{ab}
  std::vector<std::vector<cplx>> coef(d * d);
  std::vector<double> buf(grid.size());
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      for (std::size_t i = 0; i < grid.size(); ++i)
        buf[i] = metric.density()[i] * metric.inverse(i)(a, b);
      coef[a * d + b] = averaged_dft(buf, grid);
    }
  const auto rho = averaged_dft(metric.density(), grid);
  const double vol = grid.volume();

  TransverseForms f;
  f.max_mode = max_mode;
  f.modes = box_modes(d, max_mode);
  const auto size = static_cast<Eigen::Index>(f.modes.size());
  f.stiffness = Eigen::MatrixXcd::Zero(size, size);
  f.mass = Eigen::MatrixXcd::Zero(size, size);
  std::vector<int> diff(d);
  for (Eigen::Index r = 0; r < size; ++r)
    for (Eigen::Index c = 0; c < size; ++c) {
      const auto& ka = f.modes[r];
      const auto& kb = f.modes[c];
      for (int a = 0; a < d; ++a) diff[a] = ka[a] - kb[a];
      const std::size_t bin = bin_of(diff, grid);
      cplx s{};
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const cplx g = a <= b ? coef[a * d + b][bin] : coef[b * d + a][bin];
          s += static_cast<double>(ka[a]) * kb[b] * g;
        }
      f.stiffness(r, c) = vol * s;
      f.mass(r, c) = vol * rho[bin];
    }
  f.stiffness = (0.5 * (f.stiffness + f.stiffness.adjoint())).eval();
  f.mass = (0.5 * (f.mass + f.mass.adjoint())).eval();
  return f;
}

namespace {

void sample_fourier_columns(const Eigen::MatrixXcd& coefs, const std::vector<std::vector<int>>& modes,
                            const TorusGrid& grid, Eigen::MatrixXcd& out) {
  out.resize(static_cast<Eigen::Index>(grid.size()), coefs.cols());
  const auto shape = grid.shape();
  std::vector<cplx> work(grid.size());
  for (Eigen::Index k = 0; k < coefs.cols(); ++k) {
    std::fill(work.begin(), work.end(), cplx{});
    for (std::size_t a = 0; a < modes.size(); ++a) work[bin_of(modes[a], grid)] += coefs(a, k);
    fft::transform(work, shape, fft::Direction::backward);
    out.col(k) = Eigen::Map<Eigen::VectorXcd>(work.data(), static_cast<Eigen::Index>(work.size()));
  }
}

}  // namespace

TransverseBasis eigendecompose(const TransverseForms& forms, const TransverseMetric& metric) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      forms.stiffness, forms.mass, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ms(forms.mass, Eigen::EigenvaluesOnly);
    const auto ev = ms.eigenvalues();
    std::ostringstream msg;
    msg << "eigendecompose: generalized solver failed; mass eigenvalues in [" << ev.minCoeff() << ", "
        << ev.maxCoeff() << "], condition estimate " << ev.maxCoeff() / ev.minCoeff();
    throw std::runtime_error(msg.str());
  }
  const Eigen::VectorXd lam = solver.eigenvalues();
  const Eigen::MatrixXcd vec = solver.eigenvectors();
  const auto size = lam.size();
  const auto& modes = forms.modes;
  const Eigen::MatrixXcd& mass = forms.mass;

  TransverseBasis basis(TransverseBasis::Kind::galerkin, metric.grid());
  basis.fourier_modes_ = modes;
  basis.fourier_.resize(size, size);
  basis.density_ = metric.shared_density();

  Eigen::Index start = 0;
  while (start < size) {
    Eigen::Index end = start + 1;
    while (end < size && lam(end) - lam(end - 1) <= 1e-9 * (1.0 + std::abs(lam(end)))) ++end;
    const Eigen::Index m = end - start;
    Eigen::MatrixXcd v = vec.middleCols(start, m);

    // Rotate the group so that each vector is pinned to one Fourier index.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(v.transpose());
    std::vector<Eigen::Index> pick(m);
    for (Eigen::Index i = 0; i < m; ++i) pick[i] = qr.colsPermutation().indices()(i);
    std::sort(pick.begin(), pick.end(), [&](Eigen::Index x, Eigen::Index y) { return modes[x] < modes[y]; });
    Eigen::MatrixXcd pinned(m, m);
    for (Eigen::Index i = 0; i < m; ++i) pinned.row(i) = v.row(pick[i]);
    Eigen::MatrixXcd w = v * pinned.inverse();

    // M-orthonormalize in pick order.
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const cplx proj = (w.col(j).adjoint() * mass * w.col(i))(0, 0);
        w.col(i) -= proj * w.col(j);
      }
      const double nrm = std::sqrt(std::real((w.col(i).adjoint() * mass * w.col(i))(0, 0)));
      w.col(i) /= nrm;
      Eigen::Index dom = 0;
      w.col(i).cwiseAbs().maxCoeff(&dom);
      const cplx ph = w(dom, i) / std::abs(w(dom, i));
      w.col(i) *= std::conj(ph);
      basis.fourier_.col(start + i) = w.col(i);
      basis.eigenvalues_.push_back(lam(start + i));
      basis.dominant_.push_back(modes[dom]);
    }
    start = end;
  }
  basis.missing_lower_bound_ = size > 0 ? lam(size - 1) : 0.0;
  sample_fourier_columns(basis.fourier_, modes, metric.grid(), basis.samples_);
  return basis;
}

// ---------------------------------------------------------------------------

GridFunction TransverseBasis::eigenfunction(int k) const {
  std::vector<cplx> c(static_cast<std::size_t>(count()));
  c.at(static_cast<std::size_t>(k)) = 1.0;
  std::vector<cplx> v(grid_.size());
  synthesize(c, 1, v);
  return GridFunction(grid_, std::move(v), density_);
}

void TransverseBasis::analyze(std::span<const cplx> values, int slices, std::span<cplx> coefs) const {
  const std::size_t nodes = grid_.size();
  const auto kk = static_cast<std::size_t>(count());
  if (values.size() != nodes * slices || coefs.size() != kk * slices)
    throw std::invalid_argument("TransverseBasis::analyze: size mismatch");
  const double h = grid_.cell_weight();
  switch (kind_) {
    case Kind::plane_wave: {
      std::vector<cplx> work(values.begin(), values.end());
      std::vector<int> shape{slices};
      for (int a = 0; a < grid_.dim(); ++a) shape.push_back(grid_.points_per_axis());
      for (int a = 1; a <= grid_.dim(); ++a) fft::transform_axis(work, shape, a, fft::Direction::forward);
      const double scale = h / std::pow(kTwoPi, 0.5 * grid_.dim());
      for (int s = 0; s < slices; ++s)
        for (std::size_t k = 0; k < kk; ++k) coefs[s * kk + k] = work[s * nodes + bins_[k]] * scale;
      break;
    }
    case Kind::galerkin: {
      Eigen::Map<const Eigen::MatrixXcd> f(values.data(), static_cast<Eigen::Index>(nodes), slices);
      Eigen::Map<const Eigen::VectorXd> w(density_->data(), static_cast<Eigen::Index>(nodes));
      Eigen::Map<Eigen::MatrixXcd> c(coefs.data(), static_cast<Eigen::Index>(kk), slices);
      c.noalias() = samples_.adjoint() * ((w * h).asDiagonal() * f);
      break;
    }
    case Kind::separable: {
      std::vector<int> shape{slices};
      for (int a = 0; a < grid_.dim(); ++a) shape.push_back(grid_.points_per_axis());
      std::vector<cplx> work(values.begin(), values.end());
      for (int a = 0; a < grid_.dim(); ++a) {
        Eigen::Map<const Eigen::VectorXd> w(factor_weights_[a].data(),
                                            static_cast<Eigen::Index>(factor_weights_[a].size()));
        const Eigen::MatrixXcd op =
            factors_[a].adjoint() * (w * (kTwoPi / grid_.points_per_axis())).asDiagonal();
        work = apply_axis(work, shape, a + 1, op);
      }
      std::size_t block = 1;
      for (int a = 1; a <= grid_.dim(); ++a) block *= shape[a];
      for (int s = 0; s < slices; ++s)
        for (std::size_t k = 0; k < kk; ++k) {
          std::size_t idx = 0;
          for (int a = 0; a < grid_.dim(); ++a) idx = idx * shape[a + 1] + tuples_[k][a];
          coefs[s * kk + k] = work[s * block + idx];
        }
      break;
    }
  }
}

void TransverseBasis::synthesize(std::span<const cplx> coefs, int slices, std::span<cplx> values) const {
  const std::size_t nodes = grid_.size();
  const auto kk = static_cast<std::size_t>(count());
  if (values.size() != nodes * slices || coefs.size() != kk * slices)
    throw std::invalid_argument("TransverseBasis::synthesize: size mismatch");
  switch (kind_) {
    case Kind::plane_wave: {
      std::fill(values.begin(), values.end(), cplx{});
      const double scale = 1.0 / std::pow(kTwoPi, 0.5 * grid_.dim());
      for (int s = 0; s < slices; ++s)
        for (std::size_t k = 0; k < kk; ++k) values[s * nodes + bins_[k]] += coefs[s * kk + k] * scale;
      std::vector<int> shape{slices};
      for (int a = 0; a < grid_.dim(); ++a) shape.push_back(grid_.points_per_axis());
      for (int a = 1; a <= grid_.dim(); ++a) fft::transform_axis(values, shape, a, fft::Direction::backward);
      break;
    }
    case Kind::galerkin: {
      Eigen::Map<const Eigen::MatrixXcd> c(coefs.data(), static_cast<Eigen::Index>(kk), slices);
      Eigen::Map<Eigen::MatrixXcd> f(values.data(), static_cast<Eigen::Index>(nodes), slices);
      f.noalias() = samples_ * c;
      break;
    }
    case Kind::separable: {
      std::vector<int> shape{slices};
      std::size_t block = 1;
      for (const auto& fa : factors_) {
        shape.push_back(static_cast<int>(fa.cols()));
        block *= fa.cols();
      }
      std::vector<cplx> work(block * slices);
      for (int s = 0; s < slices; ++s)
        for (std::size_t k = 0; k < kk; ++k) {
          std::size_t idx = 0;
          for (int a = 0; a < grid_.dim(); ++a) idx = idx * shape[a + 1] + tuples_[k][a];
          work[s * block + idx] += coefs[s * kk + k];
        }
      for (int a = 0; a < grid_.dim(); ++a) work = apply_axis(work, shape, a + 1, factors_[a]);
      std::copy(work.begin(), work.end(), values.begin());
      break;
    }
  }
}

TransverseBasis TransverseBasis::subset(const std::vector<int>& indices) const {
  TransverseBasis out(kind_, grid_);
  out.density_ = density_;
  out.fourier_modes_ = fourier_modes_;
  out.factors_ = factors_;
  out.factor_weights_ = factor_weights_;
  std::vector<char> kept(static_cast<std::size_t>(count()), 0);
  if (kind_ == Kind::galerkin) {
    out.fourier_.resize(fourier_.rows(), static_cast<Eigen::Index>(indices.size()));
    out.samples_.resize(samples_.rows(), static_cast<Eigen::Index>(indices.size()));
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int k = indices[i];
    if (k < 0 || k >= count()) throw std::out_of_range("TransverseBasis::subset: index out of range");
    kept[k] = 1;
    out.eigenvalues_.push_back(eigenvalues_[k]);
    out.dominant_.push_back(dominant_[k]);
    if (kind_ == Kind::galerkin) {
      out.fourier_.col(static_cast<Eigen::Index>(i)) = fourier_.col(k);
      out.samples_.col(static_cast<Eigen::Index>(i)) = samples_.col(k);
    }
    if (kind_ == Kind::plane_wave) out.bins_.push_back(bins_[k]);
    if (kind_ == Kind::separable) out.tuples_.push_back(tuples_[k]);
  }
  out.missing_lower_bound_ = missing_lower_bound_;
  for (int k = 0; k < count(); ++k)
    if (!kept[k]) out.missing_lower_bound_ = std::min(out.missing_lower_bound_, eigenvalues_[k]);
  return out;
}

TransverseBasis TransverseBasis::truncated(int n) const {
  n = std::clamp(n, 0, count());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return subset(idx);
}

TransverseBasis TransverseBasis::below(double cut) const {
  int n = 0;
  while (n < count() && eigenvalues_[n] <= cut) ++n;
  return truncated(n);
}

TransverseBasis TransverseBasis::nearest_to(double target, int n) const {
  std::vector<int> idx(static_cast<std::size_t>(count()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(eigenvalues_[a] - target) < std::abs(eigenvalues_[b] - target);
  });
  idx.resize(static_cast<std::size_t>(std::clamp(n, 0, count())));
  std::sort(idx.begin(), idx.end());
  return subset(idx);
}

TransverseBasis TransverseBasis::plane_waves(const TorusGrid& grid, int count) {
  const int n = grid.points_per_axis();
  auto modes = box_modes(grid.dim(), n / 2 - 1);
  std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    const auto na = norm2(a), nb = norm2(b);
    return na != nb ? na < nb : a < b;
  });
  const std::size_t keep = count < 0 ? modes.size() : std::min<std::size_t>(count, modes.size());
  TransverseBasis basis(Kind::plane_wave, grid);
  basis.density_ = GridFunction::flat_weight(grid);
  for (std::size_t i = 0; i < keep; ++i) {
    basis.eigenvalues_.push_back(static_cast<double>(norm2(modes[i])));
    basis.dominant_.push_back(modes[i]);
    basis.bins_.push_back(bin_of(modes[i], grid));
  }
  const double beyond = static_cast<double>(n / 2) * (n / 2);
  basis.missing_lower_bound_ =
      keep < modes.size() ? std::min(beyond, static_cast<double>(norm2(modes[keep]))) : beyond;
  return basis;
}

TransverseBasis TransverseBasis::separable(const TransverseMetric& metric, int max_mode_1d) {
  if (!metric.is_separable()) throw std::invalid_argument("TransverseBasis::separable: metric not separable");
  const int d = metric.dim();
  std::vector<TransverseBasis> one_d;
  for (int a = 0; a < d; ++a) {
    auto factor = metric.separable_factor(a);
    one_d.push_back(eigendecompose(assemble_forms(factor, max_mode_1d, true), factor));
  }
  TransverseBasis basis(Kind::separable, metric.grid());
  basis.density_ = metric.shared_density();
  double missing = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) {
    basis.factors_.push_back(one_d[a].samples_);
    basis.factor_weights_.emplace_back(one_d[a].density_->begin(), one_d[a].density_->end());
    missing = std::min(missing, one_d[a].missing_lower_bound());
  }
  struct Entry {
    double lambda;
    std::vector<int> dominant;
    std::vector<int> tuple;
  };
  std::vector<Entry> all;
  std::vector<int> t(d, 0);
  while (true) {
    Entry e{0.0, {}, t};
    for (int a = 0; a < d; ++a) {
      e.lambda += one_d[a].eigenvalue(t[a]);
      e.dominant.push_back(one_d[a].dominant_index(t[a])[0]);
    }
    all.push_back(std::move(e));
    int a = d - 1;
    while (a >= 0 && t[a] == one_d[a].count() - 1) t[a--] = 0;
    if (a < 0) break;
    ++t[a];
  }
  std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    if (std::abs(x.lambda - y.lambda) > 1e-9 * (1.0 + std::abs(y.lambda))) return x.lambda < y.lambda;
    return x.dominant < y.dominant;
  });
  for (auto& e : all) {
    basis.eigenvalues_.push_back(e.lambda);
    basis.dominant_.push_back(std::move(e.dominant));
    basis.tuples_.push_back(std::move(e.tuple));
  }
  basis.missing_lower_bound_ = missing;
  return basis;
}

TransverseBasis solve_transverse(const TransverseMetric& metric, const TransverseOptions& options) {
  if (metric.is_flat()) {
    auto all = TransverseBasis::plane_waves(metric.grid());
    std::vector<int> keep;
    for (int k = 0; k < all.count() && static_cast<int>(keep.size()) < options.count; ++k) {
      const auto& w = all.dominant_index(k);
      if (std::all_of(w.begin(), w.end(), [&](int v) { return std::abs(v) <= options.max_mode; }))
        keep.push_back(k);
    }
    return all.subset(keep);
  }
  if (metric.is_separable() && options.grid_quadrature)
    return TransverseBasis::separable(metric, options.max_mode).truncated(options.count);
  return eigendecompose(assemble_forms(metric, options.max_mode, options.grid_quadrature), metric)
      .truncated(options.count);
}

std::vector<std::pair<long long, int>> flat_spectrum(int dim, long long cut) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("flat_spectrum: dimension must be 1 or 2");
  if (cut < 0 || cut > 25'000'000LL) throw std::invalid_argument("flat_spectrum: cut out of range");
  std::vector<int> mult(static_cast<std::size_t>(cut) + 1, 0);
  const auto r = static_cast<long long>(std::sqrt(static_cast<double>(cut))) + 1;
  if (dim == 1) {
    for (long long a = -r; a <= r; ++a)
      if (a * a <= cut) ++mult[a * a];
  } else {
    for (long long a = -r; a <= r; ++a)
      for (long long b = -r; b <= r; ++b)
        if (a * a + b * b <= cut) ++mult[a * a + b * b];
  }
  std::vector<std::pair<long long, int>> out;
  for (long long v = 0; v <= cut; ++v)
    if (mult[v] > 0) out.emplace_back(v, mult[v]);
  return out;
}

}  // namespace bloch
