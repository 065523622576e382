#include "bloch/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bloch/fft.hpp"
#include "bloch/resolvent.hpp"

namespace bloch {

ShiftParameters ShiftParameters::thomas(int dim, double tau) {
  ShiftParameters s;
  s.theta.assign(static_cast<std::size_t>(dim), cplx{});
  s.theta[0] = cplx(0.5, tau);
  s.tau = tau;
  return s;
}

ShiftParameters ShiftParameters::real(std::span<const double> theta) {
  ShiftParameters s;
  for (double t : theta) s.theta.emplace_back(t, 0.0);
  return s;
}

// ---------------------------------------------------------------------------

FullMetric::FullMetric(const TorusGrid& grid, ScalarField conformal, TransverseMetric transverse)
    : grid_(grid), conformal_(std::move(conformal)), transverse_(std::move(transverse)) {
  if (grid_.dim() < 2) throw std::invalid_argument("FullMetric: dimension must be >= 2");
  if (!(transverse_.grid() == grid_.transverse()))
    throw std::invalid_argument("FullMetric: transverse metric sampled on a different grid");
  if (conformal_.poly.dim() != grid_.dim())
    throw std::invalid_argument("FullMetric: conformal factor dimension mismatch");
  c_ = conformal_.sample(grid_);
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (!(c_[i] > 0.0)) {
      std::ostringstream msg;
      msg << "FullMetric: conformal factor c = " << c_[i] << " is not positive at node " << i;
      throw std::domain_error(msg.str());
    }
  product_ = conformal_.is_identically_one();
  const int n = grid_.dim();
  const auto rho0 = transverse_.density();
  const std::size_t slice = rho0.size();
  auto rho = std::make_shared<std::vector<double>>(grid_.size());
  for (std::size_t i = 0; i < rho->size(); ++i) (*rho)[i] = std::pow(c_[i], 0.5 * n) * rho0[i % slice];
  density_ = rho;
}

FullMetric FullMetric::flat(const TorusGrid& grid) {
  return FullMetric(grid, ScalarField::one(grid.dim()), TransverseMetric::flat(grid.transverse()));
}

double FullMetric::inverse(std::size_t node, int a, int b) const {
  const double ic = 1.0 / c_[node];
  if (a == 0 || b == 0) return a == b ? ic : 0.0;
  return ic * transverse_.inverse(node % transverse_.grid().size())(a - 1, b - 1);
}

int FullMetric::bandwidth() const {
  if (is_flat()) return 0;
  if (transverse_.is_flat() && dim() == 2) return conformal_.bandwidth();
  return -1;
}

FullMetric FullMetric::product_part() const {
  return FullMetric(grid_, ScalarField::one(dim()), transverse_);
}

// ---------------------------------------------------------------------------

namespace {

// Per-node inverse metric, row-major n x n blocks.
std::vector<double> inverse_table(const FullMetric& metric) {
  const int n = metric.dim();
  const std::size_t nodes = metric.grid().size();
  const std::size_t slice = metric.transverse().grid().size();
  std::vector<Eigen::MatrixXd> g0inv(slice);
  for (std::size_t t = 0; t < slice; ++t) g0inv[t] = metric.transverse().inverse(t);
  const auto c = metric.conformal();
  std::vector<double> out(nodes * n * n, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    double* g = out.data() + i * n * n;
    const double ic = 1.0 / c[i];
    g[0] = ic;
    const auto& m = g0inv[i % slice];
    for (int a = 1; a < n; ++a)
      for (int b = 1; b < n; ++b) g[a * n + b] = ic * m(a - 1, b - 1);
  }
  return out;
}

// Normalized forward DFT: F^(m) = mean F e^{-i m.x}, indexed by DFT bins.
std::vector<cplx> mean_spectrum(std::vector<cplx> f, const TorusGrid& grid) {
  const auto shape = grid.shape();
  fft::transform(f, shape, fft::Direction::forward);
  const double s = 1.0 / static_cast<double>(grid.size());
  for (auto& v : f) v *= s;
  return f;
}

std::size_t bin_of(const TorusGrid& grid, std::span<const int> m) {
  const int n = grid.points_per_axis();
  std::size_t idx = 0;
  for (int a = 0; a < grid.dim(); ++a) idx = idx * n + fft::bin(m[a], n);
  return idx;
}

}  // namespace

Eigen::VectorXcd FloquetMatrix::eigenvalues() const {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("FloquetMatrix: eigensolver failed");
  std::vector<cplx> v(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > 1e-12 * (1.0 + std::abs(a.real()))) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd FloquetMatrix::hermitian_eigenvalues() const {
  const Eigen::MatrixXcd h = 0.5 * (op + op.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

FloquetMatrix build_floquet_matrix(const FullMetric& metric, const Potential& q,
                                   std::span<const cplx> theta, std::span<const int> half_width) {
  const TorusGrid& grid = metric.grid();
  const int n = grid.dim();
  const int N = grid.points_per_axis();
  if (static_cast<int>(theta.size()) != n || static_cast<int>(half_width.size()) != n)
    throw std::invalid_argument("build_floquet_matrix: theta and half widths must have one entry per axis");
  int wmax = 0;
  for (int w : half_width) {
    if (w < 0) throw std::invalid_argument("build_floquet_matrix: negative half width");
    wmax = std::max(wmax, w);
  }
  const int bw_metric = metric.bandwidth();
  const int bw_q = q.bandwidth();
  if (bw_metric >= 0 && bw_q >= 0) {
    const int bw = std::max(bw_metric, bw_q);
    if (N < 2 * (2 * wmax + bw)) {
      std::ostringstream msg;
      msg << "build_floquet_matrix: N = " << N << " under-resolves half width " << wmax
          << " with coefficient bandwidth " << bw << " (need N >= " << 2 * (2 * wmax + bw) << ")";
      throw std::invalid_argument(msg.str());
    }
  } else if (2 * wmax > N / 2 - 1) {
    std::ostringstream msg;
    msg << "build_floquet_matrix: mode differences up to " << 2 * wmax << " exceed the grid limit "
        << N / 2 - 1;
    throw std::invalid_argument(msg.str());
  }

  std::vector<int> center(n);
  for (int a = 0; a < n; ++a) center[a] = -static_cast<int>(std::floor(theta[a].real() + 0.5));

  FloquetMatrix fm;
  {
    std::vector<int> m(n);
    std::vector<int> off(n, 0);
    for (int a = 0; a < n; ++a) off[a] = -half_width[a];
    while (true) {
      for (int a = 0; a < n; ++a) m[a] = center[a] + off[a];
      fm.modes.push_back(m);
      int a = n - 1;
      while (a >= 0 && off[a] == half_width[a]) {
        off[a] = -half_width[a];
        --a;
      }
      if (a < 0) break;
      ++off[a];
    }
  }

  const auto rho = metric.density();
  const auto ginv = inverse_table(metric);
  const std::vector<double> qs = q.sample(grid);
  const std::size_t nodes = grid.size();
  std::vector<std::vector<cplx>> G(static_cast<std::size_t>(n * n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      std::vector<cplx> f(nodes);
      for (std::size_t i = 0; i < nodes; ++i) f[i] = rho[i] * ginv[i * n * n + a * n + b];
      G[a * n + b] = mean_spectrum(std::move(f), grid);
      if (b != a) G[b * n + a] = G[a * n + b];
    }
  std::vector<cplx> rq(nodes), r(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    rq[i] = qs[i] * rho[i];
    r[i] = rho[i];
  }
  rq = mean_spectrum(std::move(rq), grid);
  r = mean_spectrum(std::move(r), grid);

  const double vol = grid.volume();
  const auto size = static_cast<Eigen::Index>(fm.modes.size());
  fm.form.resize(size, size);
  fm.mass.resize(size, size);
  std::vector<int> d(n);
  std::vector<cplx> sa(n), sb(n);
  for (Eigen::Index ia = 0; ia < size; ++ia) {
    const auto& ma = fm.modes[ia];
    for (int a = 0; a < n; ++a) sa[a] = static_cast<double>(ma[a]) + theta[a];
    for (Eigen::Index ib = 0; ib < size; ++ib) {
      const auto& mb = fm.modes[ib];
      for (int a = 0; a < n; ++a) {
        sb[a] = static_cast<double>(mb[a]) + theta[a];
        d[a] = ma[a] - mb[a];  // int F e^{i (mb - ma) x} = vol F^(ma - mb)
      }
      const std::size_t k = bin_of(grid, d);
      cplx s = rq[k];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += sa[a] * sb[b] * G[a * n + b][k];
      fm.form(ia, ib) = vol * s;
      fm.mass(ia, ib) = vol * r[k];
    }
  }
  const Eigen::MatrixXcd mass_h = 0.5 * (fm.mass + fm.mass.adjoint());
  Eigen::LLT<Eigen::MatrixXcd> llt(mass_h);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_floquet_matrix: mass matrix is not positive definite");
  const Eigen::MatrixXcd L = llt.matrixL();
  Eigen::MatrixXcd t = L.triangularView<Eigen::Lower>().solve(fm.form);
  fm.op = L.triangularView<Eigen::Lower>().solve(t.adjoint()).adjoint();
  return fm;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<cplx>> gradient(std::span<const cplx> u, const TorusGrid& grid) {
  const auto shape = grid.shape();
  std::vector<std::vector<cplx>> out;
  for (int a = 0; a < grid.dim(); ++a) out.push_back(fft::derivative(u, shape, a));
  return out;
}

void check_sizes(const TorusGrid& grid, std::size_t got, const char* what) {
  if (got != grid.size()) {
    std::ostringstream msg;
    msg << what << ": expected " << grid.size() << " samples, got " << got;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

cplx evaluate_form(const GridFunction& u, const GridFunction& v, const FullMetric& metric,
                   std::span<const double> q, std::span<const cplx> theta) {
  const TorusGrid& grid = metric.grid();
  const int n = grid.dim();
  if (!(u.grid() == grid) || !(v.grid() == grid))
    throw std::invalid_argument("evaluate_form: grid mismatch");
  check_sizes(grid, q.size(), "evaluate_form");
  if (static_cast<int>(theta.size()) != n) throw std::invalid_argument("evaluate_form: theta size");
  const auto du = gradient(u.values(), grid);
  const auto dv = gradient(v.values(), grid);
  const auto ginv = inverse_table(metric);
  const auto rho = metric.density();
  std::vector<cplx> left(n), right(n);
  cplx s{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx ui = u.values()[i], vi = std::conj(v.values()[i]);
    for (int a = 0; a < n; ++a) {
      left[a] = cplx(0.0, -1.0) * du[a][i] + theta[a] * ui;
      right[a] = cplx(0.0, 1.0) * std::conj(dv[a][i]) + theta[a] * vi;
    }
    cplx t = q[i] * ui * vi;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) t += ginv[i * n * n + a * n + b] * left[b] * right[a];
    s += rho[i] * t;
  }
  return s * grid.cell_weight();
}

double h1_norm_squared(const GridFunction& u, const FullMetric& metric) {
  const TorusGrid& grid = metric.grid();
  const int n = grid.dim();
  if (!(u.grid() == grid)) throw std::invalid_argument("h1_norm_squared: grid mismatch");
  const auto du = gradient(u.values(), grid);
  const auto ginv = inverse_table(metric);
  const auto rho = metric.density();
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double t = std::norm(u.values()[i]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) t += ginv[i * n * n + a * n + b] * std::real(du[b][i] * std::conj(du[a][i]));
    s += rho[i] * t;
  }
  return s * grid.cell_weight();
}

CoercivityResult coercivity_scan(const FullMetric& metric, std::span<const double> q,
                                 std::span<const cplx> theta, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("coercivity_scan: samples must be >= 1");
  const TorusGrid& grid = metric.grid();
  check_sizes(grid, q.size(), "coercivity_scan");
  const int N = grid.points_per_axis();
  const int max_degree = std::max(1, N / 4 - 1);
  bool zero_theta = true;
  for (const auto& t : theta) zero_theta = zero_theta && t == cplx{};

  CoercivityResult res;
  res.c0 = zero_theta ? 1.0 : 0.5;
  res.samples = samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> degree(0, max_degree);
  const auto shape = grid.shape();
  const auto weight = metric.shared_density();
  std::vector<double> ratios(static_cast<std::size_t>(samples));
  std::vector<double> re_h(ratios.size()), h1(ratios.size()), l2(ratios.size());
  for (int s = 0; s < samples; ++s) {
    const int deg = degree(rng);
    std::vector<cplx> spec(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.multi_index(i);
      bool inside = true;
      for (int v : idx) inside = inside && std::abs(fft::wavenumber(v, N)) <= deg;
      if (inside) spec[i] = cplx(normal(rng), normal(rng));
    }
    fft::transform(spec, shape, fft::Direction::backward);
    const GridFunction u(grid, std::move(spec), weight);
    const double n2 = std::pow(lebesgue_norm(u, 2.0), 2);
    re_h[s] = evaluate_form(u, u, metric, q, theta).real();
    h1[s] = h1_norm_squared(u, metric);
    l2[s] = n2;
    ratios[s] = (res.c0 * h1[s] - re_h[s]) / n2;
  }
  const double worst = *std::max_element(ratios.begin(), ratios.end());
  const double slack = 1e-9 * (1.0 + std::abs(worst));
  res.c1 = std::ceil((worst - slack) * 1024.0) / 1024.0;
  res.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < ratios.size(); ++s)
    res.worst_margin = std::min(res.worst_margin, (re_h[s] - res.c0 * h1[s]) / l2[s] + res.c1);
  return res;
}

// ---------------------------------------------------------------------------

std::vector<cplx> laplace_beltrami(const FullMetric& metric, std::span<const cplx> f) {
  const TorusGrid& grid = metric.grid();
  const int n = grid.dim();
  check_sizes(grid, f.size(), "laplace_beltrami");
  const auto shape = grid.shape();
  const auto df = gradient(f, grid);
  const auto ginv = inverse_table(metric);
  const auto rho = metric.density();
  std::vector<cplx> out(grid.size());
  std::vector<cplx> flux(grid.size());
  for (int a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      cplx t{};
      for (int b = 0; b < n; ++b) t += ginv[i * n * n + a * n + b] * df[b][i];
      flux[i] = rho[i] * t;
    }
    const auto dflux = fft::derivative(flux, shape, a);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] += dflux[i];
  }
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] /= rho[i];
  return out;
}

std::vector<double> conformal_potential(const FullMetric& metric, std::span<const double> q) {
  const TorusGrid& grid = metric.grid();
  check_sizes(grid, q.size(), "conformal_potential");
  const double n = grid.dim();
  const auto c = metric.conformal();
  std::vector<cplx> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(c[i], -(n - 2.0) / 4.0);
  const auto lw = laplace_beltrami(metric, w);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = c[i] * q[i] - std::pow(c[i], (n + 2.0) / 4.0) * lw[i].real();
  return out;
}

double verify_conformal_identity(const FullMetric& metric, std::span<const double> q, const GridFunction& u) {
  const TorusGrid& grid = metric.grid();
  check_sizes(grid, q.size(), "verify_conformal_identity");
  if (!(u.grid() == grid)) throw std::invalid_argument("verify_conformal_identity: grid mismatch");
  const double n = grid.dim();
  const auto c = metric.conformal();
  std::vector<cplx> wu(grid.size());
  for (std::size_t i = 0; i < wu.size(); ++i) wu[i] = std::pow(c[i], -(n - 2.0) / 4.0) * u.values()[i];
  const auto lhs_lap = laplace_beltrami(metric, wu);
  const FullMetric tilde = metric.product_part();
  const auto rhs_lap = laplace_beltrami(tilde, u.values());
  const auto qc = conformal_potential(metric, q);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < wu.size(); ++i) {
    const cplx lhs = std::pow(c[i], (n + 2.0) / 4.0) * (-lhs_lap[i] + q[i] * wu[i]);
    const cplx rhs = -rhs_lap[i] + qc[i] * u.values()[i];
    num += std::norm(lhs - rhs);
    den += std::norm(u.values()[i]);
  }
  if (den == 0.0) throw std::invalid_argument("verify_conformal_identity: u vanishes");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------

TensorModeOperator::TensorModeOperator(ModeSpace inner, int padding, double tau, std::span<const double> q,
                                       const TorusGrid& grid)
    : inner_(std::move(inner)),
      padded_(inner_.j_min() - padding, inner_.j_max() + padding, inner_.shared_basis()),
      padding_(padding),
      tau_(tau) {
  if (padding < 0) throw std::invalid_argument("TensorModeOperator: padding must be >= 0");
  if (!(grid.transverse() == inner_.basis().grid()))
    throw std::invalid_argument("TensorModeOperator: transverse grid mismatch");
  check_sizes(grid, q.size(), "TensorModeOperator");
  const int N = grid.points_per_axis();
  const std::size_t slice = grid.size() / N;
  for (double v : q) zero_q_ = zero_q_ && v == 0.0;
  if (zero_q_) return;

  std::vector<cplx> spec = to_complex(q);
  const auto shape = grid.shape();
  fft::transform_axis(spec, shape, 0, fft::Direction::forward);
  for (auto& v : spec) v /= static_cast<double>(N);

  max_delta_ = std::min(N / 2 - 1, padded_.j_max() - inner_.j_min());
  double scale = 0.0;
  for (const auto& v : spec) scale = std::max(scale, std::abs(v));
  for (int delta = -max_delta_; delta <= max_delta_ && x1_only_; ++delta) {
    const std::size_t b = fft::bin(delta, N) * slice;
    for (std::size_t t = 1; t < slice; ++t)
      if (std::abs(spec[b + t] - spec[b]) > 1e-14 * scale) {
        x1_only_ = false;
        break;
      }
  }
  const int K = inner_.k_count();
  scalars_.assign(2 * max_delta_ + 1, cplx{});
  if (x1_only_) {
    for (int delta = -max_delta_; delta <= max_delta_; ++delta)
      scalars_[delta + max_delta_] = spec[fft::bin(delta, N) * slice];
    return;
  }
  std::vector<cplx> identity(static_cast<std::size_t>(K) * K);
  for (int k = 0; k < K; ++k) identity[static_cast<std::size_t>(k) * K + k] = 1.0;
  std::vector<cplx> psi(slice * K);
  inner_.basis().synthesize(identity, K, psi);
  blocks_.resize(2 * max_delta_ + 1);
  std::vector<cplx> work(slice * K), coefs(static_cast<std::size_t>(K) * K);
  for (int delta = -max_delta_; delta <= max_delta_; ++delta) {
    const std::size_t b = fft::bin(delta, N) * slice;
    for (int kc = 0; kc < K; ++kc)
      for (std::size_t t = 0; t < slice; ++t) work[kc * slice + t] = spec[b + t] * psi[kc * slice + t];
    inner_.basis().analyze(work, K, coefs);
    // column kc of the block holds the coefficients of q_delta psi_kc
    Eigen::MatrixXcd block(K, K);
    for (int kc = 0; kc < K; ++kc)
      for (int kr = 0; kr < K; ++kr) block(kr, kc) = coefs[static_cast<std::size_t>(kc) * K + kr];
    blocks_[delta + max_delta_] = std::move(block);
  }
}

cplx TensorModeOperator::coupling(int delta, int k_row, int k_col) const {
  if (zero_q_ || std::abs(delta) > max_delta_) return {};
  if (x1_only_) return k_row == k_col ? scalars_[delta + max_delta_] : cplx{};
  return blocks_[delta + max_delta_](k_row, k_col);
}

Eigen::MatrixXcd TensorModeOperator::matrix() const {
  const auto rows = static_cast<Eigen::Index>(padded_.size());
  const auto cols = static_cast<Eigen::Index>(inner_.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
  const int K = inner_.k_count();
  for (int j = padded_.j_min(); j <= padded_.j_max(); ++j)
    for (int jc = inner_.j_min(); jc <= inner_.j_max(); ++jc) {
      const int delta = j - jc;
      const auto r0 = static_cast<Eigen::Index>(padded_.index(j, 0));
      const auto c0 = static_cast<Eigen::Index>(inner_.index(jc, 0));
      if (!zero_q_ && std::abs(delta) <= max_delta_) {
        if (x1_only_) {
          const cplx s = scalars_[delta + max_delta_];
          for (int k = 0; k < K; ++k) m(r0 + k, c0 + k) += s;
        } else {
          m.block(r0, c0, K, K) += blocks_[delta + max_delta_];
        }
      }
      if (delta == 0)
        for (int k = 0; k < K; ++k) m(r0 + k, c0 + k) += mu(j, inner_.lambda(k), tau_);
    }
  return m;
}

double TensorModeOperator::sigma_min() const {
  const int K = inner_.k_count();
  if (zero_q_) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = inner_.j_min(); j <= inner_.j_max(); ++j)
      for (int k = 0; k < K; ++k) best = std::min(best, std::abs(mu(j, inner_.lambda(k), tau_)));
    return best;
  }
  if (x1_only_) {
    const int rows = padded_.j_count(), cols = inner_.j_count();
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
          const int j = padded_.j_min() + r, jc = inner_.j_min() + c;
          const int delta = j - jc;
          if (std::abs(delta) <= max_delta_) m(r, c) = scalars_[delta + max_delta_];
          if (delta == 0) m(r, c) += mu(j, inner_.lambda(k), tau_);
        }
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
      best = std::min(best, svd.singularValues()(cols - 1));
    }
    return best;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(matrix());
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

ModeCoefficients TensorModeOperator::apply(const ModeCoefficients& u) const {
  if (!(u.space() == inner_)) throw std::invalid_argument("TensorModeOperator::apply: space mismatch");
  ModeCoefficients out(padded_);
  const int K = inner_.k_count();
  for (int j = padded_.j_min(); j <= padded_.j_max(); ++j) {
    for (int jc = inner_.j_min(); jc <= inner_.j_max(); ++jc) {
      const int delta = j - jc;
      if (delta == 0)
        for (int k = 0; k < K; ++k) out(j, k) += mu(j, inner_.lambda(k), tau_) * u(jc, k);
      if (zero_q_ || std::abs(delta) > max_delta_) continue;
      for (int kr = 0; kr < K; ++kr) {
        if (x1_only_) {
          out(j, kr) += scalars_[delta + max_delta_] * u(jc, kr);
          continue;
        }
        cplx s{};
        for (int kc = 0; kc < K; ++kc) s += blocks_[delta + max_delta_](kr, kc) * u(jc, kc);
        out(j, kr) += s;
      }
    }
  }
  return out;
}

}  // namespace bloch
