#include "bloch/gelfand.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace bloch {

namespace {

std::size_t power(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

// Digits of `index` in base `base`, most significant first.
std::vector<int> digits(std::size_t index, int base, int count) {
  std::vector<int> d(count);
  for (int a = count - 1; a >= 0; --a) {
    d[a] = static_cast<int>(index % base);
    index /= base;
  }
  return d;
}

std::size_t class_index(std::span<const int> label, int cells) {
  std::size_t idx = 0;
  for (int l : label) idx = idx * cells + fft::bin(l, cells);
  return idx;
}

std::vector<cplx> roots_of_unity(int cells) {
  std::vector<cplx> w(cells);
  for (int m = 0; m < cells; ++m) w[m] = std::polar(1.0, -kTwoPi * m / cells);
  return w;
}

double sup_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_fiber(const BlochField& v, const BlochFiber& f) {
  if (static_cast<int>(f.label.size()) != v.cell.dim())
    throw std::invalid_argument("BlochField: fiber label has the wrong dimension");
  if (f.values.size() != v.cell.size())
    throw std::invalid_argument("BlochField: fiber sample count does not match the cell grid");
}

// Index of the first representative of every class.
std::vector<std::size_t> representatives(const BlochField& v) {
  if (v.cells < 1) throw std::invalid_argument("BlochField: cells must be >= 1");
  const std::size_t classes = power(v.cells, v.cell.dim());
  std::vector<std::size_t> first(classes, v.fibers.size());
  for (std::size_t i = 0; i < v.fibers.size(); ++i) {
    check_fiber(v, v.fibers[i]);
    const std::size_t c = class_index(v.fibers[i].label, v.cells);
    if (first[c] == v.fibers.size()) first[c] = i;
  }
  for (std::size_t c = 0; c < classes; ++c)
    if (first[c] == v.fibers.size()) {
      std::ostringstream os;
      os << "BlochField: no fiber for theta class l = (";
      const auto l = digits(c, v.cells, v.cell.dim());
      for (std::size_t a = 0; a < l.size(); ++a) os << (a ? "," : "") << l[a];
      os << ") / " << v.cells;
      throw std::invalid_argument(os.str());
    }
  return first;
}

}  // namespace

SupercellFunction::SupercellFunction(int cells, TorusGrid cell, std::vector<cplx> values)
    : cells_(cells), cell_(std::move(cell)), values_(std::move(values)) {
  if (cells_ < 1) throw std::invalid_argument("SupercellFunction: cells must be >= 1");
  if (values_.size() != power(cells_ * cell_.points_per_axis(), cell_.dim()))
    throw std::invalid_argument("SupercellFunction: expected (P N)^n samples");
  for (const auto& x : values_)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw std::domain_error("SupercellFunction: non-finite sample");
}

SupercellFunction SupercellFunction::zeros(int cells, TorusGrid cell) {
  const std::size_t n = power(cells * cell.points_per_axis(), cell.dim());
  return SupercellFunction(cells, std::move(cell), std::vector<cplx>(n));
}

std::size_t SupercellFunction::node(std::span<const int> k, std::span<const int> i) const {
  const int n = cell_.points_per_axis();
  const int side = points_per_axis();
  std::size_t idx = 0;
  for (int a = 0; a < cell_.dim(); ++a) idx = idx * side + static_cast<std::size_t>(k[a] * n + i[a]);
  return idx;
}

double SupercellFunction::norm_squared() const {
  double s = 0.0;
  for (const auto& x : values_) s += std::norm(x);
  return s * cell_.cell_weight();
}

SupercellFunction random_supercell(int cells, const TorusGrid& cell, std::uint64_t seed, bool resolved) {
  auto u = SupercellFunction::zeros(cells, cell);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto& v = u.mutable_values();
  for (auto& x : v) x = cplx(nd(rng), nd(rng));
  if (!resolved) return u;
  const auto shape = u.shape();
  const int side = u.points_per_axis();
  const int limit = cells * (cell.points_per_axis() / 2 - 1);
  fft::transform(v, shape, fft::Direction::forward);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto idx = digits(i, side, cell.dim());
    bool keep = true;
    for (int b : idx) keep = keep && std::abs(fft::wavenumber(b, side)) <= limit;
    v[i] = keep ? v[i] / static_cast<double>(v.size()) : cplx{};
  }
  fft::transform(v, shape, fft::Direction::backward);
  return u;
}

std::vector<double> BlochField::theta(const BlochFiber& f) const {
  std::vector<double> t(f.label.size());
  for (std::size_t a = 0; a < t.size(); ++a) t[a] = static_cast<double>(f.label[a]) / cells;
  return t;
}

double BlochField::norm_squared() const {
  const auto first = representatives(*this);
  double s = 0.0;
  for (std::size_t i : first)
    for (const auto& x : fibers[i].values) s += std::norm(x);
  return s * cell.cell_weight() / static_cast<double>(first.size());
}

BlochField gelfand_forward(const SupercellFunction& u) {
  const TorusGrid& cell = u.cell_grid();
  const int n = cell.dim();
  const int P = u.cells();
  const std::size_t classes = power(P, n);
  const auto w = roots_of_unity(P);
  BlochField out{P, cell, {}};
  out.fibers.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    BlochFiber& f = out.fibers[c];
    f.label = digits(c, P, n);
    f.values.assign(cell.size(), cplx{});
    const auto theta = out.theta(f);
    for (std::size_t node = 0; node < cell.size(); ++node) {
      const auto i = cell.multi_index(node);
      double phase = 0.0;
      for (int a = 0; a < n; ++a) phase += cell.coordinate(node, a) * theta[a];
      cplx s{};
      for (std::size_t kc = 0; kc < classes; ++kc) {
        const auto k = digits(kc, P, n);
        int kl = 0;
        for (int a = 0; a < n; ++a) kl += k[a] * f.label[a];
        s += w[fft::bin(kl, P)] * u.values()[u.node(k, i)];
      }
      f.values[node] = std::polar(1.0, -phase) * s;
    }
  }
  return out;
}

double quasiperiodicity_violation(const BlochField& v) {
  const auto first = representatives(v);
  const int n = v.cell.dim();
  double worst = 0.0;
  for (const auto& f : v.fibers) {
    const BlochFiber& ref = v.fibers[first[class_index(f.label, v.cells)]];
    if (&ref == &f) continue;
    std::vector<int> shift(n);
    for (int a = 0; a < n; ++a) shift[a] = (f.label[a] - ref.label[a]) / v.cells;
    const double scale = std::max(sup_abs(ref.values), sup_abs(f.values));
    if (scale == 0.0) continue;
    double d = 0.0;
    for (std::size_t node = 0; node < v.cell.size(); ++node) {
      double phase = 0.0;
      for (int a = 0; a < n; ++a) phase += v.cell.coordinate(node, a) * shift[a];
      d = std::max(d, std::abs(f.values[node] - std::polar(1.0, -phase) * ref.values[node]));
    }
    worst = std::max(worst, d / scale);
  }
  return worst;
}

SupercellFunction gelfand_inverse(const BlochField& v, double tolerance) {
  const double violation = quasiperiodicity_violation(v);
  if (violation > tolerance) {
    std::ostringstream os;
    os << "gelfand_inverse: fibers are not quasiperiodic (max relative violation " << violation << ")";
    throw std::invalid_argument(os.str());
  }
  const auto first = representatives(v);
  const TorusGrid& cell = v.cell;
  const int n = cell.dim();
  const int P = v.cells;
  const std::size_t classes = first.size();
  auto u = SupercellFunction::zeros(P, cell);
  auto& out = u.mutable_values();
  const auto w = roots_of_unity(P);
  const double norm = 1.0 / static_cast<double>(classes);
  for (std::size_t node = 0; node < cell.size(); ++node) {
    const auto i = cell.multi_index(node);
    for (std::size_t kc = 0; kc < classes; ++kc) {
      const auto k = digits(kc, P, n);
      cplx s{};
      for (std::size_t idx : first) {
        const BlochFiber& f = v.fibers[idx];
        double phase = 0.0;
        int kl = 0;
        for (int a = 0; a < n; ++a) {
          phase += cell.coordinate(node, a) * f.label[a] / P;
          kl += k[a] * f.label[a];
        }
        s += std::conj(w[fft::bin(kl, P)]) * std::polar(1.0, phase) * f.values[node];
      }
      out[u.node(k, i)] = s * norm;
    }
  }
  return u;
}

BlochFiber shifted_representative(const BlochField& v, const BlochFiber& fiber, int axis) {
  check_fiber(v, fiber);
  if (axis < 0 || axis >= v.cell.dim()) throw std::invalid_argument("shifted_representative: bad axis");
  BlochFiber out = fiber;
  out.label[axis] += v.cells;
  for (std::size_t node = 0; node < v.cell.size(); ++node)
    out.values[node] *= std::polar(1.0, -v.cell.coordinate(node, axis));
  return out;
}

double derivative_commutation_residual(const SupercellFunction& u, int axis) {
  const TorusGrid& cell = u.cell_grid();
  if (axis < 0 || axis >= cell.dim()) throw std::invalid_argument("derivative_commutation_residual: bad axis");
  const auto shape = u.shape();
  auto du = fft::derivative(u.values(), shape, axis, u.cells());
  for (auto& x : du) x *= cplx(0.0, -1.0);
  const BlochField uu = gelfand_forward(u);
  const BlochField udu = gelfand_forward(SupercellFunction(u.cells(), cell, std::move(du)));
  const auto cell_shape = cell.shape();
  double worst = 0.0, scale = 0.0;
  for (std::size_t c = 0; c < uu.fibers.size(); ++c) {
    const auto& v = uu.fibers[c].values;
    const double theta = uu.theta(uu.fibers[c])[axis];
    const auto dv = fft::derivative(v, cell_shape, axis);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cplx lhs = cplx(0.0, -1.0) * dv[i];
      const cplx rhs = udu.fibers[c].values[i] - theta * v[i];
      worst = std::max(worst, std::abs(lhs - rhs));
      scale = std::max(scale, std::abs(udu.fibers[c].values[i]));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

DirectIntegralCheck direct_integral_check(const SupercellFunction& u, const FullMetric& metric,
                                          std::span<const double> q) {
  const TorusGrid& cell = u.cell_grid();
  if (!(metric.grid() == cell)) throw std::invalid_argument("direct_integral_check: metric grid mismatch");
  if (q.size() != cell.size()) throw std::invalid_argument("direct_integral_check: potential size mismatch");
  const int n = cell.dim();
  const int N = cell.points_per_axis();
  const int side = u.points_per_axis();
  const auto shape = u.shape();
  std::vector<std::vector<cplx>> grad(n);
  for (int a = 0; a < n; ++a) grad[a] = fft::derivative(u.values(), shape, a, u.cells());
  const auto rho = metric.density();

  DirectIntegralCheck out;
  cplx s{};
  for (std::size_t i = 0; i < u.values().size(); ++i) {
    const auto idx = digits(i, side, n);
    std::vector<int> folded(n);
    for (int a = 0; a < n; ++a) folded[a] = idx[a] % N;
    const std::size_t c = cell.node(folded);
    cplx t = q[c] * std::norm(u.values()[i]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) t += metric.inverse(c, a, b) * grad[b][i] * std::conj(grad[a][i]);
    s += rho[c] * t;
  }
  out.supercell_form = s * cell.cell_weight();

  const BlochField v = gelfand_forward(u);
  cplx avg{};
  for (const auto& f : v.fibers) {
    const GridFunction g(cell, f.values);
    const auto theta = v.theta(f);
    const std::vector<cplx> th(theta.begin(), theta.end());
    avg += evaluate_form(g, g, metric, q, th);
  }
  out.fiber_average = avg / static_cast<double>(v.fibers.size());
  const double ref = std::abs(out.supercell_form);
  out.residual = std::abs(out.supercell_form - out.fiber_average) / (ref > 0.0 ? ref : 1.0);
  return out;
}

std::vector<BandRow> band_structure(const FullMetric& metric, const Potential& q,
                                    const std::vector<std::vector<double>>& path, int bands,
                                    std::span<const int> half_width, int threads) {
  if (bands < 1) throw std::invalid_argument("band_structure: bands must be >= 1");
  for (const auto& t : path)
    if (static_cast<int>(t.size()) != metric.dim())
      throw std::invalid_argument("band_structure: theta has the wrong dimension");
  std::vector<BandRow> rows(path.size());
  detail::parallel_for(static_cast<int>(path.size()), threads, [&](int i) {
    const std::vector<cplx> theta(path[i].begin(), path[i].end());
    const FloquetMatrix m = build_floquet_matrix(metric, q, theta, half_width);
    const Eigen::VectorXd ev = m.hermitian_eigenvalues();
    if (ev.size() < bands) throw std::invalid_argument("band_structure: more bands than the truncation holds");
    rows[i].theta = path[i];
    rows[i].values.assign(ev.data(), ev.data() + bands);
  });
  return rows;
}

ThomasScan thomas_scan(const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis,
                       std::span<const double> q, std::span<const double> taus, int J, int padding,
                       double zero_tolerance, int threads) {
  if (!std::is_sorted(taus.begin(), taus.end())) throw std::invalid_argument("thomas_scan: tau sweep must ascend");
  if (J < 0 || padding < 0) throw std::invalid_argument("thomas_scan: J and padding must be >= 0");
  const ModeSpace inner = ModeSpace::symmetric(J, basis);
  ThomasScan scan;
  scan.rows.resize(taus.size());
  detail::parallel_for(static_cast<int>(taus.size()), threads, [&](int i) {
    const TensorModeOperator op(inner, padding, taus[i], q, grid);
    ThomasRow& r = scan.rows[i];
    r.tau = taus[i];
    r.sigma_min = op.sigma_min();
    r.truncation_j = J;
    r.truncation_k = inner.k_count();
    r.inconclusive = !(r.sigma_min > zero_tolerance);
  });
  for (std::size_t i = scan.rows.size(); i-- > 0;) {
    const auto& r = scan.rows[i];
    if (r.inconclusive) break;
    if (i + 1 < scan.rows.size() && r.sigma_min > scan.rows[i + 1].sigma_min) break;
    scan.onset = r.tau;
  }
  return scan;
}

}  // namespace bloch
