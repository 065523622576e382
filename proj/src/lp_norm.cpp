#include "bloch/lp_norm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "parallel.hpp"

namespace bloch {

LinearOperator identity_operator() {
  return {"identity", [](const GridFunction& f) { return f; }, [](const GridFunction& f) { return f; }};
}

LinearOperator mode_multiplier(const TorusGrid& grid, const ModeSpace& space, std::vector<cplx> factors,
                               std::string name) {
  if (factors.size() != space.size()) throw std::invalid_argument("mode_multiplier: factor count mismatch");
  auto d = std::make_shared<const std::vector<cplx>>(std::move(factors));
  auto run = [grid, space, d](const GridFunction& f, bool conj) {
    ModeCoefficients c = analyze(f, space);
    auto& v = c.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= conj ? std::conj((*d)[i]) : (*d)[i];
    return synthesize(c, grid);
  };
  return {std::move(name), [run](const GridFunction& f) { return run(f, false); },
          [run](const GridFunction& f) { return run(f, true); }};
}

ModeSpace full_grid_space(const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis) {
  return ModeSpace::symmetric(grid.points_per_axis() / 2 - 1, std::move(basis));
}

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("conjugate_exponent: p must exceed 1");
  return p / (p - 1.0);
}

GridFunction duality_map(const GridFunction& g, double r) {
  const double norm = lebesgue_norm(g, r);
  std::vector<cplx> out(g.values().size());
  if (norm == 0.0) return g.with_values(std::move(out));
  const double scale = std::pow(norm, 1.0 - r);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const cplx v = g.values()[i];
    const double a = std::abs(v);
    if (a > 0.0) out[i] = v * (std::pow(a, r - 2.0) * scale);
  }
  return g.with_values(std::move(out));
}

namespace {

struct Trial {
  double ratio = 0.0;
  std::vector<cplx> f;
  int applications = 0;
};

GridFunction normalized(GridFunction f, double p) {
  const double n = lebesgue_norm(f, p);
  if (n > 0.0) f *= 1.0 / n;
  return f;
}

Trial climb(const LinearOperator& op, GridFunction f, double p_in, double p_out, const LpOptions& opt) {
  Trial t;
  const double p_dual = conjugate_exponent(p_in);
  f = normalized(std::move(f), p_in);
  GridFunction tf = op.apply(f);
  ++t.applications;
  double r = lebesgue_norm(tf, p_out);
  for (int it = 0; it < opt.iterations; ++it) {
    if (r == 0.0) break;
    const GridFunction w = op.adjoint(duality_map(tf, p_out));
    ++t.applications;
    if (lebesgue_norm(w, p_dual) == 0.0) break;
    const GridFunction step = duality_map(w, p_dual);
    bool improved = false;
    for (double s = 1.0; s >= 1.0 / 64.0; s *= 0.5) {
      GridFunction cand = step;
      if (s < 1.0) {
        cand = f;
        cand *= 1.0 - s;
        GridFunction part = step;
        part *= s;
        cand += part;
        cand = normalized(std::move(cand), p_in);
      }
      GridFunction tc = op.apply(cand);
      ++t.applications;
      const double rc = lebesgue_norm(tc, p_out);
      if (rc > r) {
        const double gain = (rc - r) / rc;
        f = std::move(cand);
        tf = std::move(tc);
        r = rc;
        improved = gain > opt.tolerance;
        break;
      }
    }
    if (!improved) break;
  }
  t.ratio = r;
  t.f.assign(f.values().begin(), f.values().end());
  return t;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

GridFunction start_for(int index, const GridFunction& prototype, const LpOptions& opt) {
  const std::size_t n = prototype.values().size();
  const int given = static_cast<int>(opt.starts.size());
  if (index < given) return opt.starts[index];
  const int k = index - given;
  std::vector<cplx> v(n);
  if (k == 0) {
    v[0] = 1.0;
  } else if (k == 1) {
    std::fill(v.begin(), v.end(), cplx(1.0));
  } else {
    std::mt19937_64 rng(mix(opt.seed ^ mix(static_cast<std::uint64_t>(index))));
    if (k % 2 == 0) {
      std::normal_distribution<double> nd;
      for (auto& x : v) x = cplx(nd(rng), nd(rng));
    } else {
      std::uniform_int_distribution<std::size_t> node(0, n - 1);
      std::uniform_real_distribution<double> phase(0.0, kTwoPi);
      v[node(rng)] = std::polar(1.0, phase(rng));
    }
  }
  return prototype.with_values(std::move(v));
}

}  // namespace

LpBound lp_operator_bound_lower(const LinearOperator& op, const GridFunction& prototype, double p_in,
                                double p_out, const LpOptions& options) {
  if (!(p_in > 1.0) || !(p_out >= 1.0) || !std::isfinite(p_in) || !std::isfinite(p_out))
    throw std::invalid_argument("lp_operator_bound_lower: exponents must satisfy p_in > 1, p_out >= 1");
  if (options.restarts < 1) throw std::invalid_argument("lp_operator_bound_lower: restarts must be >= 1");
  const int total = std::max(options.restarts, static_cast<int>(options.starts.size()));
  std::vector<Trial> trials(static_cast<std::size_t>(total));
  auto work = [&](int i) { trials[i] = climb(op, start_for(i, prototype, options), p_in, p_out, options); };
  detail::parallel_for(total, options.threads, work);
  LpBound out;
  int best = -1;
  for (int i = 0; i < total; ++i) {
    out.restart_values.push_back(trials[i].ratio);
    out.applications += trials[i].applications;
    if (best < 0 || trials[i].ratio > trials[best].ratio) best = i;
  }
  out.ratio = trials[best].ratio;
  out.maximizer = std::move(trials[best].f);
  return out;
}

}  // namespace bloch
