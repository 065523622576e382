#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bloch/modes.hpp"

namespace bloch {

/// A linear map between sampled functions on one grid together with its
/// adjoint in the weighted L^2 pairing.
struct LinearOperator {
  std::string name;
  std::function<GridFunction(const GridFunction&)> apply;
  std::function<GridFunction(const GridFunction&)> adjoint;
};

LinearOperator identity_operator();

/// S diag(d) A on the modes of `space`: f -> synthesize(d * analyze(f)).
LinearOperator mode_multiplier(const TorusGrid& grid, const ModeSpace& space, std::vector<cplx> factors,
                               std::string name);

/// Every x1 mode the grid resolves, |j| <= N/2 - 1.
ModeSpace full_grid_space(const TorusGrid& grid, std::shared_ptr<const TransverseBasis> basis);

struct LpOptions {
  int restarts = 20;
  int iterations = 40;
  std::uint64_t seed = 1;
  double tolerance = 1e-7;  // relative improvement that ends a restart
  int threads = 1;
  std::vector<GridFunction> starts;  // tried first, before spikes and noise
};

struct LpBound {
  double ratio = 0.0;
  std::vector<cplx> maximizer;  // samples of the best f, ||f||_{p_in} = 1
  std::vector<double> restart_values;
  int applications = 0;
};

/// Lower bound on ||T||_{p_in -> p_out}: the best ||T f||_{p_out} / ||f||_{p_in}
/// over restarts of the nonlinear power iteration
///   f <- J_{p_in'}(T* J_{p_out}(T f)),  J_r(g) = |g|^{r-2} g / ||g||_r^{r-1},
/// with damped steps whenever the plain step does not increase the ratio.
/// `prototype` fixes the grid and weight of the trial functions. Restarts
/// are a spike at node 0, a constant, then random noise and random spikes,
/// each seeded from `seed` and the restart index.
LpBound lp_operator_bound_lower(const LinearOperator& op, const GridFunction& prototype, double p_in,
                                double p_out, const LpOptions& options);

/// Conjugate exponent p / (p - 1).
double conjugate_exponent(double p);

/// Duality map J_r(g) with ||J_r(g)||_{r'} = 1 and <g, J_r(g)> = ||g||_r.
GridFunction duality_map(const GridFunction& g, double r);

}  // namespace bloch
