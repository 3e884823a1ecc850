#pragma once

#include <span>

#include "klayer/core.hpp"

namespace klayer {

struct LocalSolveConfig {
    double newton_tol = 1e-10;  // max-norm of the discrete residual
    int max_iters = 200;
    double damping = 1.0;       // in (0, 1]

    void validate() const;
};

/// Layer-profile constant sqrt((2/p)(2/p + 1)).
double cp(double p);

/// Width c_p sigma^{1/2} b^{-p/2} of the layer of the local problem.
double layer_width(double sigma, const Params& params);

/// Solves sigma (W'' + (n-1)/r W') = W^{1+p}, W'(0) = 0, W(R) = b on the grid
/// by damped Newton. `initial` (same size as the grid) replaces the default
/// starting iterate barrier_lower. Throws NoConvergence after one retry with
/// halved damping.
RadialProfile solve_local_radial(double sigma, const Params& params, const GridPtr& grid,
                                 const LocalSolveConfig& cfg = {},
                                 std::span<const double> initial = {});

/// max_i |sigma (L W)_i - W_i^{1+p}| over the unknown nodes.
double local_residual(const RadialProfile& W, double sigma, const Params& params);

/// Weights of the nodal operator at node i < last:
/// lo * f[i-1] + mid * f[i] + hi * f[i+1] (lo = 0 at r = 0).
struct RadialStencil {
    double lo = 0.0, mid = 0.0, hi = 0.0;
};

RadialStencil radial_stencil(const RadialGrid& grid, std::size_t i);

/// Nodal second-order approximation of W'' + (n-1)/r W' (n W'' at r = 0).
/// The value at r = R is left at zero.
std::vector<double> apply_radial_laplacian(const RadialGrid& grid, std::span<const double> f);

/// Half-line layer profile b (1 + b^{p/2}(R - r)/(c_p sigma^{1/2}))^{-2/p}.
double barrier_lower(double r, double sigma, const Params& params, double R);

/// Dimension-dependent super-solution.
///   n >= 3: (R/r)^{(n-1)/2} times the lower profile
///   n = 2:  (R/r)^{a_p} times the lower profile with c_p replaced by c_{p,1}
///   n = 1:  lower profile plus c_p^{2/p} sigma^{1/p} / R^{2/p}
double barrier_upper(double r, double sigma, const Params& params, double R);

/// Largest sigma accepted by the n = 2 super-solution, b^p R^2 / a_p^2.
double barrier_upper_sigma_limit(const Params& params, double R);

/// Threshold below which the n = 2 super-solution property is guaranteed.
/// Evaluated with c_p in place of c_{p,1}, which only lowers it.
double barrier_upper_sigma0(const Params& params, double R);

/// One-sided second-order difference for W'(R).
double boundary_slope(const RadialProfile& W);

}  // namespace klayer
