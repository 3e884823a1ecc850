#include "klayer/nonlocal.hpp"

#include <algorithm>
#include <cmath>

#include "klayer/asymptotics.hpp"

namespace klayer {

void NonlocalConfig::validate() const {
    require(std::isfinite(tol_rel) && tol_rel > 0.0, "tol_rel must be positive");
    require(max_doublings >= 1 && max_bisections >= 1, "iteration limits must be positive");
    require(lower_seed > 0.0 && upper_seed > 0.0, "bracket seeds must be positive");
}

RadialDomain::RadialDomain(GridPtr grid, LocalSolveConfig local)
    : grid_(std::move(grid)), local_(local) {
    require(grid_ != nullptr, "radial domain needs a grid");
    local_.validate();
    double sum = 0.0;
    for (double w : grid_->weights()) sum += w;
    measure_ = sum;
}

RadialDomain RadialDomain::for_params(const Params& params, double R, int count, double fraction,
                                      LocalSolveConfig local) {
    params.validate();
    require(fraction > 0.0, "layer fraction must be positive");
    const double sigma = params.epsilon * params.epsilon * lambda_leading(params, R);
    const double width = std::min(fraction * layer_width(sigma, params), 0.5 * R);
    return RadialDomain(make_graded_grid(R, params.n, width, count), local);
}

RadialProfile RadialDomain::solve(double sigma, const Params& params, const RadialProfile*) const {
    require(params.n == grid_->dimension(), "params dimension does not match the grid");
    return solve_local_radial(sigma, params, grid_, local_);
}

double RadialDomain::integrate_power(const RadialProfile& W, double p) const {
    const auto w = grid_->weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * std::pow(W[i], p);
    return sum;
}

RadialProfile RadialDomain::scaled_power(const RadialProfile& W, double p, double scale) const {
    std::vector<double> v(W.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = scale * std::pow(W[i], p);
    return RadialProfile(W.grid_ptr(), std::move(v));
}

}  // namespace klayer
