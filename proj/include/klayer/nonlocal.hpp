#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <sstream>
#include <utility>

#include "klayer/core.hpp"
#include "klayer/radial_steady.hpp"

namespace klayer {

/// A local Dirichlet problem sigma Delta W = W^{1+p}, W = b on the boundary,
/// together with the quadrature of its domain.
template <class D>
concept LocalProblem = requires(const D& d, double sigma, const Params& params,
                                const typename D::Field& f, const typename D::Field* warm) {
    { d.solve(sigma, params, warm) } -> std::same_as<typename D::Field>;
    { d.integrate_power(f, params.p) } -> std::convertible_to<double>;
    { d.integrate(f) } -> std::convertible_to<double>;
    { d.scaled_power(f, params.p, 1.0) } -> std::same_as<typename D::Field>;
    { d.measure() } -> std::convertible_to<double>;
};

struct NonlocalConfig {
    double tol_rel = 1e-8;
    int max_doublings = 128;
    int max_bisections = 200;
    // Multipliers on the analytic lower bracket m / (b^p |Omega|) and on the
    // first trial upper end 2 * lower.
    double lower_seed = 1.0;
    double upper_seed = 1.0;
    // Start each local solve from the previous one.
    bool warm_start = true;

    void validate() const;
};

template <class Field>
struct NonlocalResultT {
    SteadyStateT<Field> steady;
    int bisection_iters = 0;
    double constraint_residual = 0.0;  // |lambda int W^p - m| / m
    double lambda = 0.0;               // coefficient of the accepted local solve
};

using NonlocalResult = NonlocalResultT<RadialProfile>;

/// Radial ball B_R in R^n on a fixed graded grid.
class RadialDomain {
public:
    using Field = RadialProfile;

    RadialDomain(GridPtr grid, LocalSolveConfig local = {});

    // Grid whose boundary spacing is `fraction` times the layer width expected
    // at the leading-order sigma = epsilon^2 * lambda coefficient.
    static RadialDomain for_params(const Params& params, double R, int count, double fraction = 0.1,
                                   LocalSolveConfig local = {});

    RadialProfile solve(double sigma, const Params& params, const RadialProfile* warm) const;
    double integrate_power(const RadialProfile& W, double p) const;
    double integrate(const RadialProfile& f) const { return integrate_radial(f); }
    RadialProfile scaled_power(const RadialProfile& W, double p, double scale) const;
    double measure() const { return measure_; }

    const GridPtr& grid() const { return grid_; }
    double R() const { return grid_->R(); }

private:
    GridPtr grid_;
    LocalSolveConfig local_;
    double measure_;
};

/// g(lambda) = lambda * int W_lambda^p with W_lambda solved at sigma = epsilon / lambda.
template <LocalProblem D>
double constraint_value(double lambda, const Params& params, const D& domain) {
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
    params.validate();
    const auto W = domain.solve(params.epsilon / lambda, params, nullptr);
    return lambda * domain.integrate_power(W, params.p);
}

template <LocalProblem D>
NonlocalResultT<typename D::Field> solve_nonlocal(const Params& params, const D& domain,
                                                  const NonlocalConfig& cfg = {}) {
    using Field = typename D::Field;
    params.validate();
    cfg.validate();
    const double m = params.m;

    struct Sample {
        double lambda = 0.0;
        double g = 0.0;
        Field W;
    };
    const Field* warm = nullptr;
    Field last;
    auto evaluate = [&](double lambda) {
        Sample s;
        s.lambda = lambda;
        s.W = domain.solve(params.epsilon / lambda, params, warm);
        s.g = lambda * domain.integrate_power(s.W, params.p);
        if (cfg.warm_start) {
            last = s.W;
            warm = &last;
        }
        return s;
    };
    auto converged = [&](const Sample& s) { return std::abs(s.g - m) / m < cfg.tol_rel; };

    int expansions = 0;
    Sample lo = evaluate(cfg.lower_seed * m / (std::pow(params.b, params.p) * domain.measure()));
    while (lo.g > m && !converged(lo)) {
        if (++expansions > cfg.max_doublings) fail(ErrorCode::BracketFailure, "lower bracket search failed");
        lo = evaluate(0.5 * lo.lambda);
    }
    Sample hi = converged(lo) ? lo : evaluate(2.0 * cfg.upper_seed * lo.lambda);
    while (!converged(hi) && hi.g <= m) {
        if (++expansions > cfg.max_doublings) {
            std::ostringstream msg;
            msg << "upper bracket not found after " << cfg.max_doublings << " doublings";
            fail(ErrorCode::BracketFailure, msg.str());
        }
        lo = std::move(hi);
        hi = evaluate(2.0 * lo.lambda);
    }

    int iters = 0;
    std::optional<Sample> best;
    if (converged(lo)) {
        best = std::move(lo);
    } else if (converged(hi)) {
        best = std::move(hi);
    }
    while (!best) {
        if (++iters > cfg.max_bisections) {
            fail(ErrorCode::NoConvergence, "bisection on the nonlocal constraint did not converge");
        }
        Sample mid = evaluate(std::sqrt(lo.lambda * hi.lambda));
        if (converged(mid)) {
            best = std::move(mid);
        } else if (mid.g < m) {
            lo = std::move(mid);
        } else {
            hi = std::move(mid);
        }
        if (!best && hi.lambda / lo.lambda - 1.0 < 1e-15) {
            fail(ErrorCode::NoConvergence, "nonlocal bracket collapsed before the constraint was met");
        }
    }

    NonlocalResultT<Field> out;
    const double integral = domain.integrate_power(best->W, params.p);
    out.lambda = best->lambda;
    out.bisection_iters = iters;
    out.constraint_residual = std::abs(best->g - m) / m;
    out.steady.amplitude = m / integral;
    out.steady.lambda_eps = integral / m;
    out.steady.sigma = params.epsilon / best->lambda;
    out.steady.U = domain.scaled_power(best->W, params.p, out.steady.amplitude);
    out.steady.W = std::move(best->W);
    return out;
}

}  // namespace klayer
