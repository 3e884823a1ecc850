#include "klayer/radial_steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace klayer {

void LocalSolveConfig::validate() const {
    require(std::isfinite(newton_tol) && newton_tol > 0.0, "newton_tol must be positive");
    require(max_iters >= 1, "max_iters must be at least 1");
    require(damping > 0.0 && damping <= 1.0, "damping must lie in (0, 1]");
}

double cp(double p) {
    require(std::isfinite(p) && p > 0.0, "p must be positive");
    const double q = 2.0 / p;
    return std::sqrt(q * (q + 1.0));
}

double layer_width(double sigma, const Params& params) {
    return cp(params.p) * std::sqrt(sigma) * std::pow(params.b, -0.5 * params.p);
}

RadialStencil radial_stencil(const RadialGrid& g, std::size_t i) {
    const int n = g.dimension();
    if (i == 0) {
        const double h = g.node(1);
        const double c = 2.0 * n / (h * h);
        return {0.0, -c, c};
    }
    const double hm = g.spacing(i), hp = g.spacing(i + 1);
    const double s = hm + hp;
    RadialStencil st{2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)};
    if (n > 1) {
        const double k = (n - 1) / g.node(i);
        const double d = hm * hp * s;
        st.lo -= k * hp * hp / d;
        st.mid += k * (hp * hp - hm * hm) / d;
        st.hi += k * hm * hm / d;
    }
    return st;
}

namespace {

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

NewtonOutcome newton(std::vector<double>& W, double sigma, const Params& params,
                     const RadialGrid& g, const LocalSolveConfig& cfg, double damping) {
    const std::size_t N = g.last();
    std::vector<RadialStencil> st(N);
    for (std::size_t i = 0; i < N; ++i) st[i] = radial_stencil(g, i);

    std::vector<double> F(N), lower(N), diag(N), upper(N), trial(W);
    const double p = params.p;

    auto residual = [&](const std::vector<double>& w, std::vector<double>& out) {
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double lap =
                (i > 0 ? st[i].lo * w[i - 1] : 0.0) + st[i].mid * w[i] + st[i].hi * w[i + 1];
            out[i] = sigma * lap - std::pow(w[i], 1.0 + p);
            worst = std::max(worst, std::abs(out[i]));
        }
        return worst;
    };

    // Residuals below a few ulps of the largest stencil term cannot be resolved.
    double floor = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        floor = std::max(floor, sigma * (std::abs(st[i].lo) + std::abs(st[i].mid) + std::abs(st[i].hi)));
    }
    floor *= 64.0 * std::numeric_limits<double>::epsilon() * params.b;
    const double tol = std::max(cfg.newton_tol, floor);

    NewtonOutcome out;
    double res = residual(W, F);
    for (int it = 0; it < cfg.max_iters; ++it) {
        out.iterations = it;
        out.residual = res;
        if (res < tol) {
            out.converged = true;
            return out;
        }
        for (std::size_t i = 0; i < N; ++i) {
            lower[i] = sigma * st[i].lo;
            diag[i] = sigma * st[i].mid - (1.0 + p) * std::pow(W[i], p);
            upper[i] = sigma * st[i].hi;
            F[i] = -F[i];
        }
        solve_tridiagonal(lower, diag, upper, F);

        double step = damping;
        double trial_res = 0.0;
        std::vector<double> scratch(N);
        for (int halving = 0;; ++halving) {
            bool positive = true;
            for (std::size_t i = 0; i < N; ++i) {
                trial[i] = W[i] + step * F[i];
                if (!(trial[i] > 0.0)) positive = false;
            }
            if (positive) {
                trial_res = residual(trial, scratch);
                if (std::isfinite(trial_res)) break;
            }
            if (halving > 60) return out;
            step *= 0.5;
        }
        std::swap(W, trial);
        F = std::move(scratch);
        res = trial_res;
    }
    out.iterations = cfg.max_iters;
    out.residual = res;
    out.converged = res < tol;
    return out;
}

}  // namespace

std::vector<double> apply_radial_laplacian(const RadialGrid& grid, std::span<const double> f) {
    require(f.size() == grid.size(), "field size does not match the grid");
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i < grid.last(); ++i) {
        const RadialStencil s = radial_stencil(grid, i);
        out[i] = (i > 0 ? s.lo * f[i - 1] : 0.0) + s.mid * f[i] + s.hi * f[i + 1];
    }
    return out;
}

double local_residual(const RadialProfile& W, double sigma, const Params& params) {
    const auto lap = apply_radial_laplacian(W.grid(), W.values());
    double worst = 0.0;
    for (std::size_t i = 0; i < W.grid().last(); ++i) {
        worst = std::max(worst, std::abs(sigma * lap[i] - std::pow(W[i], 1.0 + params.p)));
    }
    return worst;
}

RadialProfile solve_local_radial(double sigma, const Params& params, const GridPtr& grid,
                                 const LocalSolveConfig& cfg, std::span<const double> initial) {
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
    require(grid != nullptr, "local solve needs a grid");
    params.validate();
    cfg.validate();
    require(grid->size() >= 4, "local solve needs at least 4 nodes");

    const RadialGrid& g = *grid;
    std::vector<double> start(g.size());
    if (initial.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) start[i] = barrier_lower(g.node(i), sigma, params, g.R());
    } else {
        require(initial.size() == g.size(), "initial guess size does not match the grid");
        for (std::size_t i = 0; i < g.size(); ++i) {
            require(initial[i] > 0.0 && std::isfinite(initial[i]), "initial guess must be positive");
            start[i] = initial[i];
        }
    }
    start.back() = params.b;

    double damping = cfg.damping;
    NewtonOutcome outcome;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> W = start;
        outcome = newton(W, sigma, params, g, cfg, damping);
        if (outcome.converged) {
            W.back() = params.b;
            return RadialProfile(grid, std::move(W));
        }
        damping *= 0.5;
    }
    std::ostringstream msg;
    msg << "local Newton solve did not converge (sigma = " << sigma << ", residual "
        << outcome.residual << " after " << outcome.iterations << " iterations)";
    fail(ErrorCode::NoConvergence, msg.str());
}

double barrier_lower(double r, double sigma, const Params& params, double R) {
    const double p = params.p, b = params.b;
    const double z = R - r;
    return b * std::pow(1.0 + std::pow(b, 0.5 * p) * z / (cp(p) * std::sqrt(sigma)), -2.0 / p);
}

double barrier_upper_sigma_limit(const Params& params, double R) {
    const double a = std::max(0.5, 2.0 / params.p);
    return std::pow(params.b, params.p) * R * R / (a * a);
}

double barrier_upper_sigma0(const Params& params, double R) {
    const double p = params.p, b = params.b;
    const double a = std::max(0.5, 2.0 / p);
    const double c = cp(p);
    const double bh = std::pow(b, 0.5 * p);
    const double first = p * a * std::pow(b, p) / (8.0 * a / (R * R) + 8.0 * a * a * bh / (c * R));
    const double second = p / (2.0 + p) * std::pow(b, p) * R * R * c / (4.0 * a * a * c + 8.0 * a * a * bh * R);
    const double s = std::min({first, second, 1.0});
    return s * s;
}

double barrier_upper(double r, double sigma, const Params& params, double R) {
    const int n = params.n;
    const double p = params.p, b = params.b;
    if (n >= 2 && r <= 0.0) fail(ErrorCode::Singularity, "upper barrier is singular at r = 0");
    if (n == 1) {
        return barrier_lower(r, sigma, params, R) +
               std::pow(cp(p), 2.0 / p) * std::pow(sigma, 1.0 / p) / std::pow(R, 2.0 / p);
    }
    if (n >= 3) {
        return std::pow(R / r, 0.5 * (n - 1)) * barrier_lower(r, sigma, params, R);
    }
    require(sigma < barrier_upper_sigma_limit(params, R),
            "sigma too large for the two-dimensional upper barrier");
    const double a = std::max(0.5, 2.0 / p);
    const double c1 = cp(p) / std::sqrt(1.0 - a * a * sigma / (std::pow(b, p) * R * R));
    const double z = R - r;
    return std::pow(R / r, a) * b * std::pow(1.0 + std::pow(b, 0.5 * p) * z / (c1 * std::sqrt(sigma)), -2.0 / p);
}

double boundary_slope(const RadialProfile& W) {
    const RadialGrid& g = W.grid();
    require(g.size() >= 4, "boundary slope needs at least 4 nodes");
    const std::size_t N = g.last();
    const double a = g.spacing(N), c = g.spacing(N - 1);
    return W[N] * (2.0 * a + c) / (a * (a + c)) - W[N - 1] * (a + c) / (a * c) +
           W[N - 2] * a / (c * (a + c));
}

}  // namespace klayer
