#include "klayer/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace klayer {

const char* to_string(Quantity q) noexcept {
    switch (q) {
        case Quantity::SlopeW: return "slope_W";
        case Quantity::SlopeU: return "slope_U";
        case Quantity::LambdaEps: return "lambda_eps";
        case Quantity::Thickness: return "thickness";
    }
    return "unknown";
}

double slope_W_leading(const Params& params, double R) {
    params.validate();
    const double p = params.p;
    return p * params.m * params.b / ((2.0 + p) * sphere_area(params.n) * std::pow(R, params.n - 1));
}

double slope_U_leading(const Params& params, double R) {
    params.validate();
    const double p = params.p, m = params.m;
    const double w = sphere_area(params.n);
    return std::pow(p, 4) * m * m * m /
           (2.0 * (2.0 + p) * (2.0 + p) * w * w * w * std::pow(R, 3.0 * (params.n - 1)));
}

double thickness_leading(double c, const Params& params, double R) {
    params.validate();
    require(c > 0.0 && c < params.b, "thickness level must lie in (0, b)");
    const int n = params.n;
    const double p = params.p;
    const double alpha = sphere_area(n) * std::pow(R, n) / n;
    return (std::pow(params.b / c, 0.5 * p) - 1.0) * (2.0 * n * (p + 2.0) / (params.m * p * p)) * (alpha / R);
}

double thickness_leading_cp_form(double c, const Params& params, double R) {
    params.validate();
    require(c > 0.0 && c < params.b, "thickness level must lie in (0, b)");
    const double k = cp(params.p);
    return (std::pow(params.b / c, 0.5 * params.p) - 1.0) * sphere_area(params.n) * k * k *
           std::pow(R, params.n - 1) / params.m;
}

double lambda_leading(const Params& params, double R) {
    params.validate();
    const double w = sphere_area(params.n);
    const double k = cp(params.p);
    return w * w * std::pow(params.b, params.p) * k * k * std::pow(R, 2.0 * params.n - 2.0) /
           (params.m * params.m);
}

double slope_W_local(double sigma, const Params& params, double R) {
    const double p = params.p, b = params.b;
    return std::sqrt(2.0 / (p + 2.0)) * std::pow(b, 1.0 + 0.5 * p) / std::sqrt(sigma) -
           2.0 * (params.n - 1) * b / ((p + 4.0) * R);
}

double measure_thickness(const RadialProfile& W, double c) {
    return W.grid().R() - interpolate_monotone(W, c);
}

std::vector<SweepPoint> run_radial_sweep(const Params& params, double R,
                                         const std::vector<double>& eps_list,
                                         const RadialSweepConfig& cfg) {
    require(!eps_list.empty(), "epsilon list is empty");
    std::vector<SweepPoint> out(eps_list.size());
    auto job = [&](std::size_t k) {
        Params pk = params;
        pk.epsilon = eps_list[k];
        const RadialDomain domain =
            RadialDomain::for_params(pk, R, cfg.grid_count, cfg.layer_fraction, cfg.local);
        out[k].epsilon = eps_list[k];
        out[k].result = solve_nonlocal(pk, domain, cfg.nonlocal);
    };
    const std::size_t workers = std::max(1, cfg.threads);
    for (std::size_t start = 0; start < eps_list.size(); start += workers) {
        std::vector<std::future<void>> running;
        const std::size_t stop = std::min(eps_list.size(), start + workers);
        for (std::size_t k = start + 1; k < stop; ++k) running.push_back(std::async(std::launch::async, job, k));
        job(start);
        for (auto& f : running) f.get();
    }
    return out;
}

std::pair<double, double> extrapolate_log_model(const std::vector<double>& eps,
                                                const std::vector<double>& y) {
    require(eps.size() == y.size() && eps.size() >= 2, "fit needs at least two points");
    const double n = static_cast<double>(eps.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0 && eps[i] < 1.0, "fit needs epsilon in (0, 1)");
        const double x = eps[i] * std::log(1.0 / eps[i]);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    const double det = n * sxx - sx * sx;
    require(std::abs(det) > 0.0, "fit abscissae are degenerate");
    const double c1 = (n * sxy - sx * sy) / det;
    const double c0 = (sy - c1 * sx) / n;
    return {c0, c1};
}

ExpansionReport expansion_from_sweep(Quantity quantity, const std::vector<SweepPoint>& sweep,
                                     const Params& params, double R, double c) {
    require(sweep.size() >= 3, "expansion check needs at least three epsilons");
    ExpansionReport rep;
    rep.quantity = quantity;
    switch (quantity) {
        case Quantity::SlopeW: rep.predicted_coefficient = slope_W_leading(params, R); break;
        case Quantity::SlopeU: rep.predicted_coefficient = slope_U_leading(params, R); break;
        case Quantity::LambdaEps: rep.predicted_coefficient = lambda_leading(params, R); break;
        case Quantity::Thickness: rep.predicted_coefficient = thickness_leading(c, params, R); break;
    }
    for (const SweepPoint& pt : sweep) {
        const double e = pt.epsilon;
        const SteadyState& s = pt.result.steady;
        double value = 0.0, scaled = 0.0, predicted = 0.0;
        switch (quantity) {
            case Quantity::SlopeW:
                value = boundary_slope(s.W);
                scaled = value * e;
                predicted = rep.predicted_coefficient / e;
                break;
            case Quantity::SlopeU:
                value = boundary_slope(s.U);
                scaled = value * e * e;
                predicted = rep.predicted_coefficient / (e * e);
                break;
            case Quantity::LambdaEps:
                value = s.lambda_eps;
                scaled = value / e;
                predicted = rep.predicted_coefficient * e;
                break;
            case Quantity::Thickness:
                value = measure_thickness(s.W, c);
                scaled = value / e;
                predicted = rep.predicted_coefficient * e;
                break;
        }
        rep.epsilons.push_back(e);
        rep.computed.push_back(scaled);
        rep.predicted_leading.push_back(predicted);
    }
    const auto [c0, c1] = extrapolate_log_model(rep.epsilons, rep.computed);
    rep.extrapolated_coefficient = c0;
    rep.log_coefficient = c1;
    rep.relative_gap = std::abs(c0 - rep.predicted_coefficient) / rep.predicted_coefficient;
    return rep;
}

ExpansionReport verify_expansion(Quantity quantity, const Params& params, double R,
                                 const std::vector<double>& eps_list, double c,
                                 const RadialSweepConfig& cfg) {
    require(eps_list.size() >= 3, "expansion check needs at least three epsilons");
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        require(eps_list[i] < eps_list[i - 1], "epsilon list must be decreasing");
    }
    return expansion_from_sweep(quantity, run_radial_sweep(params, R, eps_list, cfg), params, R, c);
}

std::vector<PLimitRow> verify_p_limit(const Params& params_base, double R,
                                      const std::vector<double>& p_list, double eps_fixed,
                                      double width, const RadialSweepConfig& cfg) {
    require(!p_list.empty(), "p list is empty");
    for (std::size_t i = 1; i < p_list.size(); ++i) require(p_list[i] > p_list[i - 1], "p list must be increasing");
    std::vector<PLimitRow> rows(p_list.size());
    auto job = [&](std::size_t k) {
        Params pk = params_base;
        pk.p = p_list[k];
        pk.epsilon = eps_fixed;
        const RadialDomain domain =
            RadialDomain::for_params(pk, R, cfg.grid_count, cfg.layer_fraction, cfg.local);
        const NonlocalResult res = solve_nonlocal(pk, domain, cfg.nonlocal);
        const SteadyState& s = res.steady;
        PLimitRow row;
        row.p = pk.p;
        for (std::size_t i = 0; i < s.W.size(); ++i) {
            row.sup_deviation = std::max(row.sup_deviation, std::abs(s.W[i] - pk.b));
        }
        row.boundary_mass_fraction = integrate_radial_range(s.U, R - width, R) / pk.m;
        rows[k] = row;
    };
    const std::size_t workers = std::max(1, cfg.threads);
    for (std::size_t start = 0; start < p_list.size(); start += workers) {
        std::vector<std::future<void>> running;
        const std::size_t stop = std::min(p_list.size(), start + workers);
        for (std::size_t k = start + 1; k < stop; ++k) running.push_back(std::async(std::launch::async, job, k));
        job(start);
        for (auto& f : running) f.get();
    }
    return rows;
}

EnvelopeFit fit_envelope(const RadialProfile& W, double epsilon, double p, double layer) {
    const RadialGrid& g = W.grid();
    const double R = g.R();
    double num = 0.0, den = 0.0;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = R - g.node(i);
        if (d > layer) continue;
        const double prof = std::pow(1.0 + d / epsilon, -2.0 / p);
        num += W[i] * prof;
        den += prof * prof;
        ratios.push_back(W[i] / prof);
    }
    require(!ratios.empty() && den > 0.0, "no nodes inside the layer region");
    EnvelopeFit fit;
    fit.scale = num / den;
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    fit.r1 = *lo / fit.scale;
    fit.r2 = *hi / fit.scale;
    fit.samples = static_cast<int>(ratios.size());
    return fit;
}

double interior_smallness(const RadialProfile& W, double epsilon, double p, double delta) {
    const RadialGrid& g = W.grid();
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.R() - g.node(i) <= delta) continue;
        worst = std::max(worst, W[i]);
        any = true;
    }
    require(any, "no nodes farther than delta from the boundary");
    return worst / std::pow(epsilon, 2.0 / p);
}

}  // namespace klayer
