#include "klayer/klayer.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <numbers>
#include <string>
#include <vector>

#include "klayer/asymptotics.hpp"
#include "klayer/evolve_radial.hpp"
#include "klayer/nonlocal.hpp"
#include "klayer/planar2d.hpp"
#include "klayer/radial_steady.hpp"

using namespace klayer;

struct klayer_radial {
    Params params;
    NonlocalResult result;
};

struct klayer_planar {
    Params params;
    PlanarDomain2D domain;
    NonlocalResult2D result;
};

struct klayer_evolution {
    EvolutionSeries series;
    double mu_hat = std::numeric_limits<double>::quiet_NaN();
    double max_run_drift = 0.0;
};

namespace {

thread_local std::string last_error;

klayer_status set_error(klayer_status status, const char* message) {
    last_error = message;
    return status;
}

klayer_status map_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return KLAYER_ERR_INVALID_ARGUMENT;
        case ErrorCode::NoConvergence: return KLAYER_ERR_NO_CONVERGENCE;
        case ErrorCode::BracketFailure: return KLAYER_ERR_BRACKET_FAILURE;
        case ErrorCode::NoCrossing: return KLAYER_ERR_NO_CROSSING;
        case ErrorCode::TimeStep: return KLAYER_ERR_TIME_STEP;
        case ErrorCode::Positivity: return KLAYER_ERR_POSITIVITY;
        case ErrorCode::Singularity: return KLAYER_ERR_SINGULARITY;
        case ErrorCode::Io: return KLAYER_ERR_IO;
        case ErrorCode::Config: return KLAYER_ERR_CONFIG;
    }
    return KLAYER_ERR_INTERNAL;
}

template <class F>
klayer_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return KLAYER_OK;
    } catch (const Error& e) {
        return set_error(map_code(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(KLAYER_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(KLAYER_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(KLAYER_ERR_INTERNAL, "unknown failure");
    }
}

void need(const void* ptr, const char* what) {
    if (ptr == nullptr) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

Params to_params(const klayer_params* p) {
    need(p, "params");
    Params out;
    out.epsilon = p->epsilon;
    out.p = p->p;
    out.b = p->b;
    out.m = p->m;
    out.n = p->n;
    out.validate();
    return out;
}

klayer_radial_options radial_opts(const klayer_radial_options* o) {
    return o ? *o : klayer_radial_options_default();
}

RadialSweepConfig sweep_config(const klayer_radial_options& o) {
    RadialSweepConfig cfg;
    cfg.grid_count = o.grid_count;
    cfg.layer_fraction = o.layer_fraction;
    cfg.local.newton_tol = o.newton_tol;
    cfg.nonlocal.tol_rel = o.nonlocal_tol;
    cfg.threads = std::max(1, o.threads);
    return cfg;
}

double thickness_or_nan(const RadialProfile& W, double c) {
    try {
        return measure_thickness(W, c);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoCrossing) throw;
        return std::numeric_limits<double>::quiet_NaN();
    }
}

constexpr double kExpansionTolerance[4] = {0.05, 0.05, 0.08, 0.08};

}  // namespace

extern "C" {

const char* klayer_status_name(klayer_status status) {
    switch (status) {
        case KLAYER_OK: return "ok";
        case KLAYER_ERR_INVALID_ARGUMENT: return to_string(ErrorCode::InvalidArgument);
        case KLAYER_ERR_NO_CONVERGENCE: return to_string(ErrorCode::NoConvergence);
        case KLAYER_ERR_BRACKET_FAILURE: return to_string(ErrorCode::BracketFailure);
        case KLAYER_ERR_NO_CROSSING: return to_string(ErrorCode::NoCrossing);
        case KLAYER_ERR_TIME_STEP: return to_string(ErrorCode::TimeStep);
        case KLAYER_ERR_POSITIVITY: return to_string(ErrorCode::Positivity);
        case KLAYER_ERR_SINGULARITY: return to_string(ErrorCode::Singularity);
        case KLAYER_ERR_IO: return to_string(ErrorCode::Io);
        case KLAYER_ERR_CONFIG: return to_string(ErrorCode::Config);
        case KLAYER_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* klayer_last_error(void) { return last_error.c_str(); }

const char* klayer_version(void) { return KLAYER_VERSION; }

klayer_params klayer_params_default(void) { return {0.01, 2.0, 1.0, 1.0, 2}; }

klayer_radial_options klayer_radial_options_default(void) { return {1.0, 4000, 0.05, 1e-10, 1e-8, 1}; }

klayer_status klayer_radial_solve(const klayer_params* params, const klayer_radial_options* opts,
                                  klayer_radial** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        const Params pr = to_params(params);
        const klayer_radial_options o = radial_opts(opts);
        LocalSolveConfig local;
        local.newton_tol = o.newton_tol;
        NonlocalConfig nl;
        nl.tol_rel = o.nonlocal_tol;
        const RadialDomain dom = RadialDomain::for_params(pr, o.R, o.grid_count, o.layer_fraction, local);
        *out = new klayer_radial{pr, solve_nonlocal(pr, dom, nl)};
    });
}

klayer_status klayer_radial_info_get(const klayer_radial* h, klayer_radial_info* info) {
    return guarded([&] {
        need(h, "handle");
        need(info, "info");
        const SteadyState& s = h->result.steady;
        info->amplitude = s.amplitude;
        info->lambda_eps = s.lambda_eps;
        info->sigma = s.sigma;
        info->slope_W = boundary_slope(s.W);
        info->slope_U = boundary_slope(s.U);
        info->constraint_residual = h->result.constraint_residual;
        info->bisection_iters = h->result.bisection_iters;
        info->size = s.W.size();
    });
}

klayer_status klayer_radial_copy(const klayer_radial* h, double* r, double* W, double* U) {
    return guarded([&] {
        need(h, "handle");
        const SteadyState& s = h->result.steady;
        const auto nodes = s.W.grid().nodes();
        if (r) std::copy(nodes.begin(), nodes.end(), r);
        if (W) std::copy(s.W.values().begin(), s.W.values().end(), W);
        if (U) std::copy(s.U.values().begin(), s.U.values().end(), U);
    });
}

klayer_status klayer_radial_thickness(const klayer_radial* h, double c, double* thickness) {
    return guarded([&] {
        need(h, "handle");
        need(thickness, "thickness");
        *thickness = measure_thickness(h->result.steady.W, c);
    });
}

klayer_status klayer_radial_barrier_violation(const klayer_radial* h, double* violation) {
    return guarded([&] {
        need(h, "handle");
        need(violation, "violation");
        const SteadyState& s = h->result.steady;
        const Params& pr = h->params;
        const RadialGrid& g = s.W.grid();
        const double R = g.R();
        const bool upper_ok = pr.n != 2 || s.sigma < barrier_upper_sigma_limit(pr, R);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = g.node(i);
            worst = std::max(worst, barrier_lower(r, s.sigma, pr, R) - s.W[i]);
            if (upper_ok && (r > 0.0 || pr.n == 1)) {
                worst = std::max(worst, s.W[i] - barrier_upper(r, s.sigma, pr, R));
            }
        }
        *violation = worst;
    });
}

void klayer_radial_free(klayer_radial* h) { delete h; }

klayer_planar_options klayer_planar_options_default(void) { return {0.01, 256, 0, 1e-10, 1e-8}; }

klayer_status klayer_planar_solve(const klayer_params* params, const klayer_shape* shape,
                                  const klayer_planar_options* opts, klayer_planar** out) {
    return guarded([&] {
        need(out, "out");
        need(shape, "shape");
        *out = nullptr;
        Params pr = to_params(params);
        pr.n = 2;
        const klayer_planar_options o = opts ? *opts : klayer_planar_options_default();
        Shape s;
        switch (shape->kind) {
            case KLAYER_SHAPE_DISK: s = Shape::disk(shape->a); break;
            case KLAYER_SHAPE_ELLIPSE: s = Shape::ellipse(shape->a, shape->b); break;
            case KLAYER_SHAPE_STAR: s = Shape::star(shape->a, shape->amplitude, shape->k); break;
            default: fail(ErrorCode::InvalidArgument, "unknown shape kind");
        }
        Solve2DConfig local;
        local.tol = o.tol;
        local.method = o.gauss_seidel ? Solve2DConfig::Method::GaussSeidel : Solve2DConfig::Method::Newton;
        NonlocalConfig nl;
        nl.tol_rel = o.nonlocal_tol;
        PlanarDomain2D domain = build_domain(s, o.h, o.samples);
        NonlocalResult2D result = solve_nonlocal_2d(pr, domain.grid, nl, local);
        *out = new klayer_planar{pr, std::move(domain), std::move(result)};
    });
}

klayer_status klayer_planar_info_get(const klayer_planar* h, klayer_planar_info* info) {
    return guarded([&] {
        need(h, "handle");
        need(info, "info");
        const MaskedGrid& g = *h->domain.grid;
        info->nx = g.nx;
        info->ny = g.ny;
        info->x0 = g.x0;
        info->y0 = g.y0;
        info->h = g.h;
        info->unknowns = g.unknowns();
        info->amplitude = h->result.steady.amplitude;
        info->lambda_eps = h->result.steady.lambda_eps;
        info->sigma = h->result.steady.sigma;
        info->constraint_residual = h->result.constraint_residual;
        info->bisection_iters = h->result.bisection_iters;
    });
}

klayer_status klayer_planar_copy(const klayer_planar* h, double* W, double* U, unsigned char* inside) {
    return guarded([&] {
        need(h, "handle");
        const MaskedGrid& g = *h->domain.grid;
        const auto& s = h->result.steady;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const bool in = g.unknown[k] >= 0;
            if (W) W[k] = s.W[k];
            if (U) U[k] = in ? s.U[k] : 0.0;
            if (inside) inside[k] = in ? 1 : 0;
        }
    });
}

klayer_status klayer_planar_sample(const klayer_planar* h, double x, double y, double* W) {
    return guarded([&] {
        need(h, "handle");
        need(W, "W");
        *W = h->result.steady.W.at(x, y);
    });
}

klayer_status klayer_planar_thickness(const klayer_planar* h, double c, klayer_thickness_row* rows,
                                      size_t capacity, size_t* count) {
    return guarded([&] {
        need(h, "handle");
        need(count, "count");
        const auto report =
            curvature_thickness_report(h->result.steady.W, h->domain.shape, h->domain.samples, c, h->params);
        *count = report.size();
        if (rows == nullptr) return;
        for (std::size_t i = 0; i < std::min(capacity, report.size()); ++i) {
            rows[i] = {report[i].arclength, report[i].curvature, report[i].thickness, report[i].valid ? 1 : 0};
        }
    });
}

void klayer_planar_free(klayer_planar* h) { delete h; }

klayer_status klayer_spearman(const double* a, const double* b, size_t count, double* rho) {
    return guarded([&] {
        need(a, "a");
        need(b, "b");
        need(rho, "rho");
        *rho = spearman(std::vector<double>(a, a + count), std::vector<double>(b, b + count));
    });
}

klayer_status klayer_coefficient_of_variation(const double* v, size_t count, double* cv) {
    return guarded([&] {
        need(v, "v");
        need(cv, "cv");
        *cv = coefficient_of_variation(std::vector<double>(v, v + count));
    });
}

klayer_evolve_options klayer_evolve_options_default(void) { return {1e-3, 0.5, 10.0, 20, 1e-10, 0.01, 0.01}; }

klayer_status klayer_evolve_from(const klayer_radial* steady, const klayer_evolve_options* opts,
                                 const double* u0, const double* w0, klayer_evolution** out) {
    return guarded([&] {
        need(steady, "steady");
        need(u0, "u0");
        need(w0, "w0");
        need(out, "out");
        *out = nullptr;
        const klayer_evolve_options o = opts ? *opts : klayer_evolve_options_default();
        SchemeConfig cfg;
        cfg.dt = o.dt;
        cfg.cfl_safety = o.cfl_safety;
        cfg.t_end = o.t_end;
        cfg.output_every = o.output_every;
        cfg.stop_distance = o.stop_distance;
        const SteadyState& s = steady->result.steady;
        const GridPtr& grid = s.W.grid_ptr();
        const RadialProfile u(grid, std::vector<double>(u0, u0 + grid->size()));
        const RadialProfile w(grid, std::vector<double>(w0, w0 + grid->size()));
        auto evo = std::make_unique<klayer_evolution>();
        evo->series = evolve(u, w, steady->params, s, cfg);
        std::vector<double> t, d;
        for (const DiagnosticRow& row : evo->series.rows) {
            t.push_back(row.t);
            d.push_back(std::max(row.linf_u, row.linf_w));
            evo->max_run_drift = std::max(evo->max_run_drift, std::abs(row.mass - steady->params.m) / steady->params.m);
        }
        if (t.size() >= 10) {
            try {
                evo->mu_hat = fit_decay_rate(t, d);
            } catch (const Error&) {
            }
        }
        *out = evo.release();
    });
}

klayer_status klayer_evolve(const klayer_radial* steady, const klayer_evolve_options* opts, klayer_evolution** out) {
    if (steady == nullptr) return set_error(KLAYER_ERR_INVALID_ARGUMENT, "steady must not be null");
    const klayer_evolve_options o = opts ? *opts : klayer_evolve_options_default();
    const SteadyState& s = steady->result.steady;
    const RadialGrid& g = s.W.grid();
    const double R = g.R();
    std::vector<double> u(g.size()), w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.node(i);
        u[i] = s.U[i] * (1.0 + o.perturb_u * std::cos(std::numbers::pi * r / R));
        w[i] = s.W[i] * (1.0 + o.perturb_w * std::cos(0.5 * std::numbers::pi * r / R));
    }
    w.back() = steady->params.b;
    return klayer_evolve_from(steady, &o, u.data(), w.data(), out);
}

klayer_status klayer_evolution_summary_get(const klayer_evolution* h, klayer_evolution_summary* s) {
    return guarded([&] {
        need(h, "handle");
        need(s, "summary");
        s->rows = h->series.rows.size();
        s->steps = h->series.steps;
        s->renormalized = h->series.renormalized ? 1 : 0;
        s->initial_mass = h->series.initial_mass;
        s->max_step_mass_drift = h->series.max_step_mass_drift;
        s->max_run_mass_drift = h->max_run_drift;
        s->mu_hat = h->mu_hat;
    });
}

klayer_status klayer_evolution_rows(const klayer_evolution* h, klayer_diag_row* rows, size_t capacity) {
    return guarded([&] {
        need(h, "handle");
        need(rows, "rows");
        const auto& src = h->series.rows;
        for (std::size_t i = 0; i < std::min(capacity, src.size()); ++i) {
            rows[i] = {src[i].t, src[i].mass, src[i].linf_u, src[i].l2_u, src[i].linf_w, src[i].l2_w, src[i].energy};
        }
    });
}

klayer_status klayer_evolution_final(const klayer_evolution* h, double* u, double* w) {
    return guarded([&] {
        need(h, "handle");
        const EvolutionState& s = h->series.final_state;
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            if (u) u[i] = s.u[i];
            if (w) w[i] = std::exp(s.v[i]);
        }
    });
}

void klayer_evolution_free(klayer_evolution* h) { delete h; }

klayer_status klayer_fit_decay_rate(const double* t, const double* distance, size_t count, double* mu_hat) {
    return guarded([&] {
        need(t, "t");
        need(distance, "distance");
        need(mu_hat, "mu_hat");
        *mu_hat = fit_decay_rate(std::vector<double>(t, t + count), std::vector<double>(distance, distance + count));
    });
}

const char* klayer_quantity_name(klayer_quantity q) {
    switch (q) {
        case KLAYER_LAMBDA_EPS: return to_string(Quantity::LambdaEps);
        case KLAYER_SLOPE_W: return to_string(Quantity::SlopeW);
        case KLAYER_SLOPE_U: return to_string(Quantity::SlopeU);
        case KLAYER_THICKNESS: return to_string(Quantity::Thickness);
    }
    return "unknown";
}

klayer_status klayer_verify_expansions(const klayer_params* params, const klayer_radial_options* opts,
                                       const double* eps, size_t count, double c, klayer_expansion_row rows[4]) {
    return guarded([&] {
        need(eps, "eps");
        need(rows, "rows");
        const Params pr = to_params(params);
        const klayer_radial_options o = radial_opts(opts);
        const std::vector<double> list(eps, eps + count);
        require(list.size() >= 3, "expansion checks need at least three epsilons");
        for (std::size_t i = 1; i < list.size(); ++i) require(list[i] < list[i - 1], "epsilons must decrease");
        const auto sweep = run_radial_sweep(pr, o.R, list, sweep_config(o));
        const Quantity order[4] = {Quantity::LambdaEps, Quantity::SlopeW, Quantity::SlopeU, Quantity::Thickness};
        for (int k = 0; k < 4; ++k) {
            const ExpansionReport rep = expansion_from_sweep(order[k], sweep, pr, o.R, c);
            rows[k].quantity = static_cast<klayer_quantity>(k);
            rows[k].predicted = rep.predicted_coefficient;
            rows[k].extrapolated = rep.extrapolated_coefficient;
            rows[k].relative_gap = rep.relative_gap;
            rows[k].tolerance = kExpansionTolerance[k];
            rows[k].pass = rep.relative_gap <= kExpansionTolerance[k] ? 1 : 0;
        }
    });
}

klayer_status klayer_sweep_epsilon(const klayer_params* params, const klayer_radial_options* opts,
                                   const double* eps, size_t count, double c, klayer_sweep_row* rows) {
    return guarded([&] {
        need(eps, "eps");
        need(rows, "rows");
        const Params pr = to_params(params);
        const klayer_radial_options o = radial_opts(opts);
        require(count >= 1, "sweep needs at least one epsilon");
        const auto sweep = run_radial_sweep(pr, o.R, std::vector<double>(eps, eps + count), sweep_config(o));
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            const SteadyState& s = sweep[i].result.steady;
            rows[i] = {sweep[i].epsilon, s.lambda_eps, s.sigma, boundary_slope(s.W), boundary_slope(s.U),
                       thickness_or_nan(s.W, c)};
        }
    });
}

klayer_status klayer_sweep_p(const klayer_params* params, const klayer_radial_options* opts, const double* p,
                             size_t count, double width, klayer_p_limit_row* rows) {
    return guarded([&] {
        need(p, "p");
        need(rows, "rows");
        const Params pr = to_params(params);
        const klayer_radial_options o = radial_opts(opts);
        const auto table =
            verify_p_limit(pr, o.R, std::vector<double>(p, p + count), pr.epsilon, width, sweep_config(o));
        for (std::size_t i = 0; i < table.size(); ++i) {
            rows[i] = {table[i].p, table[i].sup_deviation, table[i].boundary_mass_fraction};
        }
    });
}

}  // extern "C"
