#include "klayer/evolve_radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "klayer/radial_steady.hpp"

namespace klayer {

void SchemeConfig::validate() const {
    require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    require(cfl_safety > 0.0 && cfl_safety < 1.0, "cfl_safety must lie in (0, 1)");
    require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
    require(output_every >= 1, "output_every must be at least 1");
    require(stop_distance >= 0.0, "stop_distance must be non-negative");
}

namespace {

// B(x) = x / (e^x - 1).
double bernoulli(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

// Grid-dependent coefficients shared by every step.
class Scheme {
public:
    explicit Scheme(const GridPtr& grid) : grid_(grid) {
        const RadialGrid& g = *grid;
        const std::size_t N = g.last();
        kappa_.resize(N);
        for (std::size_t i = 0; i < N; ++i) kappa_[i] = g.face_conductance(i);
        stencil_.resize(N);
        for (std::size_t i = 0; i < N; ++i) stencil_[i] = radial_stencil(g, i);
        h_min_ = g.min_spacing();
    }

    double dt_limit(const std::vector<double>& v, double p, double cfl) const {
        const RadialGrid& g = *grid_;
        double speed = 0.0;
        for (std::size_t i = 0; i < kappa_.size(); ++i) {
            speed = std::max(speed, p * std::abs(v[i + 1] - v[i]) / g.spacing(i + 1));
        }
        return speed > 0.0 ? cfl * h_min_ / speed : std::numeric_limits<double>::infinity();
    }

    void advance(std::vector<double>& u, std::vector<double>& v, double dt, const Params& params) const {
        const RadialGrid& g = *grid_;
        const auto w = g.weights();
        const std::size_t N = g.last();
        const double p = params.p, eps = params.epsilon;

        // u: (w/dt - D) u^{k+1} = w/dt u^k + E(u^k, v^k)
        std::vector<double> lo(N + 1, 0.0), di(N + 1), up(N + 1, 0.0), rhs(N + 1);
        for (std::size_t i = 0; i <= N; ++i) {
            di[i] = w[i] / dt;
            rhs[i] = w[i] / dt * u[i];
        }
        for (std::size_t i = 0; i < N; ++i) {
            const double k = kappa_[i];
            di[i] += k;
            di[i + 1] += k;
            up[i] = -k;
            lo[i + 1] = -k;
            const double x = p * (v[i + 1] - v[i]);
            const double flux = k * ((bernoulli(x) - 1.0) * u[i + 1] - (bernoulli(-x) - 1.0) * u[i]);
            rhs[i] += flux;
            rhs[i + 1] -= flux;
        }
        solve_tridiagonal(lo, di, up, rhs);
        for (std::size_t i = 0; i <= N; ++i) {
            if (!(rhs[i] > 0.0) || !std::isfinite(rhs[i])) {
                std::ostringstream msg;
                msg << "cell density lost positivity at r = " << g.node(i);
                fail(ErrorCode::Positivity, msg.str());
            }
        }
        u.swap(rhs);

        // v: (1/dt - eps L) v^{k+1} = v^k/dt + eps G(v^k) - u^{k+1}, v_N = ln b
        std::vector<double> ev(N + 1);
        for (std::size_t i = 0; i <= N; ++i) ev[i] = std::exp(v[i]);
        std::vector<double> vl(N, 0.0), vd(N), vu(N, 0.0), vr(N);
        for (std::size_t i = 0; i < N; ++i) {
            const RadialStencil& s = stencil_[i];
            const double vm = i > 0 ? v[i - 1] : 0.0, em = i > 0 ? ev[i - 1] : 0.0;
            const double lap_v = s.lo * vm + s.mid * v[i] + s.hi * v[i + 1];
            const double lap_e = s.lo * em + s.mid * ev[i] + s.hi * ev[i + 1];
            const double G = lap_e / ev[i] - lap_v;
            vl[i] = -eps * s.lo;
            vd[i] = 1.0 / dt - eps * s.mid;
            vu[i] = -eps * s.hi;
            vr[i] = v[i] / dt + eps * G - u[i];
        }
        const double vb = std::log(params.b);
        vr[N - 1] -= vu[N - 1] * vb;
        solve_tridiagonal(vl, vd, vu, vr);
        for (std::size_t i = 0; i < N; ++i) v[i] = vr[i];
        v[N] = vb;
    }

    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& kappa() const { return kappa_; }

private:
    GridPtr grid_;
    std::vector<double> kappa_;
    std::vector<RadialStencil> stencil_;
    double h_min_ = 0.0;
};

void check_state(const EvolutionState& state, const SteadyState& steady, const Params& params) {
    params.validate();
    require(state.u.grid_ptr() != nullptr && state.v.grid_ptr() != nullptr, "state fields need a grid");
    require(state.u.grid_ptr() == state.v.grid_ptr(), "u and v must share a grid");
    require(steady.U.grid_ptr() == state.u.grid_ptr(), "steady state must live on the state grid");
    require(state.u.grid().dimension() == params.n, "params dimension does not match the grid");
}

}  // namespace

double discrete_mass(const RadialProfile& u) { return integrate_radial(u); }

double advective_dt_limit(const EvolutionState& state, const Params& params, double cfl_safety) {
    const Scheme scheme(state.u.grid_ptr());
    return scheme.dt_limit(std::vector<double>(state.v.values().begin(), state.v.values().end()), params.p,
                           cfl_safety);
}

EvolutionState step(const EvolutionState& state, const SteadyState& steady, const Params& params,
                    const SchemeConfig& cfg) {
    check_state(state, steady, params);
    cfg.validate();
    const Scheme scheme(state.u.grid_ptr());
    std::vector<double> u(state.u.values().begin(), state.u.values().end());
    std::vector<double> v(state.v.values().begin(), state.v.values().end());
    if (cfg.dt > scheme.dt_limit(v, params.p, cfg.cfl_safety)) {
        fail(ErrorCode::TimeStep, "time step exceeds the advective limit");
    }
    scheme.advance(u, v, cfg.dt, params);
    return {state.t + cfg.dt, RadialProfile(state.u.grid_ptr(), std::move(u)),
            RadialProfile(state.u.grid_ptr(), std::move(v))};
}

std::vector<double> antiderivative(const EvolutionState& state, const SteadyState& steady) {
    const RadialGrid& g = state.u.grid();
    const auto w = g.weights();
    const std::size_t N = g.last();
    const double omega = sphere_area(g.dimension());
    std::vector<double> phi(N + 1);
    double S = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        S += w[i] * (state.u[i] - steady.U[i]);
        // mean of r^{n-1} over the interval as the face weight
        const double mean_r = g.face_conductance(i) * g.spacing(i + 1) / omega;
        phi[i] = S / (omega * mean_r);
    }
    S += w[N] * (state.u[N] - steady.U[N]);
    phi[N] = S / (omega * std::pow(g.R(), g.dimension() - 1));
    return phi;
}

double lyapunov_energy(const EvolutionState& state, const SteadyState& steady, const Params& params) {
    const RadialGrid& g = state.u.grid();
    const auto w = g.weights();
    const std::size_t N = g.last();
    // phi-part: sum over intervals of omega * mean(r^{n-1}) h * phi^2 / U_face
    const std::vector<double> phi = antiderivative(state, steady);
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double h = g.spacing(i + 1);
        const double measure = g.face_conductance(i) * h * h;
        const double Uf = 0.5 * (steady.U[i] + steady.U[i + 1]);
        e += measure * phi[i] * phi[i] / Uf;
    }
    for (std::size_t i = 0; i <= N; ++i) {
        const double psi = state.v[i] - std::log(steady.W[i]);
        e += params.p * w[i] * psi * psi;
    }
    return e;
}

DiagnosticRow diagnostics(const EvolutionState& state, const SteadyState& steady, const Params& params) {
    const auto w = state.u.grid().weights();
    DiagnosticRow row;
    row.t = state.t;
    double su = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double du = state.u[i] - steady.U[i];
        const double dw = std::exp(state.v[i]) - steady.W[i];
        row.linf_u = std::max(row.linf_u, std::abs(du));
        row.linf_w = std::max(row.linf_w, std::abs(dw));
        su += w[i] * du * du;
        sw += w[i] * dw * dw;
    }
    row.l2_u = std::sqrt(su);
    row.l2_w = std::sqrt(sw);
    row.mass = discrete_mass(state.u);
    row.energy = lyapunov_energy(state, steady, params);
    return row;
}

EvolutionSeries evolve(const RadialProfile& u0, const RadialProfile& w0, const Params& params,
                       const SteadyState& steady, const SchemeConfig& cfg) {
    params.validate();
    cfg.validate();
    require(u0.grid_ptr() == w0.grid_ptr() && u0.grid_ptr() == steady.U.grid_ptr(),
            "initial data and steady state must share a grid");
    require(params.n >= 1 && params.n <= 3, "evolution supports 1 <= n <= 3");
    for (double x : u0.values()) require(x > 0.0, "u0 must be positive");
    for (double x : w0.values()) require(x > 0.0, "w0 must be positive");
    require(std::abs(w0.back() - params.b) <= 1e-12 * params.b, "w0 must equal b at r = R");

    EvolutionSeries out;
    out.initial_mass = discrete_mass(u0);
    std::vector<double> u(u0.values().begin(), u0.values().end());
    if (std::abs(out.initial_mass - params.m) > 1e-14 * params.m) {
        const double s = params.m / out.initial_mass;
        for (double& x : u) x *= s;
        out.renormalized = true;
    }
    std::vector<double> v(w0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(w0[i]);
    v.back() = std::log(params.b);

    const GridPtr& grid = u0.grid_ptr();
    const Scheme scheme(grid);
    EvolutionState state{0.0, RadialProfile(grid, u), RadialProfile(grid, v)};
    out.rows.push_back(diagnostics(state, steady, params));

    double dt = cfg.dt;
    double mass = out.rows.front().mass;
    long since_output = 0;
    bool done = false;
    while (!done) {
        const double limit = scheme.dt_limit(v, params.p, cfg.cfl_safety);
        while (dt > limit) dt *= 0.5;
        // a remainder within rounding of dt is taken in this step
        const double remaining = cfg.t_end - state.t;
        const bool last = remaining <= dt + 1e-9 * cfg.t_end && remaining <= limit;
        const double h = last ? remaining : dt;
        std::vector<double> un = u, vn = v;
        scheme.advance(un, vn, h, params);
        u.swap(un);
        v.swap(vn);
        state.t = last ? cfg.t_end : state.t + h;
        ++out.steps;
        const double new_mass = integrate_radial(RadialProfile(grid, u));
        out.max_step_mass_drift = std::max(out.max_step_mass_drift, std::abs(new_mass - mass) / mass);
        mass = new_mass;

        bool record = ++since_output >= cfg.output_every || last;
        if (cfg.stop_distance > 0.0) {
            double du = 0.0, dw = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                du = std::max(du, std::abs(u[i] - steady.U[i]));
                dw = std::max(dw, std::abs(std::exp(v[i]) - steady.W[i]));
            }
            if (std::max(du, dw) < cfg.stop_distance) record = done = true;
        }
        if (last) done = true;
        if (record) {
            state.u = RadialProfile(grid, u);
            state.v = RadialProfile(grid, v);
            out.rows.push_back(diagnostics(state, steady, params));
            since_output = 0;
        }
    }
    state.u = RadialProfile(grid, u);
    state.v = RadialProfile(grid, v);
    out.final_state = std::move(state);
    return out;
}

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& distance) {
    require(t.size() == distance.size(), "time and distance series differ in length");
    require(t.size() >= 10, "decay fit needs at least 10 samples");
    double peak = 0.0;
    for (double d : distance) peak = std::max(peak, d);
    require(peak > 0.0, "decay fit needs positive distances");
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * peak;
    std::size_t end = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(distance[i] > floor)) {
            end = i;
            break;
        }
    }
    require(end >= 2, "distances reach the rounding floor immediately");
    const double t_end = t[end - 1];
    const double t_start = t.front() + 0.5 * (t_end - t.front());
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
        if (t[i] < t_start) continue;
        const double y = std::log(distance[i]);
        n += 1.0;
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
    }
    require(n >= 2.0, "decay fit window holds fewer than two samples");
    const double det = n * sxx - sx * sx;
    require(det > 0.0, "decay fit window has no time spread");
    return -(n * sxy - sx * sy) / det;
}

}  // namespace klayer
