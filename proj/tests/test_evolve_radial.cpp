#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "klayer/evolve_radial.hpp"
#include "klayer/nonlocal.hpp"

using namespace klayer;

namespace {

Params disk() {
    Params p;
    p.epsilon = 0.05;
    p.n = 2;
    return p;
}

struct Fixture {
    Params params = disk();
    SteadyState steady;
    Fixture() {
        LocalSolveConfig local;
        local.newton_tol = 1e-12;
        const RadialDomain dom = RadialDomain::for_params(params, 1.0, 200, 0.1, local);
        NonlocalConfig nl;
        nl.tol_rel = 1e-14;
        steady = solve_nonlocal(params, dom, nl).steady;
    }
    const GridPtr& grid() const { return steady.U.grid_ptr(); }
    RadialProfile log_w() const {
        std::vector<double> v(steady.W.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(steady.W[i]);
        v.back() = std::log(params.b);
        return RadialProfile(grid(), v);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

double linf(const RadialProfile& a, const RadialProfile& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

RadialProfile perturbed_u(const Fixture& f, double amp) {
    const double R = f.grid()->R();
    return sample_profile(f.grid(), [&](double r) {
        return f.steady.U.at(r) * (1.0 + amp * std::cos(std::numbers::pi * r / R));
    });
}

}  // namespace

TEST_CASE("steady state is a fixed point of the step") {
    const Fixture& f = fixture();
    EvolutionState s{0.0, f.steady.U, f.log_w()};
    SchemeConfig cfg;
    cfg.dt = 4e-4;
    for (int k = 0; k < 100; ++k) s = step(s, f.steady, f.params, cfg);
    CHECK(linf(s.u, f.steady.U) <= 1e-8);
    CHECK(s.v.back() == std::log(f.params.b));
    CHECK(s.t == doctest::Approx(0.04));
}

TEST_CASE("mass is conserved per step and over a run") {
    const Fixture& f = fixture();
    RadialProfile u0 = perturbed_u(f, 0.01);
    const double s = f.params.m / discrete_mass(u0);
    for (double& x : u0.mutable_values()) x *= s;
    EvolutionState st{0.0, u0, f.log_w()};
    SchemeConfig cfg;
    cfg.dt = 4e-4;
    for (int k = 0; k < 50; ++k) {
        const double before = discrete_mass(st.u);
        st = step(st, f.steady, f.params, cfg);
        CHECK(std::abs(discrete_mass(st.u) - before) <= 1e-12 * before);
    }
    CHECK(std::abs(discrete_mass(st.u) - f.params.m) <= 1e-9);
}

TEST_CASE("step rejects an advective CFL violation") {
    const Fixture& f = fixture();
    EvolutionState s{0.0, f.steady.U, f.log_w()};
    const double limit = advective_dt_limit(s, f.params, 0.5);
    REQUIRE(std::isfinite(limit));
    SchemeConfig cfg;
    cfg.dt = 2.0 * limit;
    try {
        step(s, f.steady, f.params, cfg);
        FAIL("expected a time-step error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TimeStep);
    }
}

TEST_CASE("scheme config validation") {
    SchemeConfig cfg;
    cfg.cfl_safety = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("lyapunov energy vanishes at the steady state") {
    const Fixture& f = fixture();
    const EvolutionState s{0.0, f.steady.U, f.log_w()};
    CHECK(std::abs(lyapunov_energy(s, f.steady, f.params)) <= 1e-14);
    const std::vector<double> phi = antiderivative(s, f.steady);
    for (double x : phi) CHECK(x == 0.0);
}

TEST_CASE("antiderivative vanishes at R when the masses match") {
    const Fixture& f = fixture();
    RadialProfile u0 = perturbed_u(f, 0.05);
    const double s = f.params.m / discrete_mass(u0);
    for (double& x : u0.mutable_values()) x *= s;
    const EvolutionState st{0.0, u0, f.log_w()};
    const std::vector<double> phi = antiderivative(st, f.steady);
    double peak = 0.0;
    for (double x : phi) peak = std::max(peak, std::abs(x));
    CHECK(peak > 1e-4);
    CHECK(std::abs(phi.back()) <= 1e-13);
    CHECK(lyapunov_energy(st, f.steady, f.params) > 0.0);
}

TEST_CASE("decay fit on synthetic series") {
    std::vector<double> t, d, c;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.05 * i);
        d.push_back(3.0 * std::exp(-2.0 * t.back()));
        c.push_back(0.7);
    }
    CHECK(fit_decay_rate(t, d) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(fit_decay_rate(t, c)) <= 1e-10);

    // distances that hit zero are cut off before the fit
    std::vector<double> z = d;
    for (std::size_t i = 60; i < z.size(); ++i) z[i] = 0.0;
    CHECK(fit_decay_rate(t, z) == doctest::Approx(2.0).epsilon(1e-6));

    CHECK_THROWS_AS(fit_decay_rate({0.0, 1.0}, {1.0, 0.5}), Error);
}

TEST_CASE("perturbed run converges with non-increasing energy") {
    const Fixture& f = fixture();
    SchemeConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 12.0;
    cfg.output_every = 20;
    const RadialProfile w0 = sample_profile(f.grid(), [&](double r) { return f.steady.W.at(r); });
    const EvolutionSeries series = evolve(perturbed_u(f, 0.01), w0, f.params, f.steady, cfg);
    CHECK(series.renormalized);
    CHECK(series.max_step_mass_drift <= 1e-12);
    for (const DiagnosticRow& row : series.rows) CHECK(std::abs(row.mass - f.params.m) <= 1e-9);

    const auto& rows = series.rows;
    REQUIRE(rows.size() > 10);
    const double d0 = std::max(rows.front().linf_u, rows.front().linf_w);
    const double d1 = std::max(rows.back().linf_u, rows.back().linf_w);
    CHECK(d1 < 1e-3 * d0);
    for (std::size_t k = rows.size() / 10 + 1; k < rows.size(); ++k) {
        CHECK(rows[k].energy <= rows[k - 1].energy * (1.0 + 1e-10));
    }
    std::vector<double> t, d;
    for (const auto& r : rows) {
        t.push_back(r.t);
        d.push_back(std::max(r.linf_u, r.linf_w));
    }
    CHECK(fit_decay_rate(t, d) > 0.0);
}

TEST_CASE("perturbing only w returns to the same steady state") {
    const Fixture& f = fixture();
    SchemeConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 40.0;
    cfg.output_every = 50;
    cfg.stop_distance = 1e-9;
    const double R = f.grid()->R();
    const RadialProfile w0 = sample_profile(f.grid(), [&](double r) {
        return f.steady.W.at(r) * (1.0 + 0.01 * (1.0 - (r / R) * (r / R)));
    });
    const EvolutionSeries series = evolve(f.steady.U, w0, f.params, f.steady, cfg);
    CHECK_FALSE(series.renormalized);
    CHECK(linf(series.final_state.u, f.steady.U) <= 1e-6);
}

TEST_CASE("distinct perturbations with equal mass share the attractor") {
    const Fixture& f = fixture();
    SchemeConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 40.0;
    cfg.output_every = 100;
    cfg.stop_distance = 1e-9;
    const double R = f.grid()->R();
    const RadialProfile ua = perturbed_u(f, 0.01);
    const RadialProfile ub = sample_profile(f.grid(), [&](double r) {
        return f.steady.U.at(r) * (1.0 - 0.01 * (r / R) * (r / R));
    });
    const RadialProfile wa = sample_profile(f.grid(), [&](double r) { return f.steady.W.at(r); });
    const RadialProfile wb = sample_profile(f.grid(), [&](double r) {
        return f.steady.W.at(r) * (1.0 + 0.005 * (1.0 - r / R));
    });
    const EvolutionSeries a = evolve(ua, wa, f.params, f.steady, cfg);
    const EvolutionSeries b = evolve(ub, wb, f.params, f.steady, cfg);
    CHECK(a.renormalized);
    CHECK(b.renormalized);
    CHECK(linf(a.final_state.u, b.final_state.u) <= 1e-6);
    CHECK(linf(a.final_state.v, b.final_state.v) <= 1e-6);
    for (double x : a.final_state.u.values()) CHECK(x > 0.0);
}
