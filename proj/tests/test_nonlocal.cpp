#include <cmath>
#include <numbers>

#include "doctest.h"
#include "klayer/nonlocal.hpp"

using namespace klayer;

namespace {

Params disk(double eps) {
    Params p;
    p.epsilon = eps;
    p.n = 2;
    return p;
}

}  // namespace

TEST_CASE("constraint value is small for small lambda and increasing") {
    const Params pr = disk(0.01);
    const RadialDomain dom = RadialDomain::for_params(pr, 1.0, 1500, 0.1);
    CHECK(constraint_value(1e-8, pr, dom) < 1e-6);

    double prev = 0.0;
    for (double lambda = 0.05; lambda < 200.0; lambda *= 2.0) {
        const double g = constraint_value(lambda, pr, dom);
        CHECK(g > prev * (1.0 + 1e-9));
        prev = g;
    }
    CHECK_THROWS_AS(constraint_value(0.0, pr, dom), Error);
}

TEST_CASE("lower bracket obeys the maximum principle bound") {
    const Params pr = disk(0.01);
    const RadialDomain dom = RadialDomain::for_params(pr, 1.0, 1500, 0.1);
    const double lambda = pr.m / (std::pow(pr.b, pr.p) * dom.measure());
    CHECK(constraint_value(lambda, pr, dom) <= pr.m + 1e-12);
    CHECK(dom.measure() == doctest::Approx(std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("steady state invariants") {
    for (double eps : {0.05, 0.01, 0.002}) {
        for (int n = 1; n <= 3; ++n) {
            Params pr = disk(eps);
            pr.n = n;
            pr.m = 1.7;
            pr.b = 0.8;
            const RadialDomain dom = RadialDomain::for_params(pr, 1.3, 2000, 0.1);
            const NonlocalResult res = solve_nonlocal(pr, dom);
            const SteadyState& s = res.steady;
            CHECK(res.constraint_residual <= 1e-8);
            CHECK(std::abs(s.amplitude * s.lambda_eps - 1.0) <= 1e-10);
            CHECK(std::abs(integrate_radial(s.U) - pr.m) <= 1e-8 * pr.m);
            CHECK(s.sigma == doctest::Approx(eps * s.lambda_eps).epsilon(1e-7));
            for (std::size_t i = 0; i < s.W.size(); ++i) {
                const double expected = s.amplitude * std::pow(s.W[i], pr.p);
                CHECK(std::abs(s.U[i] - expected) <= 1e-10 * expected);
            }
            // fixed point: re-solving at the returned sigma reproduces m
            const RadialProfile W = dom.solve(s.sigma, pr, nullptr);
            const double g = (eps / s.sigma) * dom.integrate_power(W, pr.p);
            CHECK(std::abs(g - pr.m) / pr.m <= 2e-8);
        }
    }
}

TEST_CASE("bracket seeds do not change the root") {
    const Params pr = disk(0.005);
    const RadialDomain dom = RadialDomain::for_params(pr, 1.0, 2000, 0.1);
    const NonlocalResult a = solve_nonlocal(pr, dom);
    NonlocalConfig cfg;
    cfg.lower_seed = 0.5;
    cfg.upper_seed = 2.0;
    const NonlocalResult b = solve_nonlocal(pr, dom, cfg);
    cfg.lower_seed = 4.0;  // starts above the root; the search walks down
    const NonlocalResult c = solve_nonlocal(pr, dom, cfg);
    CHECK(std::abs(a.lambda - b.lambda) / a.lambda <= 1e-7);
    CHECK(std::abs(a.lambda - c.lambda) / a.lambda <= 1e-7);
    CHECK(std::abs(a.steady.lambda_eps - b.steady.lambda_eps) / a.steady.lambda_eps <= 1e-8 * 2);
}

TEST_CASE("bracket failure is reported") {
    const Params pr = disk(0.01);
    const RadialDomain dom = RadialDomain::for_params(pr, 1.0, 500, 0.1);
    NonlocalConfig cfg;
    cfg.max_doublings = 1;
    try {
        solve_nonlocal(pr, dom, cfg);
        FAIL("expected bracket failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BracketFailure);
    }
}

TEST_CASE("lambda_eps / eps stays bounded over an epsilon sweep") {
    double lo = 1e300, hi = 0.0;
    for (double eps : {0.02, 0.01, 0.005, 0.0025}) {
        const Params pr = disk(eps);
        const NonlocalResult r = solve_nonlocal(pr, RadialDomain::for_params(pr, 1.0, 2000, 0.1));
        const double ratio = r.steady.lambda_eps / eps;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(lo > 10.0);
    CHECK(hi < 200.0);
    CHECK(hi / lo < 2.0);
}

TEST_CASE("invalid configuration") {
    NonlocalConfig cfg;
    cfg.tol_rel = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
