#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "klayer/asymptotics.hpp"

using namespace klayer;

namespace {

constexpr double kPi = std::numbers::pi;

Params base(int n = 2) {
    Params p;
    p.n = n;
    return p;
}

}  // namespace

TEST_CASE("leading coefficients on the unit disk") {
    const Params pr = base();
    CHECK(slope_W_leading(pr, 1.0) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
    CHECK(slope_U_leading(pr, 1.0) == doctest::Approx(16.0 / (32.0 * std::pow(2.0 * kPi, 3))).epsilon(1e-14));
    CHECK(slope_U_leading(pr, 1.0) == doctest::Approx(2.016e-3).epsilon(1e-3));
    CHECK(lambda_leading(pr, 1.0) == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-14));
    CHECK(thickness_leading(0.5, pr, 1.0) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
}

TEST_CASE("leading coefficients in one dimension use omega_1 = 2") {
    const Params pr = base(1);
    CHECK(slope_W_leading(pr, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(lambda_leading(pr, 1.0) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("scaling in m and b") {
    Params pr = base();
    Params pm = pr;
    pm.m = 2.0;
    CHECK(slope_W_leading(pm, 1.0) == doctest::Approx(2.0 * slope_W_leading(pr, 1.0)));
    CHECK(slope_U_leading(pm, 1.0) == doctest::Approx(8.0 * slope_U_leading(pr, 1.0)));
    CHECK(lambda_leading(pm, 1.0) == doctest::Approx(0.25 * lambda_leading(pr, 1.0)));
    Params pb = pr;
    pb.b = 3.0;
    CHECK(slope_U_leading(pb, 1.0) == slope_U_leading(pr, 1.0));
}

TEST_CASE("thickness coefficient limits and errors") {
    const Params pr = base();
    CHECK(thickness_leading(1.0 - 1e-12, pr, 1.0) < 1e-10);
    CHECK_THROWS_AS(thickness_leading(1.5, pr, 1.0), Error);
    CHECK_THROWS_AS(thickness_leading(0.0, pr, 1.0), Error);
}

TEST_CASE("property: both thickness forms agree") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        Params pr;
        pr.n = 1 + i % 4;
        pr.p = 0.2 + 20.0 * U(rng);
        pr.b = 0.1 + 5.0 * U(rng);
        pr.m = 0.1 + 5.0 * U(rng);
        const double R = 0.1 + 4.0 * U(rng);
        const double c = pr.b * (0.01 + 0.98 * U(rng));
        const double a = thickness_leading(c, pr, R);
        CHECK(std::abs(a - thickness_leading_cp_form(c, pr, R)) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("measure_thickness examples") {
    Params pr = base(1);
    auto g = make_graded_grid(10.0, 1, 0.5, 400);
    auto W = sample_profile(g, [&](double r) { return barrier_lower(r, 1.0, pr, 10.0); });
    CHECK(measure_thickness(W, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
    CHECK(measure_thickness(W, 1.0) == 0.0);
    try {
        measure_thickness(W, W[0] * 0.5);
        FAIL("expected no crossing");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCrossing);
    }
}

TEST_CASE("log model fit recovers exact data") {
    std::vector<double> eps{4e-3, 2e-3, 1e-3, 5e-4};
    std::vector<double> y;
    for (double e : eps) y.push_back(3.0 - 7.0 * e * std::log(1.0 / e));
    const auto [c0, c1] = extrapolate_log_model(eps, y);
    CHECK(c0 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c1 == doctest::Approx(-7.0).epsilon(1e-10));
}

TEST_CASE("slope of the local problem follows the two-term expansion") {
    const Params pr = base();
    for (double sigma : {1e-4, 2.5e-5}) {
        auto g = make_graded_grid(1.0, 2, 0.05 * layer_width(sigma, pr), 3000);
        const RadialProfile W = solve_local_radial(sigma, pr, g);
        const double leading = std::sqrt(0.5) / std::sqrt(sigma);
        const double two_term = slope_W_local(sigma, pr, 1.0);
        // the remainder is o(1); the two-term form is closer than the leading term
        CHECK(std::abs(boundary_slope(W) - two_term) < std::abs(boundary_slope(W) - leading));
        CHECK(std::abs(boundary_slope(W) - two_term) / two_term < 1e-2);
    }
}

TEST_CASE("expansion report on a short sweep") {
    const Params pr = base();
    RadialSweepConfig cfg;
    cfg.grid_count = 2000;
    const auto rep = verify_expansion(Quantity::LambdaEps, pr, 1.0, {8e-3, 4e-3, 2e-3}, 0.5, cfg);
    CHECK(rep.epsilons.size() == 3);
    CHECK(rep.computed.size() == 3);
    CHECK(rep.predicted_leading[0] == doctest::Approx(8.0 * kPi * kPi * 8e-3));
    CHECK(rep.relative_gap < 0.1);
    CHECK_THROWS_AS(verify_expansion(Quantity::LambdaEps, pr, 1.0, {2e-3, 4e-3, 8e-3}, 0.5, cfg), Error);
    CHECK_THROWS_AS(verify_expansion(Quantity::LambdaEps, pr, 1.0, {4e-3, 2e-3}, 0.5, cfg), Error);
}

TEST_CASE("p-limit table") {
    Params pr = base();
    RadialSweepConfig cfg;
    cfg.grid_count = 2000;
    const auto rows = verify_p_limit(pr, 1.0, {5.0, 10.0, 20.0}, 0.1, 0.1, cfg);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].sup_deviation < rows[i - 1].sup_deviation);
        CHECK(rows[i].boundary_mass_fraction > rows[i - 1].boundary_mass_fraction);
    }
    const auto single = verify_p_limit(pr, 1.0, {5.0}, 0.1, 0.1, cfg);
    CHECK(single.size() == 1);
}

TEST_CASE("property: envelope constants and interior smallness are stable over epsilon") {
    const Params pr = base();
    RadialSweepConfig cfg;
    cfg.grid_count = 3000;
    const std::vector<double> eps{8e-3, 4e-3, 2e-3, 1e-3};
    const auto sweep = run_radial_sweep(pr, 1.0, eps, cfg);
    double ratio_min = 1e300, ratio_max = 0.0, c1_min = 1e300, c1_max = 0.0;
    for (const auto& pt : sweep) {
        const EnvelopeFit fit = fit_envelope(pt.result.steady.W, pt.epsilon, pr.p, 5.0 * pt.epsilon);
        CHECK(fit.r1 > 0.0);
        CHECK(fit.r1 <= 1.0);
        CHECK(fit.r2 >= 1.0);
        ratio_min = std::min(ratio_min, fit.r2 / fit.r1);
        ratio_max = std::max(ratio_max, fit.r2 / fit.r1);
        const double c1 = interior_smallness(pt.result.steady.W, pt.epsilon, pr.p, 0.2);
        c1_min = std::min(c1_min, c1);
        c1_max = std::max(c1_max, c1);
    }
    CHECK(ratio_max < 5.0);
    CHECK(ratio_max / ratio_min < 1.1);
    CHECK(c1_max / c1_min < 2.0);
}
