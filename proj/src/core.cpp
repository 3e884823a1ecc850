#include "klayer/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace klayer {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::NoConvergence: return "no-convergence";
        case ErrorCode::BracketFailure: return "bracket-failure";
        case ErrorCode::NoCrossing: return "no-crossing";
        case ErrorCode::TimeStep: return "time-step";
        case ErrorCode::Positivity: return "positivity-failure";
        case ErrorCode::Singularity: return "singularity";
        case ErrorCode::Io: return "io";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

void Params::validate() const {
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    require(std::isfinite(p) && p > 0.0, "p must be positive");
    require(std::isfinite(b) && b > 0.0, "b must be positive");
    require(std::isfinite(m) && m > 0.0, "m must be positive");
    require(n >= 1, "dimension n must be at least 1");
}

double sphere_area(int n) {
    require(n >= 1, "dimension n must be at least 1");
    const double half = 0.5 * n;
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double ball_volume(int n, double R) { return sphere_area(n) * std::pow(R, n) / n; }

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return c;
}

// int_0^h (a+s)^{n-1} s ds / h, int_0^h (a+s)^{n-1} (h-s) ds / h and
// int_0^h (a+s)^{n-1} ds, expanded in powers of h so nothing cancels.
struct IntervalMoments {
    double rising = 0.0;
    double falling = 0.0;
    double total = 0.0;
};

IntervalMoments interval_moments(double a, double h, int n) {
    IntervalMoments mo;
    for (int j = 0; j <= n - 1; ++j) {
        const double c = binomial(n - 1, j) * std::pow(a, n - 1 - j) * std::pow(h, j + 1);
        mo.rising += c / (j + 2);
        mo.falling += c / ((j + 1.0) * (j + 2.0));
        mo.total += c / (j + 1);
    }
    return mo;
}

// 8-point Gauss-Legendre on [-1, 1].
constexpr double kGaussX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
constexpr double kGaussW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

}  // namespace

RadialGrid::RadialGrid(std::vector<double> nodes, int dimension)
    : nodes_(std::move(nodes)), dimension_(dimension) {
    require(dimension_ >= 1, "grid dimension must be at least 1");
    require(nodes_.size() >= 2, "radial grid needs at least two nodes");
    require(nodes_.front() == 0.0, "radial grid must start at r = 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        require(std::isfinite(nodes_[i]) && nodes_[i] > nodes_[i - 1],
                "radial grid nodes must be strictly increasing");
    }
    const double omega = sphere_area(dimension_);
    weights_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        const IntervalMoments mo = interval_moments(nodes_[i], nodes_[i + 1] - nodes_[i], dimension_);
        weights_[i] += omega * mo.falling;
        weights_[i + 1] += omega * mo.rising;
    }
}

double RadialGrid::min_spacing() const {
    double h = nodes_.back();
    for (std::size_t i = 1; i < nodes_.size(); ++i) h = std::min(h, spacing(i));
    return h;
}

double RadialGrid::face_conductance(std::size_t i) const {
    const double h = nodes_[i + 1] - nodes_[i];
    return sphere_area(dimension_) * interval_moments(nodes_[i], h, dimension_).total / (h * h);
}

std::size_t RadialGrid::nodes_within(double width) const {
    const double R = nodes_.back();
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](double r) { return R - r <= width; }));
}

GridPtr make_graded_grid(double R, int n, double layer_width, int count) {
    require(std::isfinite(R) && R > 0.0, "grid radius must be positive");
    require(count >= 16, "graded grid needs at least 16 nodes");
    require(layer_width > 0.0 && layer_width < R, "layer width must lie in (0, R)");

    const double h0 = layer_width / 10.0;
    if (h0 * (count - 1) >= R) {
        // Too many nodes for a growing spacing: uniform at h0, the short
        // leftover interval absorbed next to r = 0.
        const auto full = static_cast<int>(std::floor(R / h0));
        std::vector<double> nodes;
        nodes.reserve(full + 2);
        nodes.push_back(0.0);
        const double rest = R - full * h0;
        if (rest > 0.5 * h0 || full == 0) nodes.push_back(rest);
        for (int k = full - 1; k >= 1; --k) nodes.push_back(R - k * h0);
        nodes.push_back(R);
        return std::make_shared<RadialGrid>(std::move(nodes), n);
    }

    const int intervals = count - 1;
    auto total = [&](double q) {
        if (std::abs(q - 1.0) < 1e-14) return h0 * intervals;
        return h0 * (std::pow(q, intervals) - 1.0) / (q - 1.0);
    };

    double lo = 1.0, hi = 2.0;
    while (total(hi) < R) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < R ? lo : hi) = mid;
    }
    const double ratio = 0.5 * (lo + hi);

    std::vector<double> nodes(count);
    nodes[0] = 0.0;
    double h = h0 * std::pow(ratio, intervals - 1);
    const double innermost = h;
    for (int k = 1; k < intervals; ++k) {
        nodes[k] = nodes[k - 1] + h;
        h /= ratio;
    }
    nodes[intervals] = R;
    if (nodes[intervals - 1] >= R) fail(ErrorCode::InvalidArgument, "graded grid construction failed");
    // Rounding in the ratio can leave the innermost interval far shorter
    // than intended; fold it into its neighbour.
    if (nodes[1] < 0.5 * innermost) nodes.erase(nodes.begin() + 1);
    return std::make_shared<RadialGrid>(std::move(nodes), n);
}

GridPtr make_uniform_grid(double R, int n, int count) {
    require(R > 0.0 && count >= 2, "uniform grid needs R > 0 and two nodes");
    std::vector<double> nodes(count);
    for (int i = 0; i < count; ++i) nodes[i] = R * i / (count - 1);
    nodes.back() = R;
    return std::make_shared<RadialGrid>(std::move(nodes), n);
}

RadialProfile::RadialProfile(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "profile needs a grid");
    require(values_.size() == grid_->size(), "profile size does not match its grid");
    for (double v : values_) require(std::isfinite(v), "profile values must be finite");
}

double RadialProfile::at(double r) const {
    const auto nodes = grid_->nodes();
    if (r <= nodes.front()) return values_.front();
    if (r >= nodes.back()) return values_.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    const double t = (r - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    return (1.0 - t) * values_[i - 1] + t * values_[i];
}

double integrate_radial(const RadialProfile& f) {
    const auto w = f.grid().weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * f[i];
    return sum;
}

double integrate_radial_range(const RadialProfile& f, double lo, double hi) {
    const RadialGrid& g = f.grid();
    lo = std::max(lo, 0.0);
    hi = std::min(hi, g.R());
    if (hi <= lo) return 0.0;
    const int n = g.dimension();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double a = std::max(lo, g.node(i));
        const double b = std::min(hi, g.node(i + 1));
        if (b <= a) continue;
        const double h = g.node(i + 1) - g.node(i);
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int k = 0; k < 8; ++k) {
            const double r = mid + half * kGaussX[k];
            const double t = (r - g.node(i)) / h;
            const double v = (1.0 - t) * f[i] + t * f[i + 1];
            sum += half * kGaussW[k] * std::pow(r, n - 1) * v;
        }
    }
    return sphere_area(n) * sum;
}

double interpolate_monotone(const RadialProfile& f, double target) {
    const auto nodes = f.grid().nodes();
    const auto v = f.values();
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        if (v[i] == target) return nodes[i];
        const double lo = std::min(v[i - 1], v[i]);
        const double hi = std::max(v[i - 1], v[i]);
        if (target > lo && target < hi) {
            const double t = (target - v[i - 1]) / (v[i] - v[i - 1]);
            return nodes[i - 1] + t * (nodes[i] - nodes[i - 1]);
        }
    }
    if (v[0] == target) return nodes[0];
    std::ostringstream msg;
    msg << "level " << target << " is not attained by the profile";
    fail(ErrorCode::NoCrossing, msg.str());
}

void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double factor = lower[i] / diag[i - 1];
        diag[i] -= factor * upper[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

}  // namespace klayer
