#include "klayer/planar2d.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace klayer {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

}  // namespace

// ---------------------------------------------------------------- Shape

Shape Shape::disk(double R) {
    require(std::isfinite(R) && R > 0.0, "disk radius must be positive");
    Shape s;
    s.kind_ = Kind::Disk;
    s.a_ = s.b_ = s.r0_ = R;
    return s;
}

Shape Shape::ellipse(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0, "ellipse semi-axes must be positive");
    Shape s;
    s.kind_ = Kind::Ellipse;
    s.a_ = a;
    s.b_ = b;
    return s;
}

Shape Shape::star(double r0, double amplitude, int k) {
    require(std::isfinite(r0) && r0 > 0.0, "star radius must be positive");
    require(amplitude >= 0.0 && amplitude < 1.0, "star amplitude must lie in [0, 1)");
    require(k >= 0, "star lobe count must be non-negative");
    Shape s;
    s.kind_ = Kind::Star;
    s.r0_ = r0;
    s.amp_ = amplitude;
    s.k_ = k;
    return s;
}

double Shape::polar_radius(double t) const { return r0_ * (1.0 + amp_ * std::cos(k_ * t)); }

std::array<double, 2> Shape::point(double t) const {
    switch (kind_) {
        case Kind::Disk: return {r0_ * std::cos(t), r0_ * std::sin(t)};
        case Kind::Ellipse: return {a_ * std::cos(t), b_ * std::sin(t)};
        case Kind::Star: {
            const double r = polar_radius(t);
            return {r * std::cos(t), r * std::sin(t)};
        }
    }
    return {0.0, 0.0};
}

std::array<double, 2> Shape::tangent(double t) const {
    switch (kind_) {
        case Kind::Disk: return {-r0_ * std::sin(t), r0_ * std::cos(t)};
        case Kind::Ellipse: return {-a_ * std::sin(t), b_ * std::cos(t)};
        case Kind::Star: {
            const double r = polar_radius(t);
            const double dr = -r0_ * amp_ * k_ * std::sin(k_ * t);
            return {dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t)};
        }
    }
    return {0.0, 0.0};
}

std::array<double, 2> Shape::acceleration(double t) const {
    switch (kind_) {
        case Kind::Disk: return {-r0_ * std::cos(t), -r0_ * std::sin(t)};
        case Kind::Ellipse: return {-a_ * std::cos(t), -b_ * std::sin(t)};
        case Kind::Star: {
            const double r = polar_radius(t);
            const double dr = -r0_ * amp_ * k_ * std::sin(k_ * t);
            const double ddr = -r0_ * amp_ * k_ * k_ * std::cos(k_ * t);
            const double c = std::cos(t), s = std::sin(t);
            return {ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s};
        }
    }
    return {0.0, 0.0};
}

double Shape::curvature(double t) const {
    switch (kind_) {
        case Kind::Disk: return 1.0 / r0_;
        case Kind::Ellipse: {
            const double s = std::sin(t), c = std::cos(t);
            return a_ * b_ / std::pow(a_ * a_ * s * s + b_ * b_ * c * c, 1.5);
        }
        case Kind::Star: {
            const double d = 1e-4;
            const double r = polar_radius(t);
            const double rp = polar_radius(t + d), rm = polar_radius(t - d);
            const double r1 = (rp - rm) / (2.0 * d);
            const double r2 = (rp - 2.0 * r + rm) / (d * d);
            return (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
        }
    }
    return 0.0;
}

double Shape::extent() const {
    switch (kind_) {
        case Kind::Disk: return r0_;
        case Kind::Ellipse: return std::max(a_, b_);
        case Kind::Star: return r0_ * (1.0 + amp_);
    }
    return 0.0;
}

double Shape::min_radius() const {
    switch (kind_) {
        case Kind::Disk: return r0_;
        case Kind::Ellipse: return std::min(a_, b_);
        case Kind::Star: return r0_ * (1.0 - (k_ == 0 ? 0.0 : amp_));
    }
    return 0.0;
}

bool Shape::inside(double x, double y) const {
    switch (kind_) {
        case Kind::Disk: return x * x + y * y < r0_ * r0_;
        case Kind::Ellipse: return (x * x) / (a_ * a_) + (y * y) / (b_ * b_) < 1.0;
        case Kind::Star: return std::hypot(x, y) < polar_radius(std::atan2(y, x));
    }
    return false;
}

double Shape::project(double x, double y) const {
    // Stationary points of |gamma(t) - P|^2 by damped Newton from several starts.
    auto dist2 = [&](double t) {
        const auto q = point(t);
        return (q[0] - x) * (q[0] - x) + (q[1] - y) * (q[1] - y);
    };
    auto refine = [&](double t) {
        for (int it = 0; it < 32; ++it) {
            const auto q = point(t), d1 = tangent(t), d2 = acceleration(t);
            const double ex = q[0] - x, ey = q[1] - y;
            const double g = ex * d1[0] + ey * d1[1];
            const double gp = d1[0] * d1[0] + d1[1] * d1[1] + ex * d2[0] + ey * d2[1];
            double step = gp > 0.0 ? -g / gp : -0.1 * g / std::sqrt(d1[0] * d1[0] + d1[1] * d1[1]);
            step = std::clamp(step, -0.25, 0.25);
            t += step;
            if (std::abs(step) < 1e-15) break;
        }
        return wrap_angle(t);
    };

    std::vector<double> starts;
    if (kind_ == Kind::Ellipse) {
        starts = {std::atan2(a_ * y, b_ * x), std::atan2(y, x), 0.0, 0.5 * std::numbers::pi,
                  std::numbers::pi, 1.5 * std::numbers::pi};
    } else {
        const int scan = 64 + 16 * k_;
        double best = std::numeric_limits<double>::infinity(), tb = 0.0;
        for (int i = 0; i < scan; ++i) {
            const double t = kTwoPi * i / scan;
            const double d = dist2(t);
            if (d < best) {
                best = d;
                tb = t;
            }
        }
        starts = {tb, std::atan2(y, x)};
    }
    double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (double t0 : starts) {
        const double t = refine(t0);
        const double d = dist2(t);
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    return best_t;
}

double Shape::signed_distance(double x, double y) const {
    if (kind_ == Kind::Disk || (kind_ == Kind::Star && (amp_ == 0.0 || k_ == 0))) {
        const double R = kind_ == Kind::Disk ? r0_ : polar_radius(0.0);
        return std::hypot(x, y) - R;
    }
    const auto q = point(project(x, y));
    const double d = std::hypot(q[0] - x, q[1] - y);
    return inside(x, y) ? -d : d;
}

// ---------------------------------------------------------------- grid

double MaskedGrid::measure() const {
    double s = 0.0;
    for (double f : fraction) s += f;
    return s * h * h;
}

PlanarDomain2D build_domain(const Shape& shape, double h, int sample_count) {
    require(std::isfinite(h) && h > 0.0, "grid spacing must be positive");
    require(2.0 * shape.min_radius() >= 8.0 * h, "grid spacing too coarse for the narrowest feature");
    require(sample_count >= 4, "need at least four boundary samples");

    auto g = std::make_shared<MaskedGrid>();
    g->h = h;
    const double half = shape.extent() + 2.0 * h;
    const int cells = static_cast<int>(std::ceil(2.0 * half / h));
    g->nx = g->ny = cells + 1;
    g->x0 = g->y0 = -0.5 * cells * h;
    const std::size_t total = static_cast<std::size_t>(g->nx) * g->ny;
    g->phi.resize(total);
    g->cls.assign(total, NodeClass::Outside);
    g->fraction.assign(total, 0.0);
    g->unknown.assign(total, -1);

    for (int j = 0; j < g->ny; ++j) {
        for (int i = 0; i < g->nx; ++i) {
            const double x = g->x(i), y = g->y(j);
            // Far from the curve only the sign matters; skip the projection.
            const double r = std::hypot(x, y);
            double phi;
            if (r < shape.min_radius() - 2.0 * h) {
                phi = r - shape.min_radius();
            } else if (r > shape.extent() + 2.0 * h) {
                phi = r - shape.extent();
            } else {
                phi = shape.signed_distance(x, y);
            }
            g->phi[g->index(i, j)] = phi;
        }
    }
    for (int j = 0; j < g->ny; ++j) {
        for (int i = 0; i < g->nx; ++i) {
            const std::size_t k = g->index(i, j);
            if (g->phi[k] >= 0.0) continue;
            const bool cut = g->phi[g->index(i - 1, j)] >= 0.0 || g->phi[g->index(i + 1, j)] >= 0.0 ||
                             g->phi[g->index(i, j - 1)] >= 0.0 || g->phi[g->index(i, j + 1)] >= 0.0;
            g->cls[k] = cut ? NodeClass::Cut : NodeClass::Inside;
            g->unknown[k] = static_cast<int>(g->nodes.size());
            g->nodes.push_back(static_cast<int>(k));
        }
    }
    require(!g->nodes.empty(), "domain contains no grid nodes");

    constexpr int kSub = 16;
    for (int j = 0; j < g->ny; ++j) {
        for (int i = 0; i < g->nx; ++i) {
            const std::size_t k = g->index(i, j);
            if (std::abs(g->phi[k]) >= h) {
                g->fraction[k] = g->phi[k] < 0.0 ? 1.0 : 0.0;
                continue;
            }
            int in = 0;
            for (int b = 0; b < kSub; ++b) {
                for (int a = 0; a < kSub; ++a) {
                    const double x = g->x(i) + h * ((a + 0.5) / kSub - 0.5);
                    const double y = g->y(j) + h * ((b + 0.5) / kSub - 0.5);
                    if (shape.inside(x, y)) ++in;
                }
            }
            g->fraction[k] = static_cast<double>(in) / (kSub * kSub);
        }
    }

    // Arclength table, then samples at equal arclength spacing.
    constexpr int kTable = 20000;
    std::vector<double> ts(kTable + 1), arc(kTable + 1, 0.0);
    auto speed = [&](double t) {
        const auto d = shape.tangent(t);
        return std::hypot(d[0], d[1]);
    };
    for (int i = 0; i <= kTable; ++i) ts[i] = kTwoPi * i / kTable;
    for (int i = 1; i <= kTable; ++i) {
        const double a = ts[i - 1], b = ts[i];
        arc[i] = arc[i - 1] + (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
    }
    const double length = arc.back();
    PlanarDomain2D out{shape, g, {}};
    out.samples.reserve(sample_count);
    for (int s = 0; s < sample_count; ++s) {
        const double target = length * s / sample_count;
        const auto it = std::lower_bound(arc.begin(), arc.end(), target);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - arc.begin()));
        const double w = (target - arc[i - 1]) / (arc[i] - arc[i - 1]);
        const double t = ts[i - 1] + w * (ts[i] - ts[i - 1]);
        BoundarySample bs;
        bs.point = shape.point(t);
        const auto d = shape.tangent(t);
        const double n = std::hypot(d[0], d[1]);
        bs.inward_normal = {-d[1] / n, d[0] / n};
        bs.curvature = shape.curvature(t);
        bs.arclength = target;
        out.samples.push_back(bs);
    }
    return out;
}

// ---------------------------------------------------------------- fields

Field2D::Field2D(MaskedGridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "field needs a grid");
    require(values_.size() == grid_->size(), "field size does not match its grid");
    for (double v : values_) require(std::isfinite(v), "field values must be finite");
}

double Field2D::at(double x, double y) const {
    const MaskedGrid& g = *grid_;
    const double fx = std::clamp((x - g.x0) / g.h, 0.0, g.nx - 1.0);
    const double fy = std::clamp((y - g.y0) / g.h, 0.0, g.ny - 1.0);
    const int i = std::min(static_cast<int>(fx), g.nx - 2);
    const int j = std::min(static_cast<int>(fy), g.ny - 2);
    const double u = fx - i, v = fy - j;
    return (1 - u) * (1 - v) * values_[g.index(i, j)] + u * (1 - v) * values_[g.index(i + 1, j)] +
           (1 - u) * v * values_[g.index(i, j + 1)] + u * v * values_[g.index(i + 1, j + 1)];
}

void Solve2DConfig::validate() const {
    require(std::isfinite(tol) && tol > 0.0, "2D solver tolerance must be positive");
    require(max_iters >= 1 && max_sweeps >= 1, "2D iteration limits must be positive");
    require(theta_min > 0.0 && theta_min <= 1.0, "theta_min must lie in (0, 1]");
}

// ---------------------------------------------------------------- operator

class PlanarOperator {
public:
    using SpMat = Eigen::SparseMatrix<double>;

    PlanarOperator(const MaskedGrid& g, double theta_min) {
        const int n = static_cast<int>(g.unknowns());
        const double h2 = g.h * g.h;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(5 * static_cast<std::size_t>(n));
        boundary_.setZero(n);
        row_scale_ = 0.0;
        for (int u = 0; u < n; ++u) {
            const int k = g.nodes[u];
            const int i = k % g.nx, j = k / g.nx;
            double diag = 0.0;
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& q : nb) {
                const std::size_t kk = g.index(q[0], q[1]);
                const int v = g.unknown[kk];
                if (v >= 0) {
                    trip.emplace_back(u, v, 1.0 / h2);
                    diag -= 1.0 / h2;
                } else {
                    const double pi = g.phi[k], pk = g.phi[kk];
                    const double theta = std::max(theta_min, pi / (pi - pk));
                    diag -= 1.0 / (theta * h2);
                    boundary_[u] += 1.0 / (theta * h2);
                }
            }
            trip.emplace_back(u, u, diag);
            row_scale_ = std::max(row_scale_, 2.0 * std::abs(diag));
        }
        L_.resize(n, n);
        L_.setFromTriplets(trip.begin(), trip.end());
        L_.makeCompressed();
        diag_.resize(n);
        for (int u = 0; u < n; ++u) diag_[u] = L_.coeff(u, u);
    }

    const SpMat& L() const { return L_; }
    const Eigen::VectorXd& boundary() const { return boundary_; }
    const Eigen::VectorXd& diag() const { return diag_; }
    double row_scale() const { return row_scale_; }

    Eigen::VectorXd residual(const Eigen::VectorXd& W, double sigma, const Params& params) const {
        Eigen::VectorXd F = sigma * (L_ * W + params.b * boundary_);
        for (Eigen::Index i = 0; i < W.size(); ++i) F[i] -= std::pow(W[i], 1.0 + params.p);
        return F;
    }

    // Factorises sigma (-L) + diag(d) reusing the symbolic analysis.
    void factorize(double sigma, const Eigen::VectorXd& d) {
        if (!analyzed_) {
            A_ = -L_;
            A_.makeCompressed();
            diag_ptr_.resize(A_.rows());
            for (int c = 0; c < A_.outerSize(); ++c) {
                for (SpMat::InnerIterator it(A_, c); it; ++it) {
                    if (it.row() == it.col()) diag_ptr_[c] = &it.valueRef();
                }
            }
            ldlt_.analyzePattern(A_);
            analyzed_ = true;
        }
        // values of A_ = -sigma L + diag(d)
        const double* src = L_.valuePtr();
        double* dst = A_.valuePtr();
        for (Eigen::Index k = 0; k < A_.nonZeros(); ++k) dst[k] = -sigma * src[k];
        for (Eigen::Index u = 0; u < A_.rows(); ++u) *diag_ptr_[u] += d[u];
        ldlt_.factorize(A_);
        if (ldlt_.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "sparse factorisation failed");
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return ldlt_.solve(rhs); }

private:
    SpMat L_;
    SpMat A_;
    Eigen::VectorXd boundary_;
    Eigen::VectorXd diag_;
    std::vector<double*> diag_ptr_;
    double row_scale_ = 0.0;
    bool analyzed_ = false;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
};

namespace {

Eigen::VectorXd gather(const MaskedGrid& g, const Field2D* f, double fallback) {
    Eigen::VectorXd W(static_cast<Eigen::Index>(g.unknowns()));
    for (std::size_t u = 0; u < g.unknowns(); ++u) {
        W[u] = f ? (*f)[g.nodes[u]] : fallback;
    }
    return W;
}

Field2D scatter(const MaskedGridPtr& g, const Eigen::VectorXd& W, double b) {
    std::vector<double> v(g->size(), b);
    for (std::size_t u = 0; u < g->unknowns(); ++u) v[g->nodes[u]] = W[u];
    return Field2D(g, std::move(v));
}

double rounding_floor(const PlanarOperator& op, double sigma, const Params& params) {
    return 64.0 * std::numeric_limits<double>::epsilon() * sigma * op.row_scale() * params.b;
}

Solve2DStats newton_2d(PlanarOperator& op, Eigen::VectorXd& W, double sigma, const Params& params,
                       const Solve2DConfig& cfg) {
    const double tol = std::max(cfg.tol, rounding_floor(op, sigma, params));
    const double p = params.p;
    Solve2DStats st;
    Eigen::VectorXd F = op.residual(W, sigma, params);
    Eigen::VectorXd d(W.size());
    for (int it = 0; it < cfg.max_iters; ++it) {
        st.iterations = it;
        st.residual = F.lpNorm<Eigen::Infinity>();
        if (st.residual < tol) return st;
        for (Eigen::Index i = 0; i < W.size(); ++i) d[i] = (1.0 + p) * std::pow(W[i], p);
        op.factorize(sigma, d);
        const Eigen::VectorXd delta = op.solve(F);
        double step = 1.0;
        Eigen::VectorXd trial;
        for (int halving = 0;; ++halving) {
            trial = W + step * delta;
            if (trial.minCoeff() > 0.0) break;
            if (halving > 60) {
                st.residual = std::numeric_limits<double>::infinity();
                return st;
            }
            step *= 0.5;
        }
        W = std::move(trial);
        F = op.residual(W, sigma, params);
    }
    st.iterations = cfg.max_iters;
    st.residual = F.lpNorm<Eigen::Infinity>();
    return st;
}

Solve2DStats gauss_seidel_2d(const PlanarOperator& op, Eigen::VectorXd& W, double sigma, const Params& params,
                             const Solve2DConfig& cfg) {
    const double tol = std::max(cfg.tol, rounding_floor(op, sigma, params));
    const double p = params.p;
    // Row access: L is symmetric, so column u holds row u.
    const auto& L = op.L();
    const Eigen::VectorXd& bnd = op.boundary();
    const Eigen::VectorXd& dg = op.diag();
    Solve2DStats st;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        for (Eigen::Index u = 0; u < W.size(); ++u) {
            double off = params.b * bnd[u];
            for (PlanarOperator::SpMat::InnerIterator it(L, u); it; ++it) {
                if (it.row() != u) off += it.value() * W[it.row()];
            }
            // sigma (off + dg w) = w^{1+p}: concave decreasing in w; Newton
            // from the root of the linear part approaches from above.
            double w = -off / dg[u];
            for (int k = 0; k < 50; ++k) {
                const double f = sigma * (off + dg[u] * w) - std::pow(w, 1.0 + p);
                const double fp = sigma * dg[u] - (1.0 + p) * std::pow(w, p);
                const double next = w - f / fp;
                if (!(next > 0.0)) {
                    w *= 0.5;
                    continue;
                }
                if (std::abs(next - w) <= 1e-15 * w) {
                    w = next;
                    break;
                }
                w = next;
            }
            W[u] = w;
        }
        st.iterations = sweep + 1;
        if (sweep % 10 == 9 || sweep + 1 == cfg.max_sweeps) {
            st.residual = op.residual(W, sigma, params).lpNorm<Eigen::Infinity>();
            if (st.residual < tol) return st;
        }
    }
    return st;
}

Field2D run_local_2d(PlanarOperator& op, double sigma, const Params& params, const MaskedGridPtr& grid,
                     const Solve2DConfig& cfg, const Field2D* initial, Solve2DStats* stats) {
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
    params.validate();
    Eigen::VectorXd W = gather(*grid, initial, params.b);
    for (Eigen::Index i = 0; i < W.size(); ++i) {
        require(W[i] > 0.0 && std::isfinite(W[i]), "initial field must be positive");
    }
    const double tol = std::max(cfg.tol, rounding_floor(op, sigma, params));
    Solve2DStats st = cfg.method == Solve2DConfig::Method::Newton ? newton_2d(op, W, sigma, params, cfg)
                                                                  : gauss_seidel_2d(op, W, sigma, params, cfg);
    if (stats) *stats = st;
    if (!(st.residual < tol)) {
        std::ostringstream msg;
        msg << "2D local solve did not converge (sigma = " << sigma << ", residual " << st.residual << ")";
        fail(ErrorCode::NoConvergence, msg.str());
    }
    return scatter(grid, W, params.b);
}

}  // namespace

Field2D solve_local_2d(double sigma, const Params& params, const MaskedGridPtr& grid,
                       const Solve2DConfig& cfg, const Field2D* initial, Solve2DStats* stats) {
    require(grid != nullptr, "2D solve needs a grid");
    cfg.validate();
    PlanarOperator op(*grid, cfg.theta_min);
    return run_local_2d(op, sigma, params, grid, cfg, initial, stats);
}

double local_residual_2d(const Field2D& W, double sigma, const Params& params, double theta_min) {
    const PlanarOperator op(W.grid(), theta_min);
    return op.residual(gather(W.grid(), &W, params.b), sigma, params).lpNorm<Eigen::Infinity>();
}

// ---------------------------------------------------------------- adapter

PlanarDomain::PlanarDomain(MaskedGridPtr grid, Solve2DConfig cfg)
    : grid_(std::move(grid)), cfg_(cfg) {
    require(grid_ != nullptr, "planar domain needs a grid");
    cfg_.validate();
    op_ = std::make_unique<PlanarOperator>(*grid_, cfg_.theta_min);
}

PlanarDomain::~PlanarDomain() = default;
PlanarDomain::PlanarDomain(PlanarDomain&&) noexcept = default;
PlanarDomain& PlanarDomain::operator=(PlanarDomain&&) noexcept = default;

Field2D PlanarDomain::solve(double sigma, const Params& params, const Field2D* warm) const {
    require(params.n == 2, "planar solves need n = 2");
    return run_local_2d(*op_, sigma, params, grid_, cfg_, warm, nullptr);
}

double PlanarDomain::integrate(const Field2D& f) const {
    const MaskedGrid& g = *grid_;
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.fraction[k] > 0.0) s += g.fraction[k] * f[k];
    }
    return s * g.h * g.h;
}

double PlanarDomain::integrate_power(const Field2D& W, double p) const {
    const MaskedGrid& g = *grid_;
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.fraction[k] > 0.0) s += g.fraction[k] * std::pow(W[k], p);
    }
    return s * g.h * g.h;
}

Field2D PlanarDomain::scaled_power(const Field2D& W, double p, double scale) const {
    std::vector<double> v(W.values().size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = scale * std::pow(W[k], p);
    return Field2D(grid_, std::move(v));
}

double PlanarDomain::measure() const { return grid_->measure(); }

NonlocalResult2D solve_nonlocal_2d(const Params& params, const MaskedGridPtr& grid, const NonlocalConfig& cfg,
                                   const Solve2DConfig& local) {
    require(params.n == 2, "planar solves need n = 2");
    const PlanarDomain domain(grid, local);
    return solve_nonlocal(params, domain, cfg);
}

// ---------------------------------------------------------------- reports

std::vector<ThicknessRow> curvature_thickness_report(const Field2D& W, const Shape& shape,
                                                     const std::vector<BoundarySample>& samples,
                                                     double c, const Params& params) {
    require(c > 0.0 && c < params.b, "thickness level must lie in (0, b)");
    const double step = 0.25 * W.grid().h;
    const double max_dist = 2.0 * shape.extent();
    std::vector<ThicknessRow> rows;
    rows.reserve(samples.size());
    for (const BoundarySample& s : samples) {
        ThicknessRow row;
        row.arclength = s.arclength;
        row.curvature = s.curvature;
        double prev_d = 0.0, prev_w = W.at(s.point[0], s.point[1]);
        for (double d = step; d <= max_dist; d += step) {
            const double x = s.point[0] + d * s.inward_normal[0];
            const double y = s.point[1] + d * s.inward_normal[1];
            if (!shape.inside(x, y)) break;
            const double w = W.at(x, y);
            if (w <= c) {
                row.thickness = prev_d + (prev_w - c) / (prev_w - w) * (d - prev_d);
                row.valid = true;
                break;
            }
            prev_d = d;
            prev_w = w;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, "spearman needs two equal-length samples");
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double coefficient_of_variation(const std::vector<double>& v) {
    require(!v.empty(), "empty sample");
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n) / std::abs(mean);
}

}  // namespace klayer
