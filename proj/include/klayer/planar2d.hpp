#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "klayer/core.hpp"
#include "klayer/nonlocal.hpp"

namespace klayer {

/// Closed curve bounding a planar domain: disk(R), ellipse(a, b) or the star
/// r(theta) = r0 (1 + amplitude cos(k theta)).
class Shape {
public:
    enum class Kind { Disk, Ellipse, Star };

    Shape() = default;  // unit disk

    static Shape disk(double R);
    static Shape ellipse(double a, double b);
    static Shape star(double r0, double amplitude, int k);

    Kind kind() const { return kind_; }

    // Negative inside. Exact for the disk, projected for ellipse and star.
    double signed_distance(double x, double y) const;
    bool inside(double x, double y) const;

    // Counter-clockwise parametrisation t in [0, 2 pi) and its derivatives.
    std::array<double, 2> point(double t) const;
    std::array<double, 2> tangent(double t) const;
    std::array<double, 2> acceleration(double t) const;
    double curvature(double t) const;

    // Half-width of the bounding box.
    double extent() const;
    // Smallest distance from the origin to the curve.
    double min_radius() const;

private:
    double polar_radius(double t) const;
    // Parameter of the closest curve point to (x, y).
    double project(double x, double y) const;

    Kind kind_ = Kind::Disk;
    double a_ = 1.0, b_ = 1.0;
    double r0_ = 1.0, amp_ = 0.0;
    int k_ = 0;
};

enum class NodeClass : std::uint8_t { Outside, Inside, Cut };

/// Uniform Cartesian lattice covering the shape.
struct MaskedGrid {
    double h = 0.0;
    double x0 = 0.0, y0 = 0.0;  // coordinates of node (0, 0)
    int nx = 0, ny = 0;
    std::vector<NodeClass> cls;
    std::vector<double> phi;       // signed distance, negative inside
    std::vector<double> fraction;  // inside fraction of the dual cell
    std::vector<int> unknown;      // node -> unknown index, -1 outside
    std::vector<int> nodes;        // unknown index -> node

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    std::size_t size() const { return cls.size(); }
    std::size_t unknowns() const { return nodes.size(); }
    double measure() const;
};

using MaskedGridPtr = std::shared_ptr<const MaskedGrid>;

struct BoundarySample {
    std::array<double, 2> point{};
    std::array<double, 2> inward_normal{};
    double curvature = 0.0;
    double arclength = 0.0;
};

struct PlanarDomain2D {
    Shape shape;
    MaskedGridPtr grid;
    std::vector<BoundarySample> samples;
};

/// Classifies the lattice, computes the signed distance and dual-cell
/// fractions and places `sample_count` boundary samples uniformly in arclength.
PlanarDomain2D build_domain(const Shape& shape, double h, int sample_count = 256);

/// Nodal field on a masked grid; outside nodes hold the boundary value.
class Field2D {
public:
    Field2D() = default;
    Field2D(MaskedGridPtr grid, std::vector<double> values);

    const MaskedGrid& grid() const { return *grid_; }
    const MaskedGridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t node) const { return values_[node]; }

    // Bilinear interpolation; points outside the lattice clamp to its edge.
    double at(double x, double y) const;

private:
    MaskedGridPtr grid_;
    std::vector<double> values_;
};

struct Solve2DConfig {
    enum class Method { Newton, GaussSeidel };
    Method method = Method::Newton;
    double tol = 1e-10;         // max-norm residual
    int max_iters = 100;        // Newton iterations
    int max_sweeps = 200000;    // Gauss-Seidel sweeps
    double theta_min = 1e-3;    // clamp on the cut-link fraction

    void validate() const;
};

/// Five-point operator with cut-cell Dirichlet links, assembled once per grid.
class PlanarOperator;

struct Solve2DStats {
    int iterations = 0;
    double residual = 0.0;
};

/// Solves sigma Delta W = W^{1+p} with W = b on the boundary. `initial`
/// defaults to W = b.
Field2D solve_local_2d(double sigma, const Params& params, const MaskedGridPtr& grid,
                       const Solve2DConfig& cfg = {}, const Field2D* initial = nullptr,
                       Solve2DStats* stats = nullptr);

double local_residual_2d(const Field2D& W, double sigma, const Params& params, double theta_min = 1e-3);

/// Adapter for the nonlocal solver; reuses the operator and the sparse
/// factorisation pattern between solves.
class PlanarDomain {
public:
    using Field = Field2D;

    PlanarDomain(MaskedGridPtr grid, Solve2DConfig cfg = {});
    ~PlanarDomain();
    PlanarDomain(PlanarDomain&&) noexcept;
    PlanarDomain& operator=(PlanarDomain&&) noexcept;

    Field2D solve(double sigma, const Params& params, const Field2D* warm) const;
    double integrate_power(const Field2D& W, double p) const;
    double integrate(const Field2D& f) const;
    Field2D scaled_power(const Field2D& W, double p, double scale) const;
    double measure() const;

    const MaskedGridPtr& grid() const { return grid_; }

private:
    MaskedGridPtr grid_;
    Solve2DConfig cfg_;
    std::unique_ptr<PlanarOperator> op_;
};

using NonlocalResult2D = NonlocalResultT<Field2D>;

NonlocalResult2D solve_nonlocal_2d(const Params& params, const MaskedGridPtr& grid,
                                   const NonlocalConfig& cfg = {}, const Solve2DConfig& local = {});

struct ThicknessRow {
    double arclength = 0.0;
    double curvature = 0.0;
    double thickness = 0.0;
    bool valid = false;  // false when the ray left the domain before crossing c
};

/// Marches inward along each sample normal until W drops to c.
std::vector<ThicknessRow> curvature_thickness_report(const Field2D& W, const Shape& shape,
                                                     const std::vector<BoundarySample>& samples,
                                                     double c, const Params& params);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Standard deviation over mean.
double coefficient_of_variation(const std::vector<double>& v);

}  // namespace klayer
