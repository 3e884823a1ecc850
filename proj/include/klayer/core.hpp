#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "klayer/error.hpp"

namespace klayer {

/// Model constants shared by every solver.
struct Params {
    double epsilon = 0.01;  // chemical diffusion
    double p = 2.0;         // chemotactic exponent
    double b = 1.0;         // boundary value of the chemical
    double m = 1.0;         // total cell mass
    int n = 2;              // space dimension

    void validate() const;
};

/// Surface area of the unit sphere in R^n (2 for n = 1, 2*pi, 4*pi, ...).
double sphere_area(int n);

/// Volume of the ball of radius R in R^n.
double ball_volume(int n, double R);

/// Strictly increasing nodes on [0, R] together with the measure weights
/// omega_n * int r^{n-1} phi_i(r) dr of the piecewise-linear hat functions.
class RadialGrid {
public:
    RadialGrid(std::vector<double> nodes, int dimension);

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double R() const { return nodes_.back(); }
    int dimension() const { return dimension_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t last() const { return nodes_.size() - 1; }

    // Length of the interval [r_{i-1}, r_i]; i >= 1.
    double spacing(std::size_t i) const { return nodes_[i] - nodes_[i - 1]; }
    double min_spacing() const;

    // omega_n * int_{r_i}^{r_{i+1}} r^{n-1} dr / (r_{i+1} - r_i)^2, the
    // conductance of the face between nodes i and i + 1.
    double face_conductance(std::size_t i) const;

    // Number of nodes with R - r <= width.
    std::size_t nodes_within(double width) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    int dimension_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Geometric mesh: the interval touching r = R has length layer_width / 10
/// and lengths grow by a constant ratio toward r = 0. When count nodes at
/// that spacing already cover [0, R] the mesh is uniform at layer_width / 10
/// and holds fewer than count nodes.
GridPtr make_graded_grid(double R, int n, double layer_width, int count);

GridPtr make_uniform_grid(double R, int n, int count);

/// Values of a field at the nodes of a shared radial grid.
class RadialProfile {
public:
    RadialProfile() = default;
    RadialProfile(GridPtr grid, std::vector<double> values);

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    double back() const { return values_.back(); }

    // Piecewise-linear evaluation.
    double at(double r) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

template <class F>
RadialProfile sample_profile(const GridPtr& grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
    return RadialProfile(grid, std::move(v));
}

/// omega_n * int_0^R r^{n-1} f(r) dr for the piecewise-linear interpolant of f.
double integrate_radial(const RadialProfile& f);

/// Same measure restricted to [lo, hi] subset of [0, R].
double integrate_radial_range(const RadialProfile& f, double lo, double hi);

/// Radius where the piecewise-linear profile first reaches `target` when
/// scanning inward from r = R. Throws NoCrossing when the level is not attained.
double interpolate_monotone(const RadialProfile& f, double target);

/// Paired fields of a steady state plus the constants of the nonlocal term.
/// amplitude = m / int W^p, lambda_eps = int W^p / m, sigma = epsilon / lambda
/// where lambda is the coefficient the field W was solved with.
template <class Field>
struct SteadyStateT {
    Field W;
    Field U;
    double amplitude = 0.0;
    double lambda_eps = 0.0;
    double sigma = 0.0;
};

using SteadyState = SteadyStateT<RadialProfile>;

/// Thomas algorithm. lower[0] and upper[n-1] are ignored. Overwrites rhs
/// with the solution; diag is used as scratch.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs);

}  // namespace klayer
