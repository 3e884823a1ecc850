#pragma once

#include <string>
#include <vector>

#include "klayer/core.hpp"
#include "klayer/nonlocal.hpp"
#include "klayer/radial_steady.hpp"

namespace klayer {

enum class Quantity { SlopeW, SlopeU, LambdaEps, Thickness };

const char* to_string(Quantity q) noexcept;

/// Coefficient of 1/epsilon in W'(R): p m b / ((2+p) omega_n R^{n-1}).
double slope_W_leading(const Params& params, double R);

/// Coefficient of 1/epsilon^2 in U'(R): p^4 m^3 / (2 (2+p)^2 omega_n^3 R^{3(n-1)}).
double slope_U_leading(const Params& params, double R);

/// Coefficient of epsilon in R - r_eps(R, c):
/// ((b/c)^{p/2} - 1) (2n(p+2)/(m p^2)) (alpha_n(R)/R), alpha_n(R) = omega_n R^n / n.
double thickness_leading(double c, const Params& params, double R);

/// Same coefficient written as ((b/c)^{p/2} - 1) omega_n c_p^2 R^{n-1} / m.
double thickness_leading_cp_form(double c, const Params& params, double R);

/// Coefficient of epsilon in lambda_eps: omega_n^2 b^p c_p^2 R^{2n-2} / m^2.
double lambda_leading(const Params& params, double R);

/// Two-term slope of W at the boundary for the local problem:
/// sqrt(2/(p+2)) b^{1+p/2} sigma^{-1/2} - 2(n-1) b / ((p+4) R).
double slope_W_local(double sigma, const Params& params, double R);

/// R - r where W(r) = c.
double measure_thickness(const RadialProfile& W, double c);

struct RadialSweepConfig {
    int grid_count = 3000;
    double layer_fraction = 0.1;  // boundary spacing / expected layer width, times 10
    NonlocalConfig nonlocal;
    LocalSolveConfig local;
    int threads = 1;
};

struct SweepPoint {
    double epsilon = 0.0;
    NonlocalResult result;
};

/// One nonlocal solve per epsilon, all other parameters from `params`.
std::vector<SweepPoint> run_radial_sweep(const Params& params, double R,
                                         const std::vector<double>& eps_list,
                                         const RadialSweepConfig& cfg = {});

struct ExpansionReport {
    Quantity quantity = Quantity::LambdaEps;
    std::vector<double> epsilons;
    std::vector<double> computed;           // measured quantity times eps^k
    std::vector<double> predicted_leading;  // leading-order value of the quantity itself
    double predicted_coefficient = 0.0;
    double extrapolated_coefficient = 0.0;
    double log_coefficient = 0.0;           // C1 of the fit
    double relative_gap = 0.0;
};

/// Least squares fit y = C0 + C1 eps log(1/eps); returns {C0, C1}.
std::pair<double, double> extrapolate_log_model(const std::vector<double>& eps,
                                                const std::vector<double>& y);

/// Builds the report for one quantity from an existing sweep. `c` is the
/// thickness level (ignored by the other quantities).
ExpansionReport expansion_from_sweep(Quantity quantity, const std::vector<SweepPoint>& sweep,
                                     const Params& params, double R, double c = 0.5);

ExpansionReport verify_expansion(Quantity quantity, const Params& params, double R,
                                 const std::vector<double>& eps_list, double c = 0.5,
                                 const RadialSweepConfig& cfg = {});

struct PLimitRow {
    double p = 0.0;
    double sup_deviation = 0.0;           // max |W - b|
    double boundary_mass_fraction = 0.0;  // U-mass within `width` of r = R, over m
};

/// Nonlocal solves at fixed epsilon along p_list (increasing).
std::vector<PLimitRow> verify_p_limit(const Params& params_base, double R,
                                      const std::vector<double>& p_list, double eps_fixed,
                                      double width, const RadialSweepConfig& cfg = {});

/// Two-sided envelope W ~ fit * (1 + d/eps)^{-2/p} over nodes with d <= layer.
struct EnvelopeFit {
    double scale = 0.0;  // least-squares fit
    double r1 = 0.0;     // min (W / profile) / scale
    double r2 = 0.0;     // max (W / profile) / scale
    int samples = 0;
};

EnvelopeFit fit_envelope(const RadialProfile& W, double epsilon, double p, double layer);

/// max_{d > delta} W / eps^{2/p}.
double interior_smallness(const RadialProfile& W, double epsilon, double p, double delta);

}  // namespace klayer
