#pragma once

#include <memory>
#include <vector>

#include "klayer/core.hpp"

namespace klayer {

/// Radial cell density u and log-chemical v = ln w at time t.
struct EvolutionState {
    double t = 0.0;
    RadialProfile u;
    RadialProfile v;
};

struct SchemeConfig {
    double dt = 1e-3;
    double cfl_safety = 0.5;   // in (0, 1)
    double t_end = 1.0;
    int output_every = 10;     // steps between recorded samples
    double stop_distance = 1e-10;  // stop once max(linf_u, linf_w) falls below; 0 disables

    void validate() const;
};

/// IMEX step: implicit diffusion for u and v, explicit Scharfetter-Gummel
/// drift remainder, explicit |v_r|^2 term, u^{k+1} in the v reaction term.
/// Throws TimeStep when cfg.dt exceeds the advective limit and Positivity
/// when u leaves (0, inf).
EvolutionState step(const EvolutionState& state, const SteadyState& steady, const Params& params,
                    const SchemeConfig& cfg);

/// Largest dt allowed by cfl_safety * h_min / max(p |v_r|).
double advective_dt_limit(const EvolutionState& state, const Params& params, double cfl_safety);

/// omega_n sum of r^{n-1} u over the control volumes.
double discrete_mass(const RadialProfile& u);

struct DiagnosticRow {
    double t = 0.0;
    double mass = 0.0;
    double linf_u = 0.0;
    double l2_u = 0.0;
    double linf_w = 0.0;
    double l2_w = 0.0;
    double energy = 0.0;
};

struct EvolutionSeries {
    std::vector<DiagnosticRow> rows;
    EvolutionState final_state;
    bool renormalized = false;  // u0 was rescaled to mass m
    double initial_mass = 0.0;  // mass of u0 before any rescaling
    long steps = 0;
    double max_step_mass_drift = 0.0;  // max relative mass change over one step
};

DiagnosticRow diagnostics(const EvolutionState& state, const SteadyState& steady, const Params& params);

/// Integrates from (u0, w0) to cfg.t_end or until the distance drops below
/// cfg.stop_distance. dt is halved on time-step failures.
EvolutionSeries evolve(const RadialProfile& u0, const RadialProfile& w0, const Params& params,
                       const SteadyState& steady, const SchemeConfig& cfg);

/// phi = r^{1-n} int_0^r (u - U) s^{n-1} ds at the faces between nodes,
/// followed by the value at r = R.
std::vector<double> antiderivative(const EvolutionState& state, const SteadyState& steady);

/// omega_n int (r^{n-1} phi^2 / U + p r^{n-1} psi^2) dr with psi = v - ln W.
double lyapunov_energy(const EvolutionState& state, const SteadyState& steady, const Params& params);

/// mu_hat = minus the least-squares slope of log(distance) over [t_end/2, t_end],
/// where t_end is the last sample before distances reach the rounding floor.
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& distance);

}  // namespace klayer
