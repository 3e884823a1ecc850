#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "klayer/klayer.h"
#include "output.hpp"

namespace fs = std::filesystem;
using namespace klayer_cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitGap = 2;

struct SolverError : std::runtime_error {
    klayer_status status;
    SolverError(klayer_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(klayer_status s, const char* call) {
    if (s != KLAYER_OK) {
        throw SolverError(s, std::string(call) + ": " + klayer_status_name(s) + ": " + klayer_last_error());
    }
}

// Frees a C handle on scope exit.
template <class T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(ptr); }
};

int worker_count(const RunConfig& cfg) {
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("KLAYER_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
    }
    return std::max(1, n);
}

klayer_params params_of(const RunConfig& c) { return {c.epsilon, c.p, c.b, c.m, c.n}; }

klayer_radial_options radial_options_of(const RunConfig& c) {
    klayer_radial_options o = klayer_radial_options_default();
    o.R = c.R;
    o.grid_count = c.effective_grid_count();
    o.layer_fraction = c.effective_layer_fraction();
    o.newton_tol = c.tol;
    o.nonlocal_tol = c.effective_nonlocal_tol();
    o.threads = worker_count(c);
    return o;
}

void write_summary(const fs::path& path, const std::vector<std::pair<std::string, double>>& entries) {
    CsvWriter csv(path, {"key", "value"});
    for (const auto& [k, v] : entries) csv.row(k, {v});
    csv.close();
}

int steady_radial(const RunConfig& cfg, const fs::path& out) {
    const klayer_params pr = params_of(cfg);
    const klayer_radial_options opts = radial_options_of(cfg);
    Handle<klayer_radial, klayer_radial_free> h;
    check(klayer_radial_solve(&pr, &opts, &h.ptr), "radial solve");
    klayer_radial_info info{};
    check(klayer_radial_info_get(h.ptr, &info), "radial info");
    std::vector<double> r(info.size), W(info.size), U(info.size);
    check(klayer_radial_copy(h.ptr, r.data(), W.data(), U.data()), "radial copy");
    double thickness = std::nan(""), violation = 0.0;
    if (klayer_radial_thickness(h.ptr, cfg.level, &thickness) != KLAYER_OK) thickness = std::nan("");
    check(klayer_radial_barrier_violation(h.ptr, &violation), "barrier check");

    CsvWriter csv(out / "steady_radial.csv", {"r", "W", "U"});
    for (std::size_t i = 0; i < r.size(); ++i) csv.row({r[i], W[i], U[i]});
    csv.close();
    write_summary(out / "steady_radial_summary.csv",
                  {{"epsilon", cfg.epsilon}, {"p", cfg.p}, {"b", cfg.b}, {"m", cfg.m}, {"n", double(cfg.n)},
                   {"R", cfg.R}, {"nodes", double(info.size)}, {"amplitude", info.amplitude},
                   {"lambda_eps", info.lambda_eps}, {"sigma", info.sigma}, {"slope_W", info.slope_W},
                   {"slope_U", info.slope_U}, {"thickness", thickness}, {"barrier_violation", violation},
                   {"bisection_iters", double(info.bisection_iters)},
                   {"constraint_residual", info.constraint_residual}});
    if (cfg.plots) {
        const double umax = *std::max_element(U.begin(), U.end());
        std::vector<double> un(U.size());
        for (std::size_t i = 0; i < U.size(); ++i) un[i] = U[i] / umax;
        write_svg_plot(out / "steady_radial.svg", "radial steady state", "r", "value",
                       {{"W", r, W}, {"U / max U", r, un}});
    }
    std::cout << "lambda_eps " << format_number(info.lambda_eps) << "  sigma " << format_number(info.sigma)
              << "  W'(R) " << format_number(info.slope_W) << "\n";
    return kExitOk;
}

klayer_shape shape_of(const RunConfig& c) {
    klayer_shape s{KLAYER_SHAPE_DISK, c.R, c.R, 0.0, 0};
    if (c.shape == "ellipse") {
        s.kind = KLAYER_SHAPE_ELLIPSE;
        s.a = c.shape_a > 0.0 ? c.shape_a : std::numbers::sqrt2 * c.R;
        s.b = c.shape_b > 0.0 ? c.shape_b : c.R / std::numbers::sqrt2;
    } else if (c.shape == "star") {
        s.kind = KLAYER_SHAPE_STAR;
        s.a = c.shape_a > 0.0 ? c.shape_a : c.R;
        s.amplitude = c.star_amplitude;
        s.k = c.star_k;
    } else if (c.shape_a > 0.0) {
        s.a = c.shape_a;
    }
    return s;
}

int steady_2d(const RunConfig& cfg, const fs::path& out) {
    const klayer_params pr = params_of(cfg);
    const klayer_shape shape = shape_of(cfg);
    klayer_planar_options opts = klayer_planar_options_default();
    opts.h = cfg.h;
    opts.samples = cfg.samples;
    opts.gauss_seidel = cfg.solver == "gauss-seidel";
    opts.tol = cfg.tol;
    opts.nonlocal_tol = cfg.effective_nonlocal_tol();
    Handle<klayer_planar, klayer_planar_free> h;
    check(klayer_planar_solve(&pr, &shape, &opts, &h.ptr), "planar solve");
    klayer_planar_info info{};
    check(klayer_planar_info_get(h.ptr, &info), "planar info");
    const std::size_t total = static_cast<std::size_t>(info.nx) * info.ny;
    std::vector<double> W(total), U(total);
    std::vector<unsigned char> inside(total);
    check(klayer_planar_copy(h.ptr, W.data(), U.data(), inside.data()), "planar copy");

    CsvWriter field(out / "field_2d.csv", {"x", "y", "W", "U"});
    for (int j = 0; j < info.ny; ++j) {
        for (int i = 0; i < info.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * info.nx + i;
            if (inside[k]) field.row({info.x0 + i * info.h, info.y0 + j * info.h, W[k], U[k]});
        }
    }
    field.close();

    std::size_t count = 0;
    check(klayer_planar_thickness(h.ptr, cfg.level, nullptr, 0, &count), "thickness report");
    std::vector<klayer_thickness_row> rows(count);
    check(klayer_planar_thickness(h.ptr, cfg.level, rows.data(), rows.size(), &count), "thickness report");
    CsvWriter thick(out / "thickness_2d.csv", {"arclength", "curvature", "thickness", "valid"});
    std::vector<double> kappa, width;
    for (const auto& row : rows) {
        thick.row({row.arclength, row.curvature, row.thickness, double(row.valid)});
        if (row.valid) {
            kappa.push_back(row.curvature);
            width.push_back(row.thickness);
        }
    }
    thick.close();
    double rho = std::nan(""), cv = std::nan("");
    if (kappa.size() >= 2) {
        if (klayer_spearman(kappa.data(), width.data(), kappa.size(), &rho) != KLAYER_OK) rho = std::nan("");
        check(klayer_coefficient_of_variation(width.data(), width.size(), &cv), "thickness spread");
    }
    write_summary(out / "steady_2d_summary.csv",
                  {{"epsilon", cfg.epsilon}, {"p", cfg.p}, {"b", cfg.b}, {"m", cfg.m}, {"h", info.h},
                   {"unknowns", double(info.unknowns)}, {"amplitude", info.amplitude},
                   {"lambda_eps", info.lambda_eps}, {"sigma", info.sigma},
                   {"bisection_iters", double(info.bisection_iters)},
                   {"constraint_residual", info.constraint_residual}, {"valid_rays", double(kappa.size())},
                   {"spearman_curvature_thickness", rho}, {"thickness_cv", cv}});
    if (cfg.plots) {
        write_pgm(out / "field_2d_W.pgm", info.nx, info.ny, W, inside);
        write_pgm(out / "field_2d_U.pgm", info.nx, info.ny, U, inside);
    }
    std::cout << "lambda_eps " << format_number(info.lambda_eps) << "  unknowns " << info.unknowns
              << "  valid rays " << kappa.size() << "  spearman " << format_number(rho) << "\n";
    return kExitOk;
}

int evolve(const RunConfig& cfg, const fs::path& out) {
    const klayer_params pr = params_of(cfg);
    const klayer_radial_options ropts = radial_options_of(cfg);
    Handle<klayer_radial, klayer_radial_free> steady;
    check(klayer_radial_solve(&pr, &ropts, &steady.ptr), "radial solve");
    klayer_radial_info info{};
    check(klayer_radial_info_get(steady.ptr, &info), "radial info");

    klayer_evolve_options eo = klayer_evolve_options_default();
    eo.dt = cfg.dt;
    eo.cfl_safety = cfg.cfl;
    eo.t_end = cfg.t_end;
    eo.output_every = cfg.output_every;
    eo.stop_distance = cfg.stop_distance;
    eo.perturb_u = cfg.perturb_u;
    eo.perturb_w = cfg.perturb_w;

    std::vector<double> r(info.size), W(info.size), U(info.size);
    check(klayer_radial_copy(steady.ptr, r.data(), W.data(), U.data()), "radial copy");
    Handle<klayer_evolution, klayer_evolution_free> evo;
    if (cfg.seed == 0) {
        check(klayer_evolve(steady.ptr, &eo, &evo.ptr), "evolve");
    } else {
        // The seed only shifts the phase of the density perturbation.
        std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.seed));
        const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
        std::vector<double> u0(info.size), w0(info.size);
        for (std::size_t i = 0; i < info.size; ++i) {
            u0[i] = U[i] * (1.0 + cfg.perturb_u * std::cos(std::numbers::pi * r[i] / cfg.R + phase));
            w0[i] = W[i] * (1.0 + cfg.perturb_w * std::cos(0.5 * std::numbers::pi * r[i] / cfg.R));
        }
        w0.back() = cfg.b;
        check(klayer_evolve_from(steady.ptr, &eo, u0.data(), w0.data(), &evo.ptr), "evolve");
    }
    klayer_evolution_summary sum{};
    check(klayer_evolution_summary_get(evo.ptr, &sum), "evolution summary");
    std::vector<klayer_diag_row> rows(sum.rows);
    check(klayer_evolution_rows(evo.ptr, rows.data(), rows.size()), "evolution rows");

    CsvWriter csv(out / "evolve.csv", {"t", "mass", "linf_u", "l2_u", "linf_w", "l2_w", "energy"});
    for (const auto& d : rows) csv.row({d.t, d.mass, d.linf_u, d.l2_u, d.linf_w, d.l2_w, d.energy});
    csv.close();
    std::vector<double> uf(info.size), wf(info.size);
    check(klayer_evolution_final(evo.ptr, uf.data(), wf.data()), "final state");
    CsvWriter fin(out / "evolve_final.csv", {"r", "u", "w", "U", "W"});
    for (std::size_t i = 0; i < info.size; ++i) fin.row({r[i], uf[i], wf[i], U[i], W[i]});
    fin.close();
    const double d0 = std::max(rows.front().linf_u, rows.front().linf_w);
    const double d1 = std::max(rows.back().linf_u, rows.back().linf_w);
    write_summary(out / "evolve_summary.csv",
                  {{"epsilon", cfg.epsilon}, {"lambda_eps", info.lambda_eps}, {"steps", double(sum.steps)},
                   {"t_final", rows.back().t}, {"renormalized", double(sum.renormalized)},
                   {"initial_mass", sum.initial_mass}, {"max_step_mass_drift", sum.max_step_mass_drift},
                   {"max_run_mass_drift", sum.max_run_mass_drift}, {"initial_distance", d0},
                   {"final_distance", d1}, {"mu_hat", sum.mu_hat}});
    if (cfg.plots) {
        std::vector<double> t, dist, energy;
        for (const auto& d : rows) {
            t.push_back(d.t);
            dist.push_back(std::max(d.linf_u, d.linf_w));
            energy.push_back(d.energy);
        }
        write_svg_plot(out / "evolve.svg", "distance to the steady state", "t", "value",
                       {{"L-inf distance", t, dist}, {"energy", t, energy}}, true);
    }
    std::cout << "steps " << sum.steps << "  final/initial distance " << format_number(d1 / d0) << "  mu_hat "
              << format_number(sum.mu_hat) << "\n";
    return kExitOk;
}

int verify(const RunConfig& cfg, const fs::path& out) {
    const klayer_params pr = params_of(cfg);
    const klayer_radial_options opts = radial_options_of(cfg);
    const std::vector<double> eps = cfg.eps_list.empty() ? std::vector<double>{4e-3, 2e-3, 1e-3} : cfg.eps_list;
    klayer_expansion_row rows[4];
    check(klayer_verify_expansions(&pr, &opts, eps.data(), eps.size(), cfg.level, rows), "verify");
    CsvWriter csv(out / "verify.csv", {"quantity", "predicted", "extrapolated", "relative_gap", "pass"});
    bool all = true;
    for (const auto& row : rows) {
        csv.text_row({klayer_quantity_name(row.quantity), format_number(row.predicted),
                      format_number(row.extrapolated), format_number(row.relative_gap), row.pass ? "1" : "0"});
        all = all && row.pass;
        std::cout << klayer_quantity_name(row.quantity) << "  gap " << format_number(row.relative_gap)
                  << (row.pass ? "  pass" : "  FAIL") << "\n";
    }
    csv.close();
    if (!all) {
        std::cerr << "verification gap exceeds tolerance\n";
        return kExitGap;
    }
    return kExitOk;
}

int sweep(const RunConfig& cfg, const fs::path& out) {
    const klayer_params pr = params_of(cfg);
    const klayer_radial_options opts = radial_options_of(cfg);
    if (!cfg.eps_list.empty()) {
        std::vector<klayer_sweep_row> rows(cfg.eps_list.size());
        check(klayer_sweep_epsilon(&pr, &opts, cfg.eps_list.data(), rows.size(), cfg.level, rows.data()),
              "epsilon sweep");
        CsvWriter csv(out / "sweep_eps.csv", {"epsilon", "lambda_eps", "sigma", "slope_W", "slope_U", "thickness"});
        std::vector<double> e, lam;
        for (const auto& r : rows) {
            csv.row({r.epsilon, r.lambda_eps, r.sigma, r.slope_W, r.slope_U, r.thickness});
            e.push_back(r.epsilon);
            lam.push_back(r.lambda_eps / r.epsilon);
        }
        csv.close();
        if (cfg.plots) {
            write_svg_plot(out / "sweep_eps.svg", "lambda_eps / epsilon", "epsilon", "lambda_eps / epsilon",
                           {{"computed", e, lam}});
        }
    }
    if (!cfg.p_list.empty()) {
        std::vector<klayer_p_limit_row> rows(cfg.p_list.size());
        check(klayer_sweep_p(&pr, &opts, cfg.p_list.data(), rows.size(), cfg.width, rows.data()), "p sweep");
        CsvWriter csv(out / "sweep_p.csv", {"p", "sup_deviation", "boundary_mass_fraction"});
        std::vector<double> ps, dev, frac;
        for (const auto& r : rows) {
            csv.row({r.p, r.sup_deviation, r.boundary_mass_fraction});
            ps.push_back(r.p);
            dev.push_back(r.sup_deviation);
            frac.push_back(r.boundary_mass_fraction);
        }
        csv.close();
        if (cfg.plots) {
            write_svg_plot(out / "sweep_p.svg", "large-p limit", "p", "value",
                           {{"max |W - b|", ps, dev}, {"boundary mass fraction", ps, frac}});
        }
    }
    return kExitOk;
}

int run(const RunConfig& cfg) {
    const fs::path out = cfg.output_dir;
    prepare_output_dir(out);
    switch (cfg.command) {
        case Command::SteadyRadial: return steady_radial(cfg, out);
        case Command::Steady2D: return steady_2d(cfg, out);
        case Command::Evolve: return evolve(cfg, out);
        case Command::Verify: return verify(cfg, out);
        case Command::Sweep: return sweep(cfg, out);
    }
    return kExitFailure;
}

struct Flags {
    std::string config;
    std::deque<std::pair<const char*, std::string>> values;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Flags& f) {
    static const std::pair<const char*, const char*> options[] = {
        {"--out", "output_dir"}, {"--eps", "epsilon"},  {"--p", "p"},     {"--b", "b"},
        {"--m", "m"},            {"--n", "n"},          {"--R", "R"},     {"--grid-count", "grid_count"},
        {"--tol", "tol"},
    };
    app->add_option("--config", f.config, "key=value configuration file");
    for (const auto& [flag, key] : options) {
        f.values.emplace_back(key, "");
        app->add_option(flag, f.values.back().second, std::string("sets ") + key);
    }
    app->add_option("--set", f.sets, "extra key=value entries (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary layers of the stationary chemotaxis model"};
    app.require_subcommand(1);
    Flags flags;
    const std::pair<const char*, const char*> commands[] = {
        {"steady-radial", "radial nonlocal steady state"},
        {"steady-2d", "planar steady state and curvature-thickness report"},
        {"evolve", "radial time evolution from a perturbed steady state"},
        {"verify", "boundary expansion checks against the leading-order formulas"},
        {"sweep", "parameter sweeps over epsilon and p"},
        {"run", "run the command named in the configuration file"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, flags);
        subs.push_back(sub);
    }
    std::string eps_list, p_list;
    subs[4]->add_option("--eps-list", eps_list, "comma-separated epsilons");
    subs[4]->add_option("--p-list", p_list, "comma-separated exponents");
    subs[3]->add_option("--eps-list", eps_list, "decreasing epsilons for the extrapolation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFailure;
    }

    std::vector<std::pair<std::string, std::string>> overrides;
    const std::string chosen = app.get_subcommands().front()->get_name();
    if (chosen != "run") overrides.emplace_back("command", chosen);
    for (const auto& [key, value] : flags.values) {
        if (!value.empty()) overrides.emplace_back(key, value);
    }
    if (!eps_list.empty()) overrides.emplace_back("eps_list", eps_list);
    if (!p_list.empty()) overrides.emplace_back("p_list", p_list);
    for (const std::string& s : flags.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::cerr << "config error: --set expects key=value, got '" << s << "'\n";
            return kExitFailure;
        }
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }

    try {
        return run(parse_config(flags.config, overrides));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitFailure;
}
