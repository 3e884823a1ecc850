#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace klayer_cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { SteadyRadial, Steady2D, Evolve, Verify, Sweep };

const char* to_string(Command c);

struct RunConfig {
    Command command = Command::SteadyRadial;

    double epsilon = 0.0;
    double p = 0.0;
    double b = 0.0;
    double m = 0.0;
    int n = 0;
    double R = 0.0;

    int grid_count = 0;          // 0: 4000 for steady solves, 200 for evolve
    double layer_fraction = 0.0;  // 0: 0.05 for steady solves, 0.1 for evolve
    double tol = 1e-10;
    double nonlocal_tol = 0.0;    // 0: 1e-12 for evolve, 1e-8 otherwise
    int threads = 0;  // 0: hardware concurrency

    std::string shape = "disk";  // disk | ellipse | star
    double shape_a = 0.0;        // 0: R for disk and star, sqrt(2) R for the ellipse
    double shape_b = 0.0;        // 0: R / sqrt(2)
    double star_amplitude = 0.2;
    int star_k = 5;
    double h = 0.01;
    int samples = 256;
    std::string solver = "newton";  // newton | gauss-seidel

    double level = 0.5;  // thickness level c

    double dt = 1e-3;
    double cfl = 0.5;
    double t_end = 10.0;
    int output_every = 20;
    double stop_distance = 1e-10;
    double perturb_u = 0.01;
    double perturb_w = 0.01;
    long seed = 0;

    std::vector<double> eps_list;
    std::vector<double> p_list;
    double width = 0.1;  // boundary strip for the p sweep mass fraction

    std::string output_dir = "out";
    bool plots = true;

    int effective_grid_count() const;
    double effective_layer_fraction() const;
    double effective_nonlocal_tol() const;
};

/// Entries are key=value with optional '#' comments. Overrides are applied
/// after the file and win over it. Unknown keys, malformed values and
/// missing required keys raise ConfigError.
RunConfig parse_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides);

/// Same, with the file contents given directly; `origin` names it in messages.
RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::vector<std::pair<std::string, std::string>>& overrides);

std::vector<std::string> known_keys();

}  // namespace klayer_cli
