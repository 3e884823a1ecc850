#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace klayer_cli {

const char* to_string(Command c) {
    switch (c) {
        case Command::SteadyRadial: return "steady-radial";
        case Command::Steady2D: return "steady-2d";
        case Command::Evolve: return "evolve";
        case Command::Verify: return "verify";
        case Command::Sweep: return "sweep";
    }
    return "unknown";
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_real(const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x)) throw std::invalid_argument("real");
    return x;
}

long to_integer(const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    errno = 0;
    const long x = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) throw std::invalid_argument("integer");
    return x;
}

int to_int(const std::string& v) {
    const long x = to_integer(v);
    if (x < -2147483647L || x > 2147483647L) throw std::invalid_argument("integer");
    return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(trim(item)));
    if (out.empty()) throw std::invalid_argument("list");
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("boolean");
}

std::string one_of(const std::string& v, std::initializer_list<const char*> options) {
    for (const char* o : options) {
        if (v == o) return v;
    }
    throw std::invalid_argument("choice");
}

Command to_command(const std::string& v) {
    for (Command c : {Command::SteadyRadial, Command::Steady2D, Command::Evolve, Command::Verify, Command::Sweep}) {
        if (v == to_string(c)) return c;
    }
    throw std::invalid_argument("command");
}

struct Field {
    const char* type;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::map<std::string, Field>& schema() {
    static const std::map<std::string, Field> table = {
        {"command", {"command", [](RunConfig& c, const std::string& v) { c.command = to_command(v); }}},
        {"epsilon", {"real", [](RunConfig& c, const std::string& v) { c.epsilon = to_real(v); }}},
        {"p", {"real", [](RunConfig& c, const std::string& v) { c.p = to_real(v); }}},
        {"b", {"real", [](RunConfig& c, const std::string& v) { c.b = to_real(v); }}},
        {"m", {"real", [](RunConfig& c, const std::string& v) { c.m = to_real(v); }}},
        {"n", {"integer", [](RunConfig& c, const std::string& v) { c.n = to_int(v); }}},
        {"R", {"real", [](RunConfig& c, const std::string& v) { c.R = to_real(v); }}},
        {"grid_count", {"integer", [](RunConfig& c, const std::string& v) { c.grid_count = to_int(v); }}},
        {"layer_fraction", {"real", [](RunConfig& c, const std::string& v) { c.layer_fraction = to_real(v); }}},
        {"tol", {"real", [](RunConfig& c, const std::string& v) { c.tol = to_real(v); }}},
        {"nonlocal_tol", {"real", [](RunConfig& c, const std::string& v) { c.nonlocal_tol = to_real(v); }}},
        {"threads", {"integer", [](RunConfig& c, const std::string& v) { c.threads = to_int(v); }}},
        {"shape", {"disk|ellipse|star",
                   [](RunConfig& c, const std::string& v) { c.shape = one_of(v, {"disk", "ellipse", "star"}); }}},
        {"shape_a", {"real", [](RunConfig& c, const std::string& v) { c.shape_a = to_real(v); }}},
        {"shape_b", {"real", [](RunConfig& c, const std::string& v) { c.shape_b = to_real(v); }}},
        {"star_amplitude", {"real", [](RunConfig& c, const std::string& v) { c.star_amplitude = to_real(v); }}},
        {"star_k", {"integer", [](RunConfig& c, const std::string& v) { c.star_k = to_int(v); }}},
        {"h", {"real", [](RunConfig& c, const std::string& v) { c.h = to_real(v); }}},
        {"samples", {"integer", [](RunConfig& c, const std::string& v) { c.samples = to_int(v); }}},
        {"solver", {"newton|gauss-seidel",
                    [](RunConfig& c, const std::string& v) { c.solver = one_of(v, {"newton", "gauss-seidel"}); }}},
        {"level", {"real", [](RunConfig& c, const std::string& v) { c.level = to_real(v); }}},
        {"dt", {"real", [](RunConfig& c, const std::string& v) { c.dt = to_real(v); }}},
        {"cfl", {"real", [](RunConfig& c, const std::string& v) { c.cfl = to_real(v); }}},
        {"t_end", {"real", [](RunConfig& c, const std::string& v) { c.t_end = to_real(v); }}},
        {"output_every", {"integer", [](RunConfig& c, const std::string& v) { c.output_every = to_int(v); }}},
        {"stop_distance", {"real", [](RunConfig& c, const std::string& v) { c.stop_distance = to_real(v); }}},
        {"perturb_u", {"real", [](RunConfig& c, const std::string& v) { c.perturb_u = to_real(v); }}},
        {"perturb_w", {"real", [](RunConfig& c, const std::string& v) { c.perturb_w = to_real(v); }}},
        {"seed", {"integer", [](RunConfig& c, const std::string& v) { c.seed = to_integer(v); }}},
        {"eps_list", {"real list", [](RunConfig& c, const std::string& v) { c.eps_list = to_list(v); }}},
        {"p_list", {"real list", [](RunConfig& c, const std::string& v) { c.p_list = to_list(v); }}},
        {"width", {"real", [](RunConfig& c, const std::string& v) { c.width = to_real(v); }}},
        {"output_dir", {"path", [](RunConfig& c, const std::string& v) {
                            if (v.empty()) throw std::invalid_argument("path");
                            c.output_dir = v;
                        }}},
        {"plots", {"boolean", [](RunConfig& c, const std::string& v) { c.plots = to_bool(v); }}},
    };
    return table;
}

const char* kRequired[] = {"command", "epsilon", "p", "b", "m", "n", "R"};

void apply(RunConfig& cfg, std::set<std::string>& seen, const std::string& key, const std::string& value,
           const std::string& where) {
    const auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    try {
        it->second.set(cfg, value);
    } catch (const std::invalid_argument&) {
        throw ConfigError(where + ": key '" + key + "' expects " + it->second.type + ", got '" + value + "'");
    }
    seen.insert(key);
}

void validate(const RunConfig& c) {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(c.epsilon > 0.0, "epsilon must be positive");
    check(c.p > 0.0, "p must be positive");
    check(c.b > 0.0, "b must be positive");
    check(c.m > 0.0, "m must be positive");
    check(c.n >= 1, "n must be at least 1");
    check(c.R > 0.0, "R must be positive");
    check(c.grid_count == 0 || c.grid_count >= 16, "grid_count must be at least 16");
    check(c.layer_fraction >= 0.0, "layer_fraction must be positive");
    check(c.tol > 0.0 && c.nonlocal_tol >= 0.0, "tolerances must be positive");
    check(c.threads >= 0, "threads must be non-negative");
    check(c.h > 0.0, "h must be positive");
    check(c.samples >= 1, "samples must be positive");
    check(c.level > 0.0 && c.level < c.b, "level must lie in (0, b)");
    check(c.dt > 0.0 && c.t_end > 0.0, "dt and t_end must be positive");
    check(c.cfl > 0.0 && c.cfl < 1.0, "cfl must lie in (0, 1)");
    check(c.output_every >= 1, "output_every must be at least 1");
    check(c.stop_distance >= 0.0, "stop_distance must be non-negative");
    check(c.width > 0.0, "width must be positive");
    for (double e : c.eps_list) check(e > 0.0, "eps_list entries must be positive");
    for (double q : c.p_list) check(q > 0.0, "p_list entries must be positive");
    if (c.command == Command::Evolve) check(c.n <= 3, "evolve supports n <= 3");
    if (c.command == Command::Steady2D) check(c.n == 2, "steady-2d requires n = 2");
    if (c.command == Command::Sweep) check(!c.eps_list.empty() || !c.p_list.empty(), "sweep needs eps_list or p_list");
}

}  // namespace

int RunConfig::effective_grid_count() const {
    if (grid_count > 0) return grid_count;
    return command == Command::Evolve ? 200 : 4000;
}

double RunConfig::effective_layer_fraction() const {
    if (layer_fraction > 0.0) return layer_fraction;
    return command == Command::Evolve ? 0.1 : 0.05;
}

double RunConfig::effective_nonlocal_tol() const {
    if (nonlocal_tol > 0.0) return nonlocal_tol;
    return command == Command::Evolve ? 1e-12 : 1e-8;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, f] : schema()) keys.push_back(k);
    return keys;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(number);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
        apply(cfg, seen, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
    for (const auto& [key, value] : overrides) apply(cfg, seen, key, value, "flag --" + key);

    std::vector<std::string> missing;
    for (const char* k : kRequired) {
        if (!seen.count(k)) missing.push_back(k);
    }
    if (!missing.empty()) {
        std::string msg = "missing required key";
        msg += missing.size() > 1 ? "s: " : ": ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        throw ConfigError(msg);
    }
    validate(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (path.empty()) return parse_config_text("", "<flags>", overrides);
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot read config file " + path);
    std::ostringstream text;
    text << file.rdbuf();
    return parse_config_text(text.str(), path, overrides);
}

}  // namespace klayer_cli
