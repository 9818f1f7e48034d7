#include "onehom/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace onehom::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string describe(const std::string& key, int line, const std::string& what) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    if (!key.empty()) os << "key '" << key << "': ";
    os << what;
    return os.str();
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, int line, const std::string& v) {
    size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, line, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key, line, "expected a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, int line, const std::string& v) {
    size_t used = 0;
    long x = 0;
    try {
        x = std::stol(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, line, "expected an integer, got '" + v + "'");
    }
    if (used != v.size() || x < -2147483647L || x > 2147483647L)
        throw ConfigError(key, line, "expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

}  // namespace

ConfigError::ConfigError(const std::string& k, int l, const std::string& what)
    : Error(describe(k, l, what)), key(k), line(l) {}

const std::set<std::string>& RunConfig::known_keys() {
    static const std::set<std::string> keys = {
        // seed / minimizer
        "s", "eps", "delta", "grids", "max_iters", "gradient_tolerance", "memory", "armijo", "backtrack",
        "max_backtracks", "modes", "pin_window", "residual_factor", "gradient_check_tol",
        // profile ODE
        "c", "tau", "theta_min", "theta_max", "nodes", "pre_decades", "fit_lo", "fit_hi", "order_tol",
        // verify
        "curve", "n", "r_inner", "r_outer", "radial_nodes", "measure", "verify_tol",
        // el-fail
        "embed_n", "embed_refine", "embed_theta_max", "width_max", "widths", "direction", "eq_bound",
        "slope_tol",
        // cross
        "cross_lo_cells", "cross_hi", "cross_theta_max", "cross_tol", "curve_file",
        // plot
        "input", "kind", "preset"};
    return keys;
}

RunConfig RunConfig::parse(std::istream& is, const std::string& source) {
    RunConfig cfg;
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", line, source + ": expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("", line, source + ": empty key");
        if (cfg.values_.count(key)) throw ConfigError(key, line, "duplicate key");
        if (value.empty()) throw ConfigError(key, line, "empty value");
        cfg.set(key, value, line);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open config file " + path.string());
    return parse(in, path.string());
}

void RunConfig::apply_environment(const EnvLookup& lookup) {
    const EnvLookup env = lookup ? lookup : [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
    for (const auto& key : known_keys()) {
        std::string name = env_prefix;
        for (char ch : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (auto v = env(name)) {
            const std::string value = trim(*v);
            if (value.empty()) throw ConfigError(key, 0, "empty value in environment variable " + name);
            set(key, value);
        }
    }
}

void RunConfig::set(const std::string& key, const std::string& value, int line) {
    if (!known_keys().count(key)) throw ConfigError(key, line, "unknown key");
    values_[key] = value;
    lines_[key] = line;
}

int RunConfig::line_of(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_double(key, line_of(key), it->second);
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_int(key, line_of(key), it->second);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(key, line_of(key), "expected a boolean, got '" + it->second + "'");
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::vector<double> RunConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_double(key, line_of(key), item));
    if (out.empty()) throw ConfigError(key, line_of(key), "empty list");
    return out;
}

std::vector<int> RunConfig::get_ints(const std::string& key, const std::vector<int>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_int(key, line_of(key), item));
    if (out.empty()) throw ConfigError(key, line_of(key), "empty list");
    return out;
}

}  // namespace onehom::cli
