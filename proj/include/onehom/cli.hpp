#pragma once

#include "onehom/curve.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace onehom::cli {

// Malformed input or a violated parameter invariant. Exit code 2.
struct ConfigError : Error {
    ConfigError(const std::string& key, int line, const std::string& what);
    std::string key;
    int line = 0;  // 0 when the value did not come from a file line
};

struct EmptyArtifact : Error {
    using Error::Error;
};

// Flat key=value configuration. Lines are `key = value`; `#` starts a comment. Values may be
// overridden by environment variables ONEHOM_<KEY> (upper case) and then by --set key=value.
class RunConfig {
public:
    static RunConfig parse(std::istream& is, const std::string& source = "<config>");
    static RunConfig load(const std::filesystem::path& path);

    // getenv-like lookup; the default reads the process environment.
    using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;
    void apply_environment(const EnvLookup& lookup = {});
    void set(const std::string& key, const std::string& value, int line = 0);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    static const std::set<std::string>& known_keys();
    // Source line of a key (0 when set from the environment or the command line).
    int line_of(const std::string& key) const;
    static constexpr const char* env_prefix = "ONEHOM_";

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

struct Check {
    std::string name;   // gating name used by --check / --no-check
    std::string label;  // name plus qualifier, e.g. "j_exponent@tau=0.01"
    double value = 0.0;
    double tolerance = 0.0;
    bool gated = true;
    bool pass() const;
};

struct RunReport {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<Check> checks;
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::map<std::string, double> timings;  // seconds; written separately from the report

    void add(const std::string& name, const std::string& label, double value, double tolerance);
    bool pass() const;
    nlohmann::ordered_json to_json() const;
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::vector<std::string> only_checks;   // when nonempty, only these gate the exit code
    std::vector<std::string> skip_checks;   // never gate
    bool write_files = true;
};

const std::vector<std::string>& commands();
// Check names a command can emit (used to validate --check / --no-check).
const std::vector<std::string>& check_names(const std::string& command);

RunReport run_pipeline(const std::string& command, const RunConfig& config, const RunOptions& options);

enum class PlotKind { curve, spiral, loglog };
PlotKind parse_plot_kind(const std::string& s);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct PlotArtifact {
    std::string title;
    std::vector<PlotSeries> series;
    std::vector<std::string> notes;  // rendered under the title
};

// 800x800 SVG. For loglog the series are plotted as (log10 x, log10 y); nonpositive points drop.
std::string emit_plot(const PlotArtifact& artifact, PlotKind kind);

// Entry point used by the executable; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace onehom::cli
