#include "onehom/cli.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace onehom::cli {

namespace {

void print_summary(const RunReport& rep) {
    for (const auto& c : rep.checks) {
        const char* verdict = !c.gated ? "SKIP" : (c.pass() ? "PASS" : "FAIL");
        std::printf("%s %-36s value=%.6g tol=%.3g\n", verdict, c.label.c_str(), c.value, c.tolerance);
    }
    std::printf("%s %s\n", rep.command.c_str(), rep.pass() ? "PASS" : "FAIL");
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Singular one-homogeneous minimizers: construction and verification"};
    app.require_subcommand(1);

    struct Args {
        std::string config;
        std::string out = ".";
        std::vector<std::string> checks, no_checks, sets;
    };
    std::map<std::string, Args> args;
    for (const auto& name : commands()) {
        CLI::App* sub = app.add_subcommand(name);
        Args& a = args[name];
        sub->add_option("--config", a.config, "key=value configuration file");
        sub->add_option("--out", a.out, "output directory");
        sub->add_option("--check", a.checks, "gate the exit code on these checks only");
        sub->add_option("--no-check", a.no_checks, "never gate the exit code on these checks");
        sub->add_option("--set", a.sets, "override a configuration key (key=value)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const Args& a = args[command];
    try {
        RunConfig cfg = a.config.empty() ? RunConfig{} : RunConfig::load(a.config);
        cfg.apply_environment();
        for (const auto& kv : a.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError(kv, 0, "--set expects key=value");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        RunOptions opt;
        opt.out_dir = a.out;
        opt.only_checks = a.checks;
        opt.skip_checks = a.no_checks;
        const RunReport rep = run_pipeline(command, cfg, opt);
        print_summary(rep);
        return rep.pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyArtifact& e) {
        std::cerr << "plot error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << command << " failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace onehom::cli
