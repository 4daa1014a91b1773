// Command-line front end: kernel/gain computation, closed-loop simulation,
// and the verification suite, all emitting CSV artifacts.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cranebc/checks.hpp"
#include "cranebc/config.hpp"
#include "cranebc/pipeline.hpp"

namespace {

cranebc::RunConfig load_or_default(const std::string& path) {
    if (path.empty()) {
        cranebc::RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    return cranebc::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time boundary control of an overhead crane with a flexible cable"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";

    auto* kernels = app.add_subcommand("kernels", "solve kernels and gains, then stop");
    kernels->add_option("--config", config_path, "configuration file");
    kernels->add_option("--out", out_dir, "output directory");

    auto* simulate = app.add_subcommand("simulate", "full pipeline: kernels, gains, simulation");
    simulate->add_option("--config", config_path, "configuration file");
    simulate->add_option("--out", out_dir, "output directory");

    auto* check = app.add_subcommand("check", "run the acceptance property suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            const int failures = cranebc::run_acceptance_suite(std::cout);
            return failures == 0 ? 0 : 3;
        }
        const cranebc::RunConfig cfg = load_or_default(config_path);
        cranebc::run_pipeline(cfg, out_dir, kernels->parsed());
        std::cout << "artifacts written to " << out_dir << "\n";
        return 0;
    } catch (const cranebc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cranebc::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
