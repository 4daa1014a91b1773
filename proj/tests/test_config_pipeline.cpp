#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cranebc/config.hpp"
#include "cranebc/csv.hpp"
#include "cranebc/pipeline.hpp"

using namespace cranebc;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path base = [] {
        fs::path p = fs::temp_directory_path() / "cranebc_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return base;
}

fs::path write_file(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("round-trip double formatting") {
    for (double v : {0.1, 1.0 / 3.0, 2.3784291267879203, -1e-300, 0.0}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("empty config yields the reference defaults") {
    const fs::path p = write_file("empty.cfg", "");
    const RunConfig cfg = load_config(p.string());
    CHECK(cfg.params.m == 2.0);
    CHECK(cfg.params.rho == 2.0);
    CHECK(cfg.params.g == 9.81);
    CHECK(cfg.params.nu2 == 0.5);
    CHECK(cfg.params.nu1 == Approx(1.0 / 3.0));
    CHECK(cfg.kernel_n == 200);
    CHECK(cfg.transport_nx == 20);
    CHECK(cfg.dt == 0.01);
}

TEST_CASE("config parsing and validation errors") {
    SECTION("values and comments are parsed") {
        const fs::path p = write_file("ok.cfg",
                                      "# comment\n"
                                      "m = 3.5\n"
                                      "dt = 0.005\n"
                                      "t_end = 2.5  # trailing comment\n"
                                      "kernel_n = 64\n");
        const RunConfig cfg = load_config(p.string());
        CHECK(cfg.params.m == 3.5);
        CHECK(cfg.dt == 0.005);
        CHECK(cfg.t_end == 2.5);
        CHECK(cfg.kernel_n == 64);
    }
    SECTION("nu2 out of range") {
        const fs::path p = write_file("bad_nu2.cfg", "nu2 = 1.5\n");
        CHECK_THROWS_WITH(load_config(p.string()),
                          Catch::Matchers::ContainsSubstring("nu2 must lie in (0,1)"));
    }
    SECTION("CFL rejection at load time") {
        const fs::path p = write_file("bad_cfl.cfg", "dt = 0.02\ntransport_nx = 20\n");
        CHECK_THROWS_AS(load_config(p.string()), ConfigError);
    }
    SECTION("unknown key names the line") {
        const fs::path p = write_file("bad_key.cfg", "bogus = 1\n");
        CHECK_THROWS_WITH(load_config(p.string()), Catch::Matchers::ContainsSubstring("line 1"));
    }
    SECTION("non-numeric value") {
        const fs::path p = write_file("bad_val.cfg", "m = fast\n");
        CHECK_THROWS_AS(load_config(p.string()), ConfigError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_config("/nonexistent/zz.cfg"), ConfigError);
    }
}

TEST_CASE("profile loading") {
    SECTION("with header") {
        const fs::path p = write_file("prof.csv", "s,value\n0,0.5\n0.5,0.5\n1,0.5\n");
        const auto [s, f] = load_profile(p.string());
        CHECK(s.size() == 3);
        CHECK(f[1] == 0.5);
    }
    SECTION("must cover the cable") {
        const fs::path p = write_file("short.csv", "0,0\n0.4,0\n0.8,0\n");
        CHECK_THROWS_AS(load_profile(p.string()), ConfigError);
    }
    SECTION("must be increasing") {
        const fs::path p = write_file("dec.csv", "0,0\n0.6,0\n0.5,0\n1,0\n");
        CHECK_THROWS_AS(load_profile(p.string()), ConfigError);
    }
}

TEST_CASE("pipeline writes the documented artifacts deterministically") {
    RunConfig cfg;
    cfg.kernel_n = 40;
    cfg.transport_nx = 10;
    cfg.dt = 0.02;  // CFL ratio ~0.9 at dx = 0.1
    cfg.t_end = 1.0;
    cfg.validate();

    const fs::path out_a = temp_dir() / "run_a";
    const fs::path out_b = temp_dir() / "run_b";
    run_pipeline(cfg, out_a.string());
    run_pipeline(cfg, out_b.string());

    const std::vector<std::string> files = {"kernels_K.csv", "kernels_L.csv", "gains.csv",
                                            "phi.csv",       "fields.csv",    "platform.csv",
                                            "cable.csv",     "control.csv",   "summary.csv"};
    for (const auto& f : files) {
        INFO(f);
        REQUIRE(fs::exists(out_a / f));
        const std::string a = slurp(out_a / f);
        CHECK(a == slurp(out_b / f));
        CHECK(a.find('\n') != std::string::npos);  // header row present
    }

    SECTION("kernels-only stage stops before simulation artifacts") {
        const fs::path out_k = temp_dir() / "run_k";
        run_pipeline(cfg, out_k.string(), true);
        CHECK(fs::exists(out_k / "kernels_K.csv"));
        CHECK(fs::exists(out_k / "gains.csv"));
        CHECK_FALSE(fs::exists(out_k / "phi.csv"));
    }
}

TEST_CASE("zero-offset pipeline produces identically zero series") {
    RunConfig cfg;
    cfg.kernel_n = 40;
    cfg.transport_nx = 10;
    cfg.dt = 0.02;
    cfg.t_end = 0.5;
    cfg.platform_offset = 0.0;
    cfg.validate();
    const fs::path out = temp_dir() / "run_zero";
    run_pipeline(cfg, out.string());
    std::ifstream in(out / "platform.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        CHECK(std::strtod(line.substr(comma + 1).c_str(), nullptr) == 0.0);
    }
}

TEST_CASE("initial profiles from files feed the simulation") {
    // rigid 0.25 offset provided through profile files
    std::ostringstream y0;
    y0 << "s,value\n";
    for (int i = 0; i <= 20; ++i) y0 << i / 20.0 << "," << 0.25 << "\n";
    const fs::path y0p = write_file("y0.csv", y0.str());

    RunConfig cfg;
    cfg.kernel_n = 40;
    cfg.transport_nx = 10;
    cfg.dt = 0.02;
    cfg.t_end = 0.5;
    cfg.y0_profile = y0p.string();
    cfg.platform_offset = 0.25;
    cfg.validate();
    const KernelStage stage = run_kernel_stage(cfg);
    const SimulationResult res = run_simulation(cfg, stage);
    CHECK(res.Xp.front() == Approx(0.25).epsilon(1e-12));
}
