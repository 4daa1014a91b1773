#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cranebc/crane_model.hpp"
#include "cranebc/errors.hpp"
#include "cranebc/transport.hpp"

namespace cranebc {

/// Run configuration, defaults matching the reference parameter set
/// (m = 2 kg, rho = 2 kg/m, g = 9.81 m/s^2, psi = 1/2, zeta = 1/3,
/// kernel grid 200, transport grid 20, dt = 0.01).
struct RunConfig {
    CraneParams params;
    int kernel_n = 200;
    int transport_nx = 20;
    double dt = 0.01;
    double t_end = 6.0;
    double platform_offset = 0.5;
    double platform_velocity = 0.0;
    std::string y0_profile;  ///< optional CSV path (s,value); overrides the rigid profile
    std::string y1_profile;
    double settling_threshold = 1e-4;

    void validate() const {
        params.validate();
        if (kernel_n < 2) throw ConfigError("kernel_n must be >= 2");
        if (transport_nx < 2) throw ConfigError("transport_nx must be >= 2");
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
        if (!(settling_threshold > 0.0)) throw ConfigError("settling_threshold must be > 0");
        const DerivedConstants dc = DerivedConstants::from(params);
        cfl_check(dt, 1.0 / transport_nx, dc);  // rejects at load time
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_number(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": value of '" + key +
                          "' is not a number: '" + v + "'");
    }
}

}  // namespace detail

/// Parse a flat key = value configuration ('#' starts a comment). Unknown
/// keys are an error; an empty file yields the defaults.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        auto num = [&] { return detail::parse_number(val, key, lineno); };
        if (key == "m") cfg.params.m = num();
        else if (key == "rho") cfg.params.rho = num();
        else if (key == "g") cfg.params.g = num();
        else if (key == "M") cfg.params.M = num();
        else if (key == "nu1") cfg.params.nu1 = num();
        else if (key == "nu2") cfg.params.nu2 = num();
        else if (key == "kernel_n") cfg.kernel_n = static_cast<int>(num());
        else if (key == "transport_nx") cfg.transport_nx = static_cast<int>(num());
        else if (key == "dt") cfg.dt = num();
        else if (key == "t_end") cfg.t_end = num();
        else if (key == "platform_offset") cfg.platform_offset = num();
        else if (key == "platform_velocity") cfg.platform_velocity = num();
        else if (key == "settling_threshold") cfg.settling_threshold = num();
        else if (key == "y0_profile") cfg.y0_profile = val;
        else if (key == "y1_profile") cfg.y1_profile = val;
        else
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

/// Two-column CSV (s, value); an optional non-numeric header row is skipped.
inline std::pair<std::vector<double>, std::vector<double>>
load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file: " + path);
    std::vector<double> s, f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a, b;
        if (!(row >> a >> b)) {
            if (lineno == 1) continue;  // header
            throw ConfigError(path + " line " + std::to_string(lineno) + ": expected two numbers");
        }
        s.push_back(a);
        f.push_back(b);
    }
    if (s.size() < 3) throw ConfigError(path + ": profile needs at least 3 rows");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i] > s[i - 1])) throw ConfigError(path + ": s column must be strictly increasing");
    if (s.front() > 1e-12 || s.back() < 1.0 - 1e-12)
        throw ConfigError(path + ": s column must cover [0,1]");
    return {std::move(s), std::move(f)};
}

}  // namespace cranebc
