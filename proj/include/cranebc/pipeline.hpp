#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cranebc/closed_loop.hpp"
#include "cranebc/config.hpp"
#include "cranebc/crane_model.hpp"
#include "cranebc/csv.hpp"
#include "cranebc/kernel_engine.hpp"

namespace cranebc {

struct KernelStage {
    TriangularGrid grid;
    KernelSet K;
    KernelSet L;          ///< Volterra route, used downstream
    KernelSet L_goursat;  ///< independent route, kept for cross-checks
    GainProfile gains;
};

/// Kernel and gain computation: direct kernels by the Goursat march, inverse
/// kernels through the Volterra relation (cross-checked against their own
/// Goursat solve), gains and mu by trapezoidal rule on the kernel grid.
inline KernelStage run_kernel_stage(const RunConfig& cfg) {
    const DerivedConstants dc = DerivedConstants::from(cfg.params);
    TriangularGrid grid(cfg.kernel_n);
    const Coefficients coeffs = coefficient_functions(dc);
    KernelSet K = solve_direct_kernels(grid, coeffs);
    KernelSet L = invert_kernels_volterra(K, grid);
    KernelSet Lg = solve_inverse_kernels_goursat(grid, coeffs);
    GainProfile gains = compute_gains(L, grid, dc);
    return {grid, std::move(K), std::move(L), std::move(Lg), std::move(gains)};
}

inline InitialData build_initial_data(const RunConfig& cfg) {
    if (cfg.y0_profile.empty() && cfg.y1_profile.empty()) {
        InitialData d = InitialData::constant_offset(cfg.platform_offset, cfg.transport_nx);
        d.Xp1 = cfg.platform_velocity;
        return d;
    }
    InitialData d;
    if (!cfg.y0_profile.empty()) {
        auto [s, y0] = load_profile(cfg.y0_profile);
        d.s_nodes = std::move(s);
        d.y0 = std::move(y0);
    } else {
        d = InitialData::constant_offset(cfg.platform_offset, cfg.transport_nx);
    }
    if (!cfg.y1_profile.empty()) {
        auto [s, y1] = load_profile(cfg.y1_profile);
        if (!d.s_nodes.empty() && s != d.s_nodes)
            throw ConfigError("y0 and y1 profiles must share the same s-grid");
        if (d.s_nodes.empty()) {
            d.s_nodes = s;
            d.y0.assign(s.size(), cfg.platform_offset);
        }
        d.y1 = std::move(y1);
    } else {
        d.y1.assign(d.s_nodes.size(), 0.0);
    }
    d.Xp0 = cfg.platform_offset;
    d.Xp1 = cfg.platform_velocity;
    if (!d.y0.empty()) d.Xp0 = d.y0.back();
    return d;
}

/// Full closed-loop run in target coordinates with reconstruction of the
/// physical trajectories at every step.
inline SimulationResult run_simulation(const RunConfig& cfg, const KernelStage& stage) {
    const DerivedConstants dc = DerivedConstants::from(cfg.params);
    const HaimoExponents exps{cfg.params.nu1, cfg.params.nu2};
    const TransportGrid tg = TransportGrid::make(cfg.transport_nx, dc);
    const SampledGains gains = SampledGains::from(stage.gains, tg);

    SimulationResult res;
    res.mu = stage.gains.mu;
    res.cfl_ratio = cfl_check(cfg.dt, tg.dx, dc);
    res.s_out.resize(21);
    for (int k = 0; k <= 20; ++k) res.s_out[k] = k / 20.0;

    const InitialData init = build_initial_data(cfg);
    auto [phi0, frame0] = initialize(init, gains, stage.K, tg, cfg.params, dc);

    LoopState state{phi0, frame0, 0.0};
    state.Xp = reconstruct_platform(phi0, frame0, gains, tg, dc);

    const bool implicit = cfg.params.homogeneous_exponents();
    PhiTrajectory explicit_traj;  // fallback when nu1 > nu2/(2-nu2)
    if (!implicit) explicit_traj = integrate_phi_rk4(phi0, cfg.dt, cfg.t_end, exps);

    const int nsteps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    auto record = [&](const LoopState& s) {
        res.t.push_back(s.phi.t);
        res.phi.push_back(s.phi);
        res.frames.push_back(s.frame);
        res.Xp.push_back(s.Xp);
        res.y.push_back(
            reconstruct_cable(s.frame, stage.L, s.Xp, tg, res.s_out, cfg.params, dc));
        const auto [U, V] = control_signals(s.phi, s.frame, stage.gains, gains, tg, res.y.back(),
                                            res.s_out, cfg.params, dc, exps);
        res.U.push_back(U);
        res.V.push_back(V);
    };
    record(state);
    for (int k = 1; k <= nsteps; ++k) {
        if (implicit) {
            state = step(state, gains, tg, dc, cfg.dt, exps);
        } else {
            LoopState next;
            next.phi = explicit_traj.states[static_cast<std::size_t>(k)];
            FieldFrame work = state.frame;
            work.beta = beta_downwind_step(work, next.phi.phi_dot / gains.mu, cfg.dt, tg.dx, dc);
            next.frame.alpha = alpha_upwind_step(work, cfg.dt, tg.dx, dc);
            next.frame.beta = std::move(work.beta);
            next.frame.t = state.frame.t + cfg.dt;
            next.Xp = reconstruct_platform(next.phi, next.frame, gains, tg, dc);
            state = std::move(next);
        }
        record(state);
    }
    auto [T0, T1] = detect_settling(res, cfg.settling_threshold);
    res.T0_observed = T0;
    res.T1_observed = T1;
    return res;
}

namespace detail {

inline void write_kernels_csv(const std::string& path, const KernelSet& ks,
                              const TriangularGrid& grid) {
    CsvWriter w(path, "x,xi,value,field");
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i <= grid.n; ++i)
            for (int j = 0; j <= i; ++j)
                w.row(grid.x(i), grid.xi(j), ks[k].at(i, j), ks.labels[k]);
}

}  // namespace detail

/// Write the kernel-stage artifacts (kernels_K.csv, kernels_L.csv, gains.csv).
inline void write_kernel_artifacts(const KernelStage& stage, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::write_kernels_csv(out_dir + "/kernels_K.csv", stage.K, stage.grid);
    detail::write_kernels_csv(out_dir + "/kernels_L.csv", stage.L, stage.grid);
    CsvWriter g(out_dir + "/gains.csv", "x,a,b,a0,mu");
    for (std::size_t j = 0; j < stage.gains.x.size(); ++j)
        g.row(stage.gains.x[j], stage.gains.a[j], stage.gains.b[j], stage.gains.a0,
              stage.gains.mu);
}

/// Write the simulation artifacts (phi, fields, platform, cable, control,
/// summary).
inline void write_simulation_artifacts(const SimulationResult& res, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        CsvWriter w(out_dir + "/phi.csv", "t,phi,phi_dot");
        for (const auto& s : res.phi) w.row(s.t, s.phi, s.phi_dot);
    }
    {
        CsvWriter w(out_dir + "/fields.csv", "t,x,alpha,beta");
        for (std::size_t k = 0; k < res.t.size(); ++k) {
            const auto& f = res.frames[k];
            const double dx = 1.0 / static_cast<double>(f.alpha.size() - 1);
            for (std::size_t i = 0; i < f.alpha.size(); ++i)
                w.row(res.t[k], i * dx, f.alpha[i], f.beta[i]);
        }
    }
    {
        CsvWriter w(out_dir + "/platform.csv", "t,Xp");
        for (std::size_t k = 0; k < res.t.size(); ++k) w.row(res.t[k], res.Xp[k]);
    }
    {
        CsvWriter w(out_dir + "/cable.csv", "t,s,y");
        for (std::size_t k = 0; k < res.t.size(); ++k)
            for (std::size_t i = 0; i < res.s_out.size(); ++i)
                w.row(res.t[k], res.s_out[i], res.y[k][i]);
    }
    {
        CsvWriter w(out_dir + "/control.csv", "t,U,V");
        for (std::size_t k = 0; k < res.t.size(); ++k) w.row(res.t[k], res.U[k], res.V[k]);
    }
    {
        CsvWriter w(out_dir + "/summary.csv", "T0_observed,T1_observed,mu,cfl_ratio");
        const std::string t0 = res.T0_observed ? format_double(*res.T0_observed) : "";
        const std::string t1 = res.T1_observed ? format_double(*res.T1_observed) : "";
        w.row(t0, t1, res.mu, res.cfl_ratio);
    }
}

/// kernels -> gains -> simulation -> artifact files. `kernels_only` stops
/// after the kernel/gain stage.
inline void run_pipeline(const RunConfig& cfg, const std::string& out_dir,
                         bool kernels_only = false) {
    const KernelStage stage = run_kernel_stage(cfg);
    write_kernel_artifacts(stage, out_dir);
    if (kernels_only) return;
    const SimulationResult res = run_simulation(cfg, stage);
    write_simulation_artifacts(res, out_dir);
}

}  // namespace cranebc
