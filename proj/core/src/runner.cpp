#include "fujitalab/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fujitalab/norms.hpp"
#include "fujitalab/report.hpp"
#include "fujitalab/testfn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fujitalab {

namespace {

class RunContext {
  public:
    RunContext(const Config& cfg, const std::string& verb) : cfg_(cfg), dir_(cfg.out_dir) {
        fs::create_directories(dir_ / "tables");
        fs::create_directories(dir_ / "reports");
        if (cfg.emit_fields) fs::create_directories(dir_ / "fields");
        manifest_.tool_version = kToolVersion;
        manifest_.command = verb;
        const std::string snapshot = cfg.canonical_text();
        manifest_.config_sha256 = sha256_hex(snapshot.data(), snapshot.size());
        write_text_atomic(dir_ / "config.snapshot", snapshot);
        manifest_.add_artifact(dir_, dir_ / "config.snapshot");
    }

    void begin_stage(const std::string& name) {
        stage_name_ = name;
        stage_start_ = std::chrono::steady_clock::now();
    }
    void end_stage() {
        const auto dt = std::chrono::steady_clock::now() - stage_start_;
        manifest_.stages.push_back(
            {stage_name_, std::chrono::duration<double>(dt).count()});
    }

    void write_csv(const std::string& rel, const std::string& text) {
        const fs::path path = dir_ / rel;
        write_text_atomic(path, text);
        manifest_.add_artifact(dir_, path);
    }
    void write_json(const std::string& rel, const json& j) {
        const fs::path path = dir_ / rel;
        write_text_atomic(path, j.dump(2) + "\n");
        manifest_.add_artifact(dir_, path);
    }
    void add_file(const fs::path& path) { manifest_.add_artifact(dir_, path); }

    const fs::path& dir() const { return dir_; }
    const Config& cfg() const { return cfg_; }

    void finish() { manifest_.write(dir_ / "manifest.json"); }

  private:
    const Config& cfg_;
    fs::path dir_;
    RunManifest manifest_;
    std::string stage_name_;
    std::chrono::steady_clock::time_point stage_start_;
};

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Resolved: return "resolved";
        case Outcome::BlowupDetected: return "blowup_detected";
        case Outcome::StepCollapse: return "step_collapse";
    }
    return "unknown";
}

json blowup_json(const BlowupEstimate& est) {
    return {{"T_est", est.T_est},
            {"fit_t_lo", est.fit_t_lo},
            {"fit_t_hi", est.fit_t_hi},
            {"fit_r2", est.fit_r2},
            {"rate_constant", est.rate_constant},
            {"low_confidence", est.low_confidence},
            {"flag", est.flag}};
}

std::string norm_history_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t,dt,l1,linf,lp\n";
    for (const auto& s : traj.norm_history)
        out << format_double(s.t) << "," << format_double(s.dt) << ","
            << format_double(s.l1) << "," << format_double(s.linf) << ","
            << format_double(s.lp) << "\n";
    return out.str();
}

void export_snapshots(RunContext& ctx, const Trajectory& traj) {
    json index = json::array();
    char name[64];
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        std::snprintf(name, sizeof(name), "fields/snap_%04zu.bin", k);
        const fs::path path = ctx.dir() / name;
        write_field_binary(path, traj.snapshots[k].field);
        index.push_back({{"time", traj.snapshots[k].t},
                         {"path", name},
                         {"sha256", sha256_file(path)}});
        ctx.add_file(path);
    }
    ctx.write_json("fields/snapshots.json", index);
}

int cmd_simulate(RunContext& ctx) {
    const Config& cfg = ctx.cfg();
    ctx.begin_stage("evolve");
    const SimParams params = cfg.sim_params();
    const Trajectory traj = evolve(params);
    ctx.end_stage();

    ctx.begin_stage("emit");
    if (cfg.emit_csv) ctx.write_csv("tables/norm_history.csv", norm_history_csv(traj));
    if (cfg.emit_fields) export_snapshots(ctx, traj);

    json rep;
    rep["outcome"] = outcome_name(traj.outcome);
    rep["t_final"] = traj.t_final;
    rep["note"] = traj.note;
    rep["grid"] = {{"n", params.grid.n}, {"N", params.grid.N}, {"L", params.grid.L}};
    rep["steps"] = traj.norm_history.size() - 1;
    if (traj.outcome != Outcome::Resolved) {
        const BlowupEstimate est = estimate_blowup_time(traj, params.p);
        rep["blowup"] = blowup_json(est);
        if (cfg.emit_json) ctx.write_json("reports/blowup.json", blowup_json(est));
    }
    if (cfg.emit_json) ctx.write_json("reports/simulate.json", rep);
    ctx.end_stage();
    return kExitOk;
}

int cmd_sweep(RunContext& ctx) {
    const Config& cfg = ctx.cfg();
    SimParams base = cfg.sim_params();
    const RegimeInfo info = classify_regime(cfg.n, cfg.m, cfg.p);

    ctx.begin_stage("sweep");
    const auto rows = sweep_epsilon(base, cfg.eps_list, cfg.domain_policy(), worker_count());
    ctx.end_stage();

    ctx.begin_stage("emit");
    std::ostringstream csv;
    csv << "eps,T_eps,converged,L_final,N_final,fit_r2\n";
    bool all_converged = true;
    for (const auto& r : rows) {
        csv << format_double(r.eps) << "," << format_double(r.T_eps) << ","
            << (r.converged ? 1 : 0) << "," << format_double(r.L_final) << ","
            << r.N_final << "," << format_double(r.fit_r2) << "\n";
        all_converged = all_converged && r.converged;
    }
    if (cfg.emit_csv) ctx.write_csv("tables/sweep.csv", csv.str());

    json rep;
    rep["regime"] = info.regime == Regime::Subcritical   ? "subcritical"
                    : info.regime == Regime::Critical    ? "critical"
                                                         : "supercritical";
    rep["p_fuj"] = info.p_fuj;
    int converged_rows = 0;
    for (const auto& r : rows) converged_rows += r.converged ? 1 : 0;
    rep["converged_rows"] = converged_rows;
    if (info.regime != Regime::Supercritical && converged_rows >= 4) {
        const ScalingFit fit = fit_scaling(rows, info);
        rep["fitted_slope"] = fit.fitted_slope;
        rep["intercept"] = fit.intercept;
        rep["stderr"] = fit.stderr_slope;
        rep["r2"] = fit.r2;
        rep["rows_used"] = fit.rows_used;
        rep["rms_residual"] = fit.rms_residual;
        if (info.regime == Regime::Subcritical)
            rep["theoretical_exponent"] = fit.theoretical_exponent;
        else
            rep["powerlaw_rms_residual"] = fit.powerlaw_rms_residual;
    } else {
        rep["fit"] = "skipped (needs >= 4 converged rows in a non-supercritical regime)";
    }
    if (cfg.emit_json) ctx.write_json("reports/fit.json", rep);
    ctx.end_stage();
    return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_kernel(RunContext& ctx) {
    const Config& cfg = ctx.cfg();
    const GridSpec grid = make_grid(cfg.n, cfg.grid_N, cfg.grid_L);
    const PropagatorSpec prop = make_propagator(cfg.m, grid);

    ctx.begin_stage("kernel");
    bool all_resolved = true;
    json rep = json::array();
    for (std::size_t k = 0; k < cfg.kernel_t_list.size(); ++k) {
        const double t = cfg.kernel_t_list[k];
        const KernelField kf = kernel_field(t, prop);
        all_resolved = all_resolved && !kf.under_resolved;

        // Profile along the first axis, remaining axes at the center node.
        std::ostringstream csv;
        csv << "x,K\n";
        std::array<int, 3> j{0, 0, 0};
        for (int a = 1; a < grid.n; ++a) j[a] = grid.N / 2;
        for (int i = 0; i < grid.N; ++i) {
            j[0] = i;
            csv << format_double(grid.coord(i)) << ","
                << format_double(kf.field.values[grid.flatten(j)]) << "\n";
        }
        char name[64];
        std::snprintf(name, sizeof(name), "tables/kernel_%02zu.csv", k);
        if (cfg.emit_csv) ctx.write_csv(name, csv.str());

        double kmin = kf.field.values[0], kmax = kf.field.values[0];
        for (double v : kf.field.values) {
            kmin = std::min(kmin, v);
            kmax = std::max(kmax, v);
        }
        double neg_mass = 0.0;
        for (double v : kf.field.values)
            if (v < 0.0) neg_mass += v;
        neg_mass *= grid.cell_volume;
        rep.push_back({{"t", t},
                       {"csv", name},
                       {"mass", mass(kf.field)},
                       {"min", kmin},
                       {"max", kmax},
                       {"negative_part_mass", neg_mass},
                       {"under_resolved", kf.under_resolved}});
    }
    if (cfg.emit_json) ctx.write_json("reports/kernel.json", rep);
    ctx.end_stage();
    return all_resolved ? kExitOk : kExitNotConverged;
}

int cmd_decay_check(RunContext& ctx) {
    const Config& cfg = ctx.cfg();
    const GridSpec grid = make_grid(cfg.n, cfg.grid_N, cfg.grid_L);
    const PropagatorSpec prop = make_propagator(cfg.m, grid);

    ctx.begin_stage("decay_fit");
    std::vector<double> t_list(cfg.decay_points);
    for (int k = 0; k < cfg.decay_points; ++k)
        t_list[k] = cfg.decay_t_lo *
                    std::pow(cfg.decay_t_hi / cfg.decay_t_lo,
                             static_cast<double>(k) / (cfg.decay_points - 1));
    const auto probes = default_decay_probes(grid);
    const DecayFitReport rep = decay_exponent_fit(prop, cfg.decay_p, cfg.decay_q, t_list, probes);
    ctx.end_stage();

    ctx.begin_stage("emit");
    std::ostringstream csv;
    csv << "t,ratio\n";
    for (std::size_t i = 0; i < rep.t_samples.size(); ++i)
        csv << format_double(rep.t_samples[i]) << "," << format_double(rep.ratios[i]) << "\n";
    if (cfg.emit_csv) ctx.write_csv("tables/decay.csv", csv.str());

    if (cfg.emit_json)
        ctx.write_json("reports/decay.json",
                       {{"m", rep.m},
                        {"n", rep.n},
                        {"p", rep.p},
                        {"q", std::isinf(rep.q) ? json("inf") : json(rep.q)},
                        {"fitted_slope", rep.fitted_slope},
                        {"theoretical_slope", rep.theoretical_slope},
                        {"residual", rep.residual}});
    ctx.end_stage();
    return kExitOk;
}

// Simulation parameters for the testfn trajectory: the box must contain
// the support of the largest cutoff and snapshots must cover [0, R_max]
// densely enough for space-time quadrature.
SimParams testfn_sim_params(const Config& cfg, double R_max) {
    SimParams params = cfg.sim_params();
    const double radius = std::pow(R_max, 1.0 / (2.0 * cfg.m));
    if (params.grid.L < 2.4 * radius) {
        const double L = 2.4 * radius;
        const double width = cfg.u0 == "gaussian" ? cfg.u0_width : 1.0;
        int N = params.grid.N;
        if (cfg.grid_N == 0) {
            N = 64;
            while (N < L * cfg.points_per_width / width && N < cfg.N_cap) N *= 2;
        }
        params.grid = make_grid(cfg.n, N, L);
    }
    if (cfg.t_end <= 0.0 && params.t_end < 1.05 * R_max) params.t_end = 1.05 * R_max;
    if (cfg.snapshot_dt <= 0.0) params.snapshot_dt = R_max / 64.0;
    if (params.max_snapshots < 3 * 64) params.max_snapshots = 3 * 64;
    return params;
}

int cmd_testfn_verify(RunContext& ctx) {
    const Config& cfg = ctx.cfg();
    const double R_max = *std::max_element(cfg.R_list.begin(), cfg.R_list.end());

    ctx.begin_stage("lemma");
    std::ostringstream lemma_csv;
    lemma_csv << "R,C_emp,x_max,t_max,richardson,layer_cells\n";
    json lemma_rep = json::array();
    for (double R : cfg.R_list) {
        const CutoffSpec spec = make_cutoff(R, cfg.m, cfg.p, cfg.l);
        const LemmaReport rep = lemma_ratio(spec, cfg.n, cfg.resolution, cfg.time_cells);
        lemma_csv << format_double(R) << "," << format_double(rep.C_emp) << ","
                  << format_double(rep.x_at_max[0]) << "," << format_double(rep.t_at_max)
                  << "," << format_double(rep.richardson_disagreement) << ","
                  << rep.layer_cells << "\n";
        lemma_rep.push_back({{"R", R},
                             {"C_emp", rep.C_emp},
                             {"l", spec.l},
                             {"richardson", rep.richardson_disagreement}});
    }
    if (cfg.emit_csv) ctx.write_csv("tables/lemma.csv", lemma_csv.str());
    ctx.end_stage();

    ctx.begin_stage("trajectory");
    const SimParams params = testfn_sim_params(cfg, R_max);
    const Trajectory traj = evolve(params);
    ctx.end_stage();

    // Cutoffs only make sense where the run is resolved.
    std::vector<double> usable;
    for (double R : cfg.R_list)
        if (traj.snapshots.back().t >= R) usable.push_back(R);

    ctx.begin_stage("weak_identity");
    std::ostringstream weak_csv;
    weak_csv << "R,time_levels,residual\n";
    json weak_rep = json::array();
    for (double R : usable) {
        const CutoffSpec spec = make_cutoff(R, cfg.m, cfg.p, cfg.l);
        int levels = 0;
        for (const auto& s : traj.snapshots)
            if (s.t <= R * (1.0 + 1e-12)) ++levels;
        const double res = weak_identity_residual(traj, spec, R);
        weak_csv << format_double(R) << "," << levels << "," << format_double(res) << "\n";
        weak_rep.push_back({{"R", R}, {"time_levels", levels}, {"residual", res}});
    }
    if (cfg.emit_csv) ctx.write_csv("tables/weak_identity.csv", weak_csv.str());
    ctx.end_stage();

    ctx.begin_stage("xyw");
    bool verdicts_ok = !usable.empty();
    std::ostringstream xyw_csv;
    xyw_csv << "r,X,Y,W,verdict_log,verdict_holder\n";
    json xyw_rep = json::array();
    if (!usable.empty()) {
        const double R_use = usable.back();
        const CutoffSpec base = make_cutoff(R_use, cfg.m, cfg.p, cfg.l);
        const auto records = xyw_check(traj, base, make_r_grid(R_use, cfg.r_points));
        for (const auto& rec : records) {
            xyw_csv << format_double(rec.R) << "," << format_double(rec.X) << ","
                    << format_double(rec.Y) << "," << format_double(rec.W) << ","
                    << (rec.verdict_log ? 1 : 0) << "," << (rec.verdict_holder ? 1 : 0)
                    << "\n";
            verdicts_ok = verdicts_ok && rec.verdict_log && rec.verdict_holder;
            xyw_rep.push_back({{"r", rec.R},
                               {"X", rec.X},
                               {"Y", rec.Y},
                               {"W", rec.W},
                               {"verdict_log", rec.verdict_log},
                               {"verdict_holder", rec.verdict_holder}});
        }
    }
    if (cfg.emit_csv) ctx.write_csv("tables/xyw.csv", xyw_csv.str());

    if (cfg.emit_json)
        ctx.write_json("reports/testfn.json",
                       {{"lemma", lemma_rep},
                        {"weak_identity", weak_rep},
                        {"xyw", xyw_rep},
                        {"trajectory_outcome", outcome_name(traj.outcome)},
                        {"trajectory_t_final", traj.t_final},
                        {"usable_R", usable},
                        {"verdicts_ok", verdicts_ok}});
    ctx.end_stage();
    return verdicts_ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int run_command(const std::string& verb, const Config& cfg) {
    // Verb-specific config requirements are config errors; nothing is
    // written before they pass.
    if (verb == "sweep" && cfg.eps_list.empty())
        throw ConfigError("config error: sweep requires problem.eps_list");
    if ((verb == "kernel" || verb == "decay-check") && (cfg.grid_N == 0 || cfg.grid_L <= 0.0))
        throw ConfigError("config error: " + verb + " requires explicit grid.N and grid.L");
    if (verb != "simulate" && verb != "sweep" && verb != "kernel" &&
        verb != "decay-check" && verb != "testfn-verify")
        throw ConfigError("config error: unknown verb '" + verb + "'");

    RunContext ctx(cfg, verb);
    int code = kExitOk;
    if (verb == "simulate") code = cmd_simulate(ctx);
    else if (verb == "sweep") code = cmd_sweep(ctx);
    else if (verb == "kernel") code = cmd_kernel(ctx);
    else if (verb == "decay-check") code = cmd_decay_check(ctx);
    else if (verb == "testfn-verify") code = cmd_testfn_verify(ctx);
    ctx.finish();
    return code;
}

}  // namespace fujitalab
