#pragma once

#include <string>
#include <vector>

#include "fujitalab/integrator.hpp"
#include "fujitalab/lifespan.hpp"

namespace fujitalab {

/// Fully validated run configuration. Parsed from a sectioned
/// key = value text file; unknown keys are errors, missing keys take the
/// documented defaults. See README for the grammar.
struct Config {
    // [problem]
    int n = 1;
    int m = 1;
    double p = 2.0;
    double epsilon = 0.1;
    std::vector<double> eps_list;  // empty unless sweeping
    std::string u0 = "gaussian";   // gaussian | constant
    double u0_width = 1.0;
    double u0_mass = 1.0;
    double u0_value = 1.0;

    // [grid]
    int grid_N = 0;    // 0 = auto
    double grid_L = 0.0;  // 0 = auto

    // [integrator]
    std::string scheme = "etdrk4";
    double dt0 = 0.0;  // 0 = auto
    double dt_min = 1e-12;
    double U_max = 1e8;
    double growth_cap = 1.25;
    double t_end = 0.0;  // 0 = auto
    bool nonlinear = true;
    bool dealias = false;
    double snapshot_dt = 0.0;  // 0 = auto
    int max_snapshots = 400;

    // [harness]
    double c_dom = 12.0;
    double convergence_tol = 0.01;
    int max_doublings = 4;
    double t_end_factor = 10.0;
    double points_per_width = 6.0;
    int N_cap = 32768;
    double supercritical_t_end = 50.0;
    double eps_cap_critical = 0.4;

    // [testfn]
    std::vector<double> R_list{16.0, 32.0, 64.0};
    int l = 0;  // 0 = ceil(2 m p')
    double R0 = 4.0;
    int resolution = 0;  // lemma scan cells per axis, 0 = auto
    int r_points = 16;
    int time_cells = 256;

    // [kernel]
    std::vector<double> kernel_t_list{1.0};

    // [decay]
    double decay_p = 1.0;
    double decay_q = std::numeric_limits<double>::infinity();
    double decay_t_lo = 0.5;
    double decay_t_hi = 8.0;
    int decay_points = 9;

    // [output]
    std::string out_dir = "out";
    bool emit_csv = true;
    bool emit_json = true;
    bool emit_fields = true;

    /// Canonical text form (stable key order, 17-digit floats); identical
    /// configs serialize byte-identically.
    std::string canonical_text() const;

    InitialProfile profile() const;
    DomainPolicy domain_policy() const;
    /// SimParams for a direct simulate run (resolves auto grid/t_end).
    SimParams sim_params() const;
};

/// Thrown on parse/validation failure; message names the key and line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses and validates the sectioned key=value format.
Config parse_config(const std::string& text);
Config parse_config_file(const std::string& path);

/// Applies one "section.key=value" override (the --set flag).
void apply_override(Config& cfg, const std::string& assignment);

/// Re-runs semantic validation (called by parse_config; public for
/// programmatic construction).
void validate_config(const Config& cfg);

}  // namespace fujitalab
