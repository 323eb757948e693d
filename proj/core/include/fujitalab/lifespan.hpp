#pragma once

#include <optional>
#include <vector>

#include "fujitalab/integrator.hpp"

namespace fujitalab {

enum class Regime { Subcritical, Critical, Supercritical };

/// Position of (n, m, p) relative to the Fujita exponent 1 + 2m/n.
struct RegimeInfo {
    int n = 1;
    int m = 1;
    double p = 2.0;
    double p_fuj = 3.0;
    Regime regime = Regime::Subcritical;
    /// Lifespan scaling exponent -(1/(p-1) - n/(2m))^{-1}, subcritical only.
    std::optional<double> theoretical_exponent;
    /// Rate p-1 in exp(eps^{-(p-1)}), critical only.
    std::optional<double> critical_rate;
};

RegimeInfo classify_regime(int n, int m, double p);

/// Box-doubling policy used to emulate the whole space.
struct DomainPolicy {
    double c_dom = 12.0;          // initial box: c_dom * T_pred^{1/(2m)} diffusion lengths
    double convergence_tol = 0.01;  // successive T agreement
    int max_doublings = 4;
    double t_end_factor = 10.0;   // horizon as a multiple of T_pred
    double points_per_width = 6.0;  // lattice points per data width
    int N_cap = 32768;            // per-axis resolution ceiling
    double supercritical_t_end = 50.0;  // horizon when no blow-up is predicted
};

struct DomainRecord {
    double L;
    int N;
    double T;  // lifespan estimate on that box (inf if no blow-up)
};

struct LifespanResult {
    SimParams params;  // parameters of the final (largest-box) run
    double T_eps = 0.0;
    std::vector<DomainRecord> domain_record;
    bool converged = false;
    BlowupEstimate blowup;
    std::string note;
};

/// Measures T_eps for one problem instance: seeds the box from the
/// regime's theoretical law with unit constant, evolves to blow-up, and
/// doubles L (and N) until successive estimates agree within tolerance.
LifespanResult run_lifespan(const SimParams& base, const DomainPolicy& policy);

struct SweepRow {
    double eps;
    double T_eps;
    bool converged;
    double L_final;
    int N_final;
    double fit_r2;
};

/// One run_lifespan per epsilon (strictly decreasing list, identical u0);
/// rows in input order. Rows may execute concurrently up to max_workers.
std::vector<SweepRow> sweep_epsilon(const SimParams& base,
                                    const std::vector<double>& eps_list,
                                    const DomainPolicy& policy,
                                    int max_workers = 0);

/// Scaling-law fit of a sweep against the regime's predicted form.
struct ScalingFit {
    Regime regime = Regime::Subcritical;
    double theoretical_exponent = 0.0;  // subcritical only
    double fitted_slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r2 = 0.0;
    double rms_residual = 0.0;
    /// Competing log-log power-law fit RMS (critical regime only): the
    /// exponential law should beat it.
    double powerlaw_rms_residual = 0.0;
    int rows_used = 0;
};
ScalingFit fit_scaling(const std::vector<SweepRow>& table, const RegimeInfo& regime);

/// Running supremum M(t) = sup_{tau<=t} {(1+tau)^{n/2m} |u|_inf + |u|_1}
/// with the smallest constants (C0, C1), C0 >= M(0+)/eps, satisfying the
/// a-priori inequality M(t) <= C0 eps + C1 M(t)^p Int_0^t (1+tau)^{-n(p-1)/2m} dtau
/// at every recorded time.
struct MTrace {
    std::vector<double> times;
    std::vector<double> M_values;
    double C0 = 0.0;
    double C1 = 0.0;
    double T1_observed = 0.0;  // first time M >= 2 C0 eps; inf if never
    bool degenerate = false;   // M identically zero
};
MTrace m_functional_check(const Trajectory& traj, const RegimeInfo& regime);

/// Closed form of Int_0^t (1+tau)^{-a} dtau.
double weight_integral(double t, double a);

/// Worker cap from FUJITA_LAB_THREADS (hardware concurrency if unset).
int worker_count();

}  // namespace fujitalab
