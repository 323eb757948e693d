#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fujitalab/grid.hpp"
#include "fujitalab/semigroup.hpp"

namespace fujitalab {

enum class Scheme { Etd1, Etdrk4 };

/// Named initial profile u0. Gaussian is normalized to the requested mass
/// (default 1) with standard deviation `width`; Constant is u0 = value.
struct InitialProfile {
    enum class Kind { Gaussian, Constant } kind = Kind::Gaussian;
    double width = 1.0;
    double mass = 1.0;
    double value = 1.0;

    static InitialProfile gaussian(double width = 1.0, double mass = 1.0) {
        return {Kind::Gaussian, width, mass, 0.0};
    }
    static InitialProfile constant(double value) {
        return {Kind::Constant, 1.0, 0.0, value};
    }
};

RealField sample_profile(const InitialProfile& profile, const GridSpec& grid);

/// One problem instance: u_t + (-Lap)^m u = |u|^p, u(0) = epsilon * u0.
struct SimParams {
    int m = 1;
    double p = 2.0;         // nonlinearity exponent, > 1
    GridSpec grid;
    double epsilon = 0.1;   // data amplitude
    InitialProfile u0;

    double t_end = 10.0;
    double dt0 = 1e-3;      // initial step
    double dt_min = 1e-12;  // step collapse threshold
    double U_max = 1e8;     // blow-up threshold on |u|_inf
    double growth_cap = 1.25;  // max per-step ratio of |u|_inf, in (1, 2]

    Scheme scheme = Scheme::Etdrk4;
    bool nonlinear = true;  // verification hook: false freezes N(u) = 0
    bool dealias = false;   // 2/3-rule zero padding, integer p only
    bool adaptive = true;   // false: fixed step dt0 (convergence studies)

    double snapshot_dt = 0.0;  // uniform snapshot interval; 0 -> t_end/128
    int max_snapshots = 400;

    void validate() const;  // throws std::invalid_argument on bad fields
};

/// phi_1, phi_2, phi_3 at a real argument z <= 0, evaluated to better
/// than 1e-12 relative error (direct formula for |z| > 1/2, degree-12
/// Taylor polynomial otherwise).
struct PhiValues {
    double phi1;
    double phi2;
    double phi3;
};
PhiValues phi_functions(double z);

/// One exponential-time-differencing step of size h. ETD1:
/// u+ = E u + h phi1(-h sigma) N(u); ETDRK4: the fourth-order exponential
/// Runge-Kutta stage combination. With the nonlinearity off both reduce
/// exactly to propagate(u, h). Non-finite outputs are returned as-is so
/// the caller can treat them as a blow-up candidate.
RealField etd_step(const RealField& u, double h, const PropagatorSpec& prop,
                   double p, Scheme scheme, bool nonlinear = true,
                   bool dealias = false);

enum class Outcome { Resolved, BlowupDetected, StepCollapse };

struct NormSample {
    double t;
    double dt;    // step that produced this state (0 for the initial one)
    double l1;
    double linf;
    double lp;
};

struct Snapshot {
    double t;
    RealField field;
    bool geometric = false;  // taken because |u|_inf doubled
};

struct Trajectory {
    SimParams params;
    std::vector<NormSample> norm_history;
    std::vector<Snapshot> snapshots;
    Outcome outcome = Outcome::Resolved;
    double t_final = 0.0;
    std::string note;  // e.g. nonpositive-mass warning
};

/// Advances the semilinear problem with adaptive exponential time
/// differencing until t_end, blow-up detection (|u|_inf >= U_max or
/// non-finite values at the minimal step), or step collapse.
Trajectory evolve(const SimParams& params);

/// Type-I extrapolation of the blow-up time: least-squares fit of
/// y(t) = |u|_inf^{-(p-1)} over the last decade of sup-norm growth;
/// T_est is the root of the fitted line.
struct BlowupEstimate {
    double T_est = 0.0;
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
    double fit_r2 = 0.0;
    double rate_constant = 0.0;  // kappa in |u|_inf ~ kappa (T-t)^{-1/(p-1)}
    bool low_confidence = false;
    std::string flag;  // reason when low_confidence
};
BlowupEstimate estimate_blowup_time(const Trajectory& traj, double p);

/// Relative defect of the mild (Duhamel) form at the last stored snapshot
/// time <= t_check, with trapezoidal quadrature over stored snapshots and
/// the linear part evaluated exactly. Honors the trajectory's
/// nonlinearity hook. Throws if fewer than 16 snapshots cover [0, t].
double duhamel_residual(const Trajectory& traj, double t_check);

}  // namespace fujitalab
