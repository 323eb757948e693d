#pragma once

#include <array>
#include <span>
#include <vector>

#include "fujitalab/integrator.hpp"

namespace fujitalab {

/// Smooth bump: 1 on [0, 1/2], 0 on [1, inf), strictly decreasing in
/// between via the exp(-1/theta) partition-of-unity bridge. All
/// derivatives vanish at both junctions.
double bump_profile(double s);
/// d/ds of bump_profile (analytic).
double bump_profile_derivative(double s);

/// Space-time cutoff pair psi_R = phi((|x|^{2m}+t)/R)^l and its starred
/// variant built from phi*(s) = 0 on [0,1/2), phi(s) on [1/2,inf).
struct CutoffSpec {
    double R = 16.0;
    int m = 1;
    double p = 2.0;
    double p_prime = 2.0;  // p/(p-1)
    int l = 4;             // >= ceil(2 m p')
};

/// Builds a CutoffSpec; l = 0 picks the smallest admissible ceil(2mp').
CutoffSpec make_cutoff(double R, int m, double p, int l = 0);

double cutoff_eval(std::span<const double> x, double t, const CutoffSpec& spec,
                   bool starred);
/// Analytic time derivative of psi_R at (x, t).
double cutoff_time_derivative(std::span<const double> x, double t,
                              const CutoffSpec& spec);

/// Empirical constant of the derivative bound: the supremum over the
/// transition layer of R (|dt psi_R| + |Lap^m psi_R|) / (psi_R*)^{1/p},
/// with Lap^m by 8th-order central differences, two-level Richardson
/// verified.
struct LemmaReport {
    double C_emp = 0.0;
    std::array<double, 3> x_at_max{0.0, 0.0, 0.0};
    double t_at_max = 0.0;
    double richardson_disagreement = 0.0;  // relative, must be < 1%
    int cells_per_axis = 0;
    int layer_cells = 0;  // resolution across the transition layer
};

/// Scans the ratio on an n-dimensional grid covering the cutoff support.
/// cells_per_axis = 0 picks a resolution with >= 96 cells across the
/// layer. Throws if the layer has < 64 cells or Richardson disagrees by
/// more than 1%.
LemmaReport lemma_ratio(const CutoffSpec& spec, int n, int cells_per_axis = 0,
                        int time_cells = 256);

/// Relative defect of the space-time weak identity
///   eps Int u0 psi_R(.,0) + IntInt |u|^p psi_R
///     = IntInt u (-Lap)^m psi_R - IntInt u dt psi_R
/// over [0, T] with trapezoidal time quadrature on stored snapshots.
/// Requires T >= R (so psi_R vanishes at T) and >= 32 snapshots in [0, T].
double weak_identity_residual(const Trajectory& traj, const CutoffSpec& spec,
                              double T);

/// Cutoff-weighted space-time masses and their logarithmic average.
struct XYWRecord {
    double R = 0.0;
    double X = 0.0;  // IntInt |u|^p psi_r
    double Y = 0.0;  // IntInt |u|^p psi_r*
    double W = 0.0;  // Int_0^R Y(r) dr/r over the evaluated grid
    bool verdict_log = false;     // (2/log 2) W(R) <= X(R) with 2% slack
    bool verdict_holder = false;  // lattice Hoelder step
};

/// Geometric r-grid with ratio 2^{1/4} ending at R_max.
std::vector<double> make_r_grid(double R_max, int points = 16);

/// Evaluates X, Y, W on the r-grid and checks the log-lemma and Hoelder
/// verdicts at every r. The trajectory must be resolved on the space-time
/// support of the largest cutoff.
std::vector<XYWRecord> xyw_check(const Trajectory& traj, const CutoffSpec& base,
                                 const std::vector<double>& r_grid);

/// (-Lap)^m psi_R sampled on the grid at time t, by 8th-order central
/// finite differences at stencil spacing grid.dx()/refine (psi evaluated
/// analytically off-lattice, so refine > 1 is exact refinement).
RealField cutoff_polyharmonic(const GridSpec& grid, double t,
                              const CutoffSpec& spec, int refine = 2);

}  // namespace fujitalab
