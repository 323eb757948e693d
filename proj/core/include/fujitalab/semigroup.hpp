#pragma once

#include <vector>

#include "fujitalab/grid.hpp"
#include "fujitalab/transform.hpp"

namespace fujitalab {

/// Spectral realization of the polyharmonic operator: symbol |xi|^(2m).
struct PropagatorSpec {
    int m = 1;
    GridSpec grid;
    FourierSymbol symbol;  // |xi_k|^(2m), zero at k = 0

    double symbol_max() const;
};

/// Builds the propagator for integer order m >= 1.
PropagatorSpec make_propagator(int m, const GridSpec& grid);

/// Applies exp(-t |xi|^(2m)) in Fourier space. Preserves the mean exactly
/// (the zero mode is undamped). Throws for t < 0.
RealField propagate(const RealField& u, double t, const PropagatorSpec& prop);
SpectralCoeffs propagate(const SpectralCoeffs& c, double t, const PropagatorSpec& prop);

/// True when the spectral tail is negligible at time t, i.e.
/// exp(-t * max symbol) < 1e-12, so the periodic kernel matches the
/// whole-space kernel to quadrature accuracy.
bool kernel_resolved(double t, const PropagatorSpec& prop);

struct KernelField {
    RealField field;
    bool under_resolved = false;
};

/// Discretized fundamental solution at time t > 0: the propagator applied
/// to the discrete delta of mass 1 (value 1/cell_volume at the origin
/// node). Its mass is 1 by construction. Tags the result under_resolved
/// when kernel_resolved(t) fails.
KernelField kernel_field(double t, const PropagatorSpec& prop);

/// Report of an empirical L^p -> L^q smoothing-rate fit.
struct DecayFitReport {
    int m = 1;
    int n = 1;
    double p = 1.0;
    double q = 1.0;  // may be infinity
    std::vector<double> t_samples;
    std::vector<double> ratios;      // max over probes of |P_t u|_q / |u|_p
    double fitted_slope = 0.0;       // slope of log ratio vs log t
    double theoretical_slope = 0.0;  // -(n/2m)(1/p - 1/q)
    double residual = 0.0;           // fit RMS
};

/// Probe set for decay fits: discrete delta plus Gaussians of widths
/// L/64, L/32, L/16.
std::vector<RealField> default_decay_probes(const GridSpec& grid);

/// Measures the operator-norm decay rate between L^p and L^q over t_list
/// (which must span at least a factor of 8) and fits log r vs log t.
DecayFitReport decay_exponent_fit(const PropagatorSpec& prop, double p, double q,
                                  const std::vector<double>& t_list,
                                  const std::vector<RealField>& probes);

}  // namespace fujitalab
