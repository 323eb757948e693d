#pragma once

#include <array>
#include <functional>

#include "fujitalab/grid.hpp"

namespace fujitalab {

/// Discrete Fourier analysis of a real field. Normalization: coeff(0) is
/// the spatial mean, and inverse(forward(u)) == u to rounding.
SpectralCoeffs forward(const RealField& u);

/// Synthesis back to the lattice. Input must carry Hermitian symmetry
/// (coeff(-k) = conj(coeff(k))); the residual imaginary part is discarded.
RealField inverse(const SpectralCoeffs& c);

/// Scales coeff(k) by symbol value at k. Throws on grid mismatch.
void apply_multiplier_inplace(SpectralCoeffs& c, const FourierSymbol& s);
SpectralCoeffs apply_multiplier(const SpectralCoeffs& c, const FourierSymbol& s);

/// Tabulates a per-frequency real map into a FourierSymbol, validating
/// finiteness at every grid frequency. The map receives the frequency
/// vector xi (components beyond grid.n are zero).
FourierSymbol tabulate_symbol(const GridSpec& g,
                              const std::function<double(const std::array<double, 3>&)>& map);

/// Max |coeff(-k) - conj(coeff(k))| over all modes; 0 for exactly
/// Hermitian data. Used by tests and input validation.
double hermitian_defect(const SpectralCoeffs& c);

}  // namespace fujitalab
