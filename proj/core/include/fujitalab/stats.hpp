#pragma once

#include <span>

namespace fujitalab {

/// Ordinary least squares y = intercept + slope * x.
struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;            // coefficient of determination
    double stderr_slope = 0.0;  // standard error of the slope
    double rms = 0.0;           // RMS residual
    int npoints = 0;
};

LinFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace fujitalab
