#include "fujitalab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace fujitalab {

LinFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("linear_fit: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("linear_fit: need at least 2 points");

    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");

    LinFit f;
    f.npoints = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;

    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.rms = std::sqrt(ss_res / n);
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    f.stderr_slope = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    return f;
}

}  // namespace fujitalab
