#include "fujitalab/norms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fujitalab {

double lp_norm(const RealField& u, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: exponent p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : u.values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 1.0) {
        for (double v : u.values) acc += std::abs(v);
    } else if (p == 2.0) {
        for (double v : u.values) acc += v * v;
    } else {
        for (double v : u.values) acc += std::pow(std::abs(v), p);
    }
    return std::pow(acc * u.grid.cell_volume, 1.0 / p);
}

double mass(const RealField& u) {
    double acc = 0.0;
    for (double v : u.values) acc += v;
    return acc * u.grid.cell_volume;
}

}  // namespace fujitalab
