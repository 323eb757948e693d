#include "fujitalab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fujitalab {

namespace {
bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }
}  // namespace

GridSpec make_grid(int n, int N, double L) {
    if (n < 1 || n > 3)
        throw std::invalid_argument("make_grid: dimension n must be 1, 2, or 3 (got " +
                                    std::to_string(n) + ")");
    if (N < 16 || !is_power_of_two(N))
        throw std::invalid_argument("make_grid: N must be a power of two >= 16 (got " +
                                    std::to_string(N) + ")");
    if (!(L > 0.0))
        throw std::invalid_argument("make_grid: box length L must be positive");
    GridSpec g;
    g.n = n;
    g.N = N;
    g.L = L;
    double cv = 1.0;
    for (int a = 0; a < n; ++a) cv *= L / N;
    g.cell_volume = cv;
    return g;
}

RealField::RealField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<std::int64_t>(values.size()) != g.size())
        throw std::invalid_argument("RealField: value count does not match grid size");
}

bool RealField::finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace fujitalab
