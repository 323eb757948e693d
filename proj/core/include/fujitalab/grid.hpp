#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fujitalab {

/// Periodic box [-L/2, L/2)^n sampled on N points per axis.
/// Physical coordinates are x_j = -L/2 + j*L/N, j = 0..N-1, per axis,
/// so the box is centered at the origin and x = 0 is a lattice point.
struct GridSpec {
    int n = 1;           // spatial dimension (1, 2, or 3)
    int N = 16;          // points per axis, power of two
    double L = 1.0;      // box side length
    double cell_volume = 0.0;  // (L/N)^n

    std::int64_t size() const {
        std::int64_t s = 1;
        for (int a = 0; a < n; ++a) s *= N;
        return s;
    }
    double dx() const { return L / N; }
    double coord(int j) const { return -0.5 * L + j * (L / N); }

    /// Integer frequency of axis index j, in [-N/2, N/2).
    int freq_index(int j) const { return j < N / 2 ? j : j - N; }
    /// Angular frequency xi_k = 2*pi*k/L of axis index j.
    double xi(int j) const {
        return 2.0 * std::numbers::pi * freq_index(j) / L;
    }

    /// Decompose a flat row-major index into per-axis indices.
    std::array<int, 3> unflatten(std::int64_t idx) const {
        std::array<int, 3> j{0, 0, 0};
        for (int a = n - 1; a >= 0; --a) {
            j[a] = static_cast<int>(idx % N);
            idx /= N;
        }
        return j;
    }
    std::int64_t flatten(const std::array<int, 3>& j) const {
        std::int64_t idx = 0;
        for (int a = 0; a < n; ++a) idx = idx * N + j[a];
        return idx;
    }

    bool operator==(const GridSpec& other) const {
        return n == other.n && N == other.N && L == other.L;
    }
};

/// Validates and builds a GridSpec. Throws std::invalid_argument for
/// unsupported n, non-power-of-two or too small N, or nonpositive L.
GridSpec make_grid(int n, int N, double L);

/// Real scalar field sampled on a grid, row-major.
struct RealField {
    GridSpec grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}
    RealField(const GridSpec& g, std::vector<double> v);

    double& operator[](std::int64_t i) { return values[i]; }
    double operator[](std::int64_t i) const { return values[i]; }

    /// True if every sample is finite.
    bool finite() const;
};

/// Complex Fourier coefficients, one per discrete frequency
/// xi_k = 2*pi*k/L, k in {-N/2 .. N/2-1}^n, stored row-major in the same
/// axis-index order as RealField (axis index j maps to k = freq_index(j)).
/// The normalization puts coeff(0) equal to the spatial mean, i.e. the
/// field is u(x) = sum_k coeff(k) exp(i xi_k . x).
struct SpectralCoeffs {
    GridSpec grid;
    std::vector<std::complex<double>> coeffs;

    SpectralCoeffs() = default;
    explicit SpectralCoeffs(const GridSpec& g) : grid(g), coeffs(g.size()) {}
};

/// Nonnegative real multiplier tabulated per frequency (same layout as
/// SpectralCoeffs). Houses symbols such as |xi|^(2m).
struct FourierSymbol {
    GridSpec grid;
    std::vector<double> values;

    FourierSymbol() = default;
    explicit FourierSymbol(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}
};

/// Maximum |xi| component representable on the grid (Nyquist).
inline double nyquist_xi(const GridSpec& g) {
    return std::numbers::pi * g.N / g.L;
}

}  // namespace fujitalab
