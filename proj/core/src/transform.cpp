#include "fujitalab/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace fujitalab {

namespace {

// FFTW plan pair for one (n, N) shape. Plans are created once under a
// lock (the planner is not thread-safe) and executed with the new-array
// interface; all buffers come from fftw_malloc so alignment matches the
// planning buffers.
struct PlanSet {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* proto_in = nullptr;
    fftw_complex* proto_out = nullptr;

    ~PlanSet() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (proto_in) fftw_free(proto_in);
        if (proto_out) fftw_free(proto_out);
    }
};

std::mutex g_planner_mutex;
std::map<std::pair<int, int>, std::unique_ptr<PlanSet>> g_plans;

const PlanSet& plans_for(const GridSpec& g) {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    auto key = std::make_pair(g.n, g.N);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return *it->second;

    auto ps = std::make_unique<PlanSet>();
    const std::int64_t total = g.size();
    ps->proto_in = fftw_alloc_complex(total);
    ps->proto_out = fftw_alloc_complex(total);
    int dims[3] = {g.N, g.N, g.N};
    ps->fwd = fftw_plan_dft(g.n, dims, ps->proto_in, ps->proto_out,
                            FFTW_FORWARD, FFTW_ESTIMATE);
    ps->bwd = fftw_plan_dft(g.n, dims, ps->proto_in, ps->proto_out,
                            FFTW_BACKWARD, FFTW_ESTIMATE);
    auto [pos, ok] = g_plans.emplace(key, std::move(ps));
    return *pos->second;
}

// Thread-local complex scratch, reused across calls of matching size.
struct Scratch {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    std::int64_t capacity = 0;

    ~Scratch() {
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
    void ensure(std::int64_t n) {
        if (capacity >= n) return;
        if (in) fftw_free(in);
        if (out) fftw_free(out);
        in = fftw_alloc_complex(n);
        out = fftw_alloc_complex(n);
        capacity = n;
    }
};

Scratch& scratch() {
    thread_local Scratch s;
    return s;
}

// Parity (-1)^(k_1+...+k_n) of the integer frequency vector at flat
// index idx. With the box centered at the origin this converts between
// the index-space DFT and coefficients of exp(i xi . x).
inline double center_phase(const GridSpec& g, std::int64_t idx) {
    int parity = 0;
    for (int a = 0; a < g.n; ++a) {
        parity ^= static_cast<int>(idx % g.N) & 1;  // (-1)^k == (-1)^j for j=k mod N, N even
        idx /= g.N;
    }
    return parity ? -1.0 : 1.0;
}

}  // namespace

SpectralCoeffs forward(const RealField& u) {
    const GridSpec& g = u.grid;
    if (static_cast<std::int64_t>(u.values.size()) != g.size())
        throw std::invalid_argument("forward: field size does not match grid");
    const std::int64_t total = g.size();
    const PlanSet& ps = plans_for(g);
    Scratch& s = scratch();
    s.ensure(total);
    for (std::int64_t i = 0; i < total; ++i) {
        s.in[i][0] = u.values[i];
        s.in[i][1] = 0.0;
    }
    fftw_execute_dft(ps.fwd, s.in, s.out);
    SpectralCoeffs c(g);
    const double scale = 1.0 / static_cast<double>(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double ph = center_phase(g, i) * scale;
        c.coeffs[i] = {s.out[i][0] * ph, s.out[i][1] * ph};
    }
    return c;
}

RealField inverse(const SpectralCoeffs& c) {
    const GridSpec& g = c.grid;
    if (static_cast<std::int64_t>(c.coeffs.size()) != g.size())
        throw std::invalid_argument("inverse: coefficient count does not match grid");
    const std::int64_t total = g.size();
    const PlanSet& ps = plans_for(g);
    Scratch& s = scratch();
    s.ensure(total);
    for (std::int64_t i = 0; i < total; ++i) {
        const double ph = center_phase(g, i);
        s.in[i][0] = c.coeffs[i].real() * ph;
        s.in[i][1] = c.coeffs[i].imag() * ph;
    }
    fftw_execute_dft(ps.bwd, s.in, s.out);
    RealField u(g);
    for (std::int64_t i = 0; i < total; ++i) u.values[i] = s.out[i][0];
    return u;
}

void apply_multiplier_inplace(SpectralCoeffs& c, const FourierSymbol& s) {
    if (!(c.grid == s.grid))
        throw std::invalid_argument("apply_multiplier: symbol grid does not match coefficients");
    const std::int64_t total = c.grid.size();
    for (std::int64_t i = 0; i < total; ++i) c.coeffs[i] *= s.values[i];
}

SpectralCoeffs apply_multiplier(const SpectralCoeffs& c, const FourierSymbol& s) {
    SpectralCoeffs out = c;
    apply_multiplier_inplace(out, s);
    return out;
}

FourierSymbol tabulate_symbol(const GridSpec& g,
                              const std::function<double(const std::array<double, 3>&)>& map) {
    FourierSymbol sym(g);
    const std::int64_t total = g.size();
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = g.unflatten(i);
        std::array<double, 3> xi{0.0, 0.0, 0.0};
        for (int a = 0; a < g.n; ++a) xi[a] = g.xi(j[a]);
        const double v = map(xi);
        if (!std::isfinite(v))
            throw std::invalid_argument("tabulate_symbol: non-finite map value at a grid frequency");
        sym.values[i] = v;
    }
    return sym;
}

double hermitian_defect(const SpectralCoeffs& c) {
    const GridSpec& g = c.grid;
    double defect = 0.0;
    const std::int64_t total = g.size();
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = g.unflatten(i);
        std::array<int, 3> jm{0, 0, 0};
        for (int a = 0; a < g.n; ++a) jm[a] = (g.N - j[a]) % g.N;  // index of -k
        const std::int64_t im = g.flatten(jm);
        defect = std::max(defect, std::abs(c.coeffs[i] - std::conj(c.coeffs[im])));
    }
    return defect;
}

}  // namespace fujitalab
