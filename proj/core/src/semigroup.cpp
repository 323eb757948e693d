#include "fujitalab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fujitalab/norms.hpp"
#include "fujitalab/stats.hpp"

namespace fujitalab {

namespace {
double pow_int(double base, int e) {
    double r = 1.0;
    while (e > 0) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}
}  // namespace

double PropagatorSpec::symbol_max() const {
    double mx = 0.0;
    for (double v : symbol.values) mx = std::max(mx, v);
    return mx;
}

PropagatorSpec make_propagator(int m, const GridSpec& grid) {
    if (m < 1) throw std::invalid_argument("make_propagator: order m must be >= 1");
    PropagatorSpec prop;
    prop.m = m;
    prop.grid = grid;
    prop.symbol = tabulate_symbol(grid, [&](const std::array<double, 3>& xi) {
        double xi2 = 0.0;
        for (int a = 0; a < grid.n; ++a) xi2 += xi[a] * xi[a];
        return pow_int(xi2, m);  // |xi|^(2m)
    });
    return prop;
}

SpectralCoeffs propagate(const SpectralCoeffs& c, double t, const PropagatorSpec& prop) {
    if (t < 0.0) throw std::invalid_argument("propagate: time must be nonnegative");
    if (!(c.grid == prop.grid))
        throw std::invalid_argument("propagate: field grid does not match propagator");
    SpectralCoeffs out = c;
    const std::int64_t total = c.grid.size();
    for (std::int64_t i = 0; i < total; ++i)
        out.coeffs[i] *= std::exp(-t * prop.symbol.values[i]);
    return out;
}

RealField propagate(const RealField& u, double t, const PropagatorSpec& prop) {
    if (t == 0.0) {
        if (t < 0.0) throw std::invalid_argument("propagate: time must be nonnegative");
        return u;
    }
    return inverse(propagate(forward(u), t, prop));
}

bool kernel_resolved(double t, const PropagatorSpec& prop) {
    return std::exp(-t * prop.symbol_max()) < 1e-12;
}

KernelField kernel_field(double t, const PropagatorSpec& prop) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_field: time must be positive");
    const GridSpec& g = prop.grid;
    RealField delta(g);
    std::array<int, 3> origin{0, 0, 0};
    for (int a = 0; a < g.n; ++a) origin[a] = g.N / 2;  // x = 0 node
    delta.values[g.flatten(origin)] = 1.0 / g.cell_volume;  // discrete delta, mass 1
    KernelField k;
    k.field = propagate(delta, t, prop);
    k.under_resolved = !kernel_resolved(t, prop);
    return k;
}

std::vector<RealField> default_decay_probes(const GridSpec& grid) {
    std::vector<RealField> probes;
    RealField delta(grid);
    std::array<int, 3> origin{0, 0, 0};
    for (int a = 0; a < grid.n; ++a) origin[a] = grid.N / 2;
    delta.values[grid.flatten(origin)] = 1.0 / grid.cell_volume;
    probes.push_back(std::move(delta));

    for (double frac : {1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0}) {
        const double w = grid.L * frac;
        RealField gsn(grid);
        const std::int64_t total = grid.size();
        for (std::int64_t i = 0; i < total; ++i) {
            auto j = grid.unflatten(i);
            double r2 = 0.0;
            for (int a = 0; a < grid.n; ++a) {
                const double x = grid.coord(j[a]);
                r2 += x * x;
            }
            gsn.values[i] = std::exp(-0.5 * r2 / (w * w));
        }
        probes.push_back(std::move(gsn));
    }
    return probes;
}

DecayFitReport decay_exponent_fit(const PropagatorSpec& prop, double p, double q,
                                  const std::vector<double>& t_list,
                                  const std::vector<RealField>& probes) {
    if (!(p >= 1.0) || !(q >= p))
        throw std::invalid_argument("decay_exponent_fit: need 1 <= p <= q");
    if (t_list.size() < 2)
        throw std::invalid_argument("decay_exponent_fit: need at least two times");
    for (std::size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1]) || !(t_list[0] > 0.0))
            throw std::invalid_argument("decay_exponent_fit: times must be positive and increasing");
    if (!(t_list.back() >= 8.0 * t_list.front()))
        throw std::invalid_argument("decay_exponent_fit: time range must span a factor of 8");
    if (probes.empty())
        throw std::invalid_argument("decay_exponent_fit: empty probe set");

    std::vector<double> base_p;
    for (const auto& u : probes) {
        const double np = lp_norm(u, p);
        if (!(np > 0.0))
            throw std::invalid_argument("decay_exponent_fit: probe with zero L^p norm");
        base_p.push_back(np);
    }

    DecayFitReport rep;
    rep.m = prop.m;
    rep.n = prop.grid.n;
    rep.p = p;
    rep.q = q;
    rep.t_samples = t_list;
    const double n_over_2m = static_cast<double>(prop.grid.n) / (2.0 * prop.m);
    const double invp = std::isinf(p) ? 0.0 : 1.0 / p;
    const double invq = std::isinf(q) ? 0.0 : 1.0 / q;
    rep.theoretical_slope = -n_over_2m * (invp - invq);

    std::vector<SpectralCoeffs> probe_hats;
    for (const auto& u : probes) probe_hats.push_back(forward(u));

    std::vector<double> log_t, log_r;
    for (double t : t_list) {
        double r = 0.0;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            RealField ut = inverse(propagate(probe_hats[k], t, prop));
            r = std::max(r, lp_norm(ut, q) / base_p[k]);
        }
        rep.ratios.push_back(r);
        log_t.push_back(std::log(t));
        log_r.push_back(std::log(r));
    }
    LinFit fit = linear_fit(log_t, log_r);
    rep.fitted_slope = fit.slope;
    rep.residual = fit.rms;
    return rep;
}

}  // namespace fujitalab
