#include "fujitalab/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fujitalab/norms.hpp"

namespace fujitalab {

namespace {

// exp(-1/theta) for theta > 0, 0 otherwise (the mollifier seed).
inline double seed(double theta) { return theta > 0.0 ? std::exp(-1.0 / theta) : 0.0; }

// 8th-order central second-derivative stencil, offsets -4..4.
constexpr int kStencilHalf = 4;
constexpr double kStencil[9] = {-1.0 / 560,  8.0 / 315, -1.0 / 5,  8.0 / 5, -205.0 / 72,
                                8.0 / 5,     -1.0 / 5,  8.0 / 315, -1.0 / 560};

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

double bump_profile(double s) {
    if (s < 0.0) throw std::invalid_argument("bump_profile: argument must be nonnegative");
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    const double theta = 2.0 * (s - 0.5);
    const double a = seed(theta);
    const double b = seed(1.0 - theta);
    return b / (a + b);
}

double bump_profile_derivative(double s) {
    if (s < 0.0) throw std::invalid_argument("bump_profile_derivative: argument must be nonnegative");
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double theta = 2.0 * (s - 0.5);
    const double a = seed(theta);
    const double b = seed(1.0 - theta);
    if (a == 0.0 || b == 0.0) return 0.0;  // flat to all orders at the junctions
    const double inv = 1.0 / ((a + b) * (a + b));
    const double gprime = -a * b * (1.0 / (theta * theta) + 1.0 / ((1.0 - theta) * (1.0 - theta))) * inv;
    return 2.0 * gprime;
}

CutoffSpec make_cutoff(double R, int m, double p, int l) {
    if (!(R > 0.0)) throw std::invalid_argument("make_cutoff: R must be positive");
    if (m < 1) throw std::invalid_argument("make_cutoff: m must be >= 1");
    if (!(p > 1.0)) throw std::invalid_argument("make_cutoff: p must exceed 1");
    CutoffSpec spec;
    spec.R = R;
    spec.m = m;
    spec.p = p;
    spec.p_prime = p / (p - 1.0);
    const int l_min = static_cast<int>(std::ceil(2.0 * m * spec.p_prime - 1e-12));
    spec.l = l > 0 ? l : l_min;
    if (spec.l < l_min)
        throw std::invalid_argument("make_cutoff: l must be at least ceil(2 m p')");
    return spec;
}

namespace {

inline double scaled_variable(std::span<const double> x, double t, const CutoffSpec& spec) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return (pow_int(r2, spec.m) + t) / spec.R;
}

inline double phi_star(double s) { return s < 0.5 ? 0.0 : bump_profile(s); }

}  // namespace

double cutoff_eval(std::span<const double> x, double t, const CutoffSpec& spec, bool starred) {
    const double s = scaled_variable(x, t, spec);
    const double base = starred ? phi_star(s) : bump_profile(s);
    return pow_int(base, spec.l);
}

double cutoff_time_derivative(std::span<const double> x, double t, const CutoffSpec& spec) {
    const double s = scaled_variable(x, t, spec);
    if (s <= 0.5 || s >= 1.0) return 0.0;
    return spec.l * pow_int(bump_profile(s), spec.l - 1) * bump_profile_derivative(s) / spec.R;
}

namespace {

// Uniform padded scan lattice: per-axis nodes x0 + i*h, i in [0, P), with
// `pad` extra cells on each side so m Laplacian passes stay valid on the
// interior. Values beyond the cutoff support are exact zeros, so padding
// costs nothing but memory.
struct ScanLattice {
    int n = 1;
    int P = 0;       // points per axis (including padding)
    double x0 = 0.0;
    double h = 0.0;
    int pad = 0;

    std::int64_t size() const {
        std::int64_t s = 1;
        for (int a = 0; a < n; ++a) s *= P;
        return s;
    }
    double coord(int i) const { return x0 + i * h; }
};

void tabulate_cutoff(const ScanLattice& lat, double t, const CutoffSpec& spec,
                     std::vector<double>& out) {
    const std::int64_t total = lat.size();
    out.assign(total, 0.0);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::array<int, 3> idx{0, 0, 0};
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::int64_t rem = flat;
        for (int a = lat.n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % lat.P);
            rem /= lat.P;
        }
        for (int a = 0; a < lat.n; ++a) x[a] = lat.coord(idx[a]);
        out[flat] = cutoff_eval(std::span<const double>(x.data(), lat.n), t, spec, false);
    }
}

// One discrete Laplacian pass (sum of per-axis 8th-order stencils).
// Valid entries shrink by kStencilHalf cells per axis per pass.
void laplacian_pass(const ScanLattice& lat, const std::vector<double>& in,
                    std::vector<double>& out, int margin) {
    const double inv_h2 = 1.0 / (lat.h * lat.h);
    out.assign(in.size(), 0.0);
    std::array<std::int64_t, 3> stride{0, 0, 0};
    {
        std::int64_t s = 1;
        for (int a = lat.n - 1; a >= 0; --a) {
            stride[a] = s;
            s *= lat.P;
        }
    }
    const int lo = margin, hi = lat.P - margin;
    std::array<int, 3> idx{0, 0, 0};
    const std::int64_t total = lat.size();
    for (std::int64_t flat = 0; flat < total; ++flat) {
        std::int64_t rem = flat;
        bool interior = true;
        for (int a = lat.n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % lat.P);
            rem /= lat.P;
            if (idx[a] < lo || idx[a] >= hi) interior = false;
        }
        if (!interior) continue;
        double acc = 0.0;
        for (int a = 0; a < lat.n; ++a) {
            double axis = 0.0;
            for (int k = -kStencilHalf; k <= kStencilHalf; ++k)
                axis += kStencil[k + kStencilHalf] * in[flat + k * stride[a]];
            acc += axis;
        }
        out[flat] = acc * inv_h2;
    }
}

// Lap^m of the cutoff on the lattice (analytic tabulation + m FD passes).
void laplacian_m(const ScanLattice& lat, double t, const CutoffSpec& spec,
                 std::vector<double>& vals, std::vector<double>& scratch) {
    tabulate_cutoff(lat, t, spec, vals);
    for (int pass = 1; pass <= spec.m; ++pass) {
        laplacian_pass(lat, vals, scratch, pass * kStencilHalf);
        vals.swap(scratch);
    }
}

}  // namespace

LemmaReport lemma_ratio(const CutoffSpec& spec, int n, int cells_per_axis, int time_cells) {
    if (n < 1 || n > 3) throw std::invalid_argument("lemma_ratio: n must be 1, 2, or 3");
    if (time_cells < 16) throw std::invalid_argument("lemma_ratio: need at least 16 time cells");
    const double R = spec.R;
    const double inv2m = 1.0 / (2.0 * spec.m);
    const double support_radius = std::pow(R, inv2m);
    const double layer_lo = std::pow(0.5 * R, inv2m);
    const double layer_width = support_radius - layer_lo;
    const double X = std::pow(1.02 * R, inv2m);  // slightly past the support

    int cells = cells_per_axis;
    if (cells <= 0) cells = static_cast<int>(std::ceil(2.0 * X / (layer_width / 96.0)));
    const double h = 2.0 * X / cells;
    const int layer_cells = static_cast<int>(std::floor(layer_width / h));
    if (layer_cells < 64)
        throw std::invalid_argument(
            "lemma_ratio: transition layer under-resolved (< 64 cells per axis)");

    // Coarse lattice and its half-spacing refinement share node positions
    // at even fine indices, which is what the Richardson check compares.
    const int pad = 2 * kStencilHalf * spec.m;  // covers both spacings
    ScanLattice coarse;
    coarse.n = n;
    coarse.h = h;
    coarse.pad = pad;
    coarse.P = cells + 1 + 2 * pad;
    coarse.x0 = -X - pad * h;

    ScanLattice fine;
    fine.n = n;
    fine.h = 0.5 * h;
    fine.pad = 2 * pad;
    fine.P = 2 * (coarse.P - 1) + 1;
    fine.x0 = coarse.x0;

    std::vector<double> vc, vf, scratch;
    LemmaReport rep;
    rep.cells_per_axis = cells;
    rep.layer_cells = layer_cells;

    double max_diff = 0.0, max_val = 0.0;
    std::array<std::int64_t, 3> cstride{0, 0, 0}, fstride{0, 0, 0};
    {
        std::int64_t s = 1;
        for (int a = n - 1; a >= 0; --a) {
            cstride[a] = s;
            s *= coarse.P;
        }
        s = 1;
        for (int a = n - 1; a >= 0; --a) {
            fstride[a] = s;
            s *= fine.P;
        }
    }

    const double dt = 1.01 * R / (time_cells - 1);
    std::array<double, 3> xbuf{0.0, 0.0, 0.0};
    std::array<int, 3> idx{0, 0, 0};
    for (int it = 0; it < time_cells; ++it) {
        const double t = it * dt;
        laplacian_m(coarse, t, spec, vc, scratch);
        laplacian_m(fine, t, spec, vf, scratch);

        const std::int64_t total = coarse.size();
        for (std::int64_t flat = 0; flat < total; ++flat) {
            std::int64_t rem = flat;
            bool interior = true;
            for (int a = n - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rem % coarse.P);
                rem /= coarse.P;
                if (idx[a] < pad || idx[a] >= coarse.P - pad) interior = false;
            }
            if (!interior) continue;
            std::int64_t fflat = 0;
            for (int a = 0; a < n; ++a) fflat += 2 * idx[a] * fstride[a];

            const double lap = vf[fflat];
            max_diff = std::max(max_diff, std::abs(vc[flat] - lap));
            max_val = std::max(max_val, std::abs(lap));

            for (int a = 0; a < n; ++a) xbuf[a] = coarse.coord(idx[a]);
            const std::span<const double> xs(xbuf.data(), n);
            const double dpsi = cutoff_time_derivative(xs, t, spec);
            const double numerator = std::abs(dpsi) + std::abs(lap);
            const double star = cutoff_eval(xs, t, spec, true);
            if (star <= 0.0) continue;
            if (numerator < 1e-14 && star < 1e-14) continue;
            const double ratio = R * numerator / std::pow(star, 1.0 / spec.p);
            if (ratio > rep.C_emp) {
                rep.C_emp = ratio;
                rep.x_at_max = xbuf;
                rep.t_at_max = t;
            }
        }
    }

    rep.richardson_disagreement = max_val > 0.0 ? max_diff / max_val : 0.0;
    if (rep.richardson_disagreement > 0.01)
        throw std::runtime_error("lemma_ratio: Richardson check failed (derivatives under-resolved)");
    return rep;
}

RealField cutoff_polyharmonic(const GridSpec& grid, double t, const CutoffSpec& spec,
                              int refine) {
    if (refine < 1) throw std::invalid_argument("cutoff_polyharmonic: refine must be >= 1");
    const double support_radius = std::pow(spec.R, 1.0 / (2.0 * spec.m));
    const double hs = grid.dx() / refine;
    const int pad = kStencilHalf * spec.m;
    if (support_radius + pad * hs >= 0.5 * grid.L)
        throw std::invalid_argument("cutoff_polyharmonic: support of psi_R exceeds the box");

    ScanLattice lat;
    lat.n = grid.n;
    lat.h = hs;
    lat.pad = pad;
    lat.P = (grid.N - 1) * refine + 1 + 2 * pad;
    lat.x0 = grid.coord(0) - pad * hs;

    std::vector<double> vals, scratch;
    laplacian_m(lat, t, spec, vals, scratch);

    RealField out(grid);
    const double sign = spec.m % 2 == 0 ? 1.0 : -1.0;  // (-Lap)^m = (-1)^m Lap^m
    const std::int64_t total = grid.size();
    std::array<std::int64_t, 3> lstride{0, 0, 0};
    {
        std::int64_t s = 1;
        for (int a = grid.n - 1; a >= 0; --a) {
            lstride[a] = s;
            s *= lat.P;
        }
    }
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = grid.unflatten(i);
        std::int64_t flat = 0;
        for (int a = 0; a < grid.n; ++a) flat += (pad + j[a] * refine) * lstride[a];
        out.values[i] = sign * vals[flat];
    }
    return out;
}

namespace {

// Tabulates the (possibly starred) cutoff on the simulation grid.
void cutoff_on_grid(const GridSpec& grid, double t, const CutoffSpec& spec, bool starred,
                    std::vector<double>& out) {
    const std::int64_t total = grid.size();
    out.resize(total);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = grid.unflatten(i);
        for (int a = 0; a < grid.n; ++a) x[a] = grid.coord(j[a]);
        out[i] = cutoff_eval(std::span<const double>(x.data(), grid.n), t, spec, starred);
    }
}

std::vector<const Snapshot*> snapshots_up_to(const Trajectory& traj, double t_max) {
    std::vector<const Snapshot*> snaps;
    for (const auto& s : traj.snapshots)
        if (s.t <= t_max * (1.0 + 1e-12)) snaps.push_back(&s);
    return snaps;
}

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
    const std::size_t K = t.size();
    std::vector<double> w(K, 0.0);
    if (K < 2) return w;
    w[0] = 0.5 * (t[1] - t[0]);
    w[K - 1] = 0.5 * (t[K - 1] - t[K - 2]);
    for (std::size_t k = 1; k + 1 < K; ++k) w[k] = 0.5 * (t[k + 1] - t[k - 1]);
    return w;
}

}  // namespace

double weak_identity_residual(const Trajectory& traj, const CutoffSpec& spec, double T) {
    if (T < spec.R)
        throw std::invalid_argument("weak_identity_residual: psi_R does not vanish at T (need T >= R)");
    const GridSpec& grid = traj.params.grid;
    const double support_radius = std::pow(spec.R, 1.0 / (2.0 * spec.m));
    if (support_radius >= 0.5 * grid.L)
        throw std::invalid_argument("weak_identity_residual: support of psi_R exceeds the box");

    auto snaps = snapshots_up_to(traj, spec.R);
    if (snaps.size() < 32 || snaps.back()->t < spec.R * (1.0 - 1e-9))
        throw std::invalid_argument(
            "weak_identity_residual: need >= 32 snapshots covering [0, R]");

    std::vector<double> times;
    for (const auto* s : snaps) times.push_back(s->t);
    const auto w = trapezoid_weights(times);

    const double cv = grid.cell_volume;
    const std::int64_t total = grid.size();
    const double p = traj.params.p;

    double data_term = 0.0;   // eps Int u0 psi_R(., 0)
    double source_term = 0.0; // IntInt |u|^p psi_R
    double poly_term = 0.0;   // IntInt u (-Lap)^m psi_R
    double time_term = 0.0;   // IntInt u dt psi_R

    std::vector<double> psi;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const double t = snaps[k]->t;
        const RealField& u = snaps[k]->field;
        cutoff_on_grid(grid, t, spec, false, psi);
        const RealField lap = cutoff_polyharmonic(grid, t, spec);

        double a = 0.0, b = 0.0, c = 0.0;
        for (std::int64_t i = 0; i < total; ++i) {
            const double ui = u.values[i];
            a += std::pow(std::abs(ui), p) * psi[i];
            b += ui * lap.values[i];
            auto j = grid.unflatten(i);
            for (int ax = 0; ax < grid.n; ++ax) x[ax] = grid.coord(j[ax]);
            c += ui * cutoff_time_derivative(std::span<const double>(x.data(), grid.n), t, spec);
        }
        source_term += w[k] * a * cv;
        poly_term += w[k] * b * cv;
        time_term += w[k] * c * cv;
        if (k == 0) {
            double d = 0.0;
            for (std::int64_t i = 0; i < total; ++i) d += u.values[i] * psi[i];
            data_term = d * cv;  // u(0) = eps u0
        }
    }

    const double lhs = data_term + source_term;
    const double rhs = poly_term - time_term;
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300);
}

std::vector<double> make_r_grid(double R_max, int points) {
    if (points < 2) throw std::invalid_argument("make_r_grid: need at least 2 points");
    std::vector<double> r(points);
    for (int k = 0; k < points; ++k)
        r[k] = R_max * std::pow(2.0, -0.25 * (points - 1 - k));
    return r;
}

std::vector<XYWRecord> xyw_check(const Trajectory& traj, const CutoffSpec& base,
                                 const std::vector<double>& r_grid) {
    if (r_grid.size() < 16)
        throw std::invalid_argument("xyw_check: r-grid needs at least 16 points");
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (!(r_grid[i] > r_grid[i - 1]))
            throw std::invalid_argument("xyw_check: r-grid must be strictly increasing");

    const GridSpec& grid = traj.params.grid;
    const double R_max = r_grid.back();
    if (std::pow(R_max, 1.0 / (2.0 * base.m)) >= 0.5 * grid.L)
        throw std::invalid_argument("xyw_check: support of psi_R exceeds the computational box");
    if (traj.snapshots.empty() || traj.snapshots.back().t < R_max * (1.0 - 1e-9))
        throw std::invalid_argument("xyw_check: trajectory does not cover the support of psi_R");

    const double p = base.p;
    const double pp = base.p_prime;
    const double cv = grid.cell_volume;
    const std::int64_t total = grid.size();

    std::vector<XYWRecord> records;
    records.reserve(r_grid.size());
    double W = 0.0;
    double prev_Y = 0.0, prev_r = 0.0;

    std::vector<double> psi, psis;
    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        CutoffSpec spec = base;
        spec.R = r_grid[ri];

        auto snaps = snapshots_up_to(traj, spec.R);
        std::vector<double> times;
        for (const auto* s : snaps) times.push_back(s->t);
        const bool needs_endpoint = times.empty() || times.back() < spec.R;
        if (needs_endpoint) times.push_back(spec.R);  // integrand is exactly 0 there
        const auto w = trapezoid_weights(times);

        double X = 0.0, Y = 0.0, holder_lhs = 0.0, support_vol = 0.0;
        for (std::size_t k = 0; k < snaps.size(); ++k) {
            const double t = snaps[k]->t;
            const RealField& u = snaps[k]->field;
            cutoff_on_grid(grid, t, spec, false, psi);
            cutoff_on_grid(grid, t, spec, true, psis);
            double a = 0.0, b = 0.0, hl = 0.0, vol = 0.0;
            for (std::int64_t i = 0; i < total; ++i) {
                const double up = std::pow(std::abs(u.values[i]), p);
                a += up * psi[i];
                if (psis[i] > 0.0) {
                    b += up * psis[i];
                    hl += std::abs(u.values[i]) * std::pow(psis[i], 1.0 / p);
                    vol += 1.0;
                }
            }
            X += w[k] * a * cv;
            Y += w[k] * b * cv;
            holder_lhs += w[k] * hl * cv;
            support_vol += w[k] * vol * cv;
        }

        XYWRecord rec;
        rec.R = spec.R;
        rec.X = X;
        rec.Y = Y;
        if (ri > 0) W += 0.5 * (prev_Y + Y) * (std::log(spec.R) - std::log(prev_r));
        rec.W = W;
        rec.verdict_log = (2.0 / std::numbers::ln2) * W <= X * 1.02 + 1e-300;
        const double holder_rhs = std::pow(Y, 1.0 / p) * std::pow(support_vol, 1.0 / pp);
        rec.verdict_holder = holder_lhs <= holder_rhs * (1.0 + 1e-12) + 1e-300;
        records.push_back(rec);

        prev_Y = Y;
        prev_r = spec.R;
    }
    return records;
}

}  // namespace fujitalab
