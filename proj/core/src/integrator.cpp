#include "fujitalab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "fujitalab/norms.hpp"
#include "fujitalab/stats.hpp"
#include "fujitalab/transform.hpp"

namespace fujitalab {

RealField sample_profile(const InitialProfile& profile, const GridSpec& grid) {
    RealField u(grid);
    const std::int64_t total = grid.size();
    switch (profile.kind) {
        case InitialProfile::Kind::Constant:
            std::fill(u.values.begin(), u.values.end(), profile.value);
            break;
        case InitialProfile::Kind::Gaussian: {
            if (!(profile.width > 0.0))
                throw std::invalid_argument("sample_profile: Gaussian width must be positive");
            const double w2 = profile.width * profile.width;
            const double amp =
                profile.mass * std::pow(2.0 * std::numbers::pi * w2, -0.5 * grid.n);
            for (std::int64_t i = 0; i < total; ++i) {
                auto j = grid.unflatten(i);
                double r2 = 0.0;
                for (int a = 0; a < grid.n; ++a) {
                    const double x = grid.coord(j[a]);
                    r2 += x * x;
                }
                u.values[i] = amp * std::exp(-0.5 * r2 / w2);
            }
            break;
        }
    }
    return u;
}

void SimParams::validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("SimParams: p must exceed 1");
    if (m < 1) throw std::invalid_argument("SimParams: m must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("SimParams: epsilon must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("SimParams: t_end must be positive");
    if (!(dt0 > 0.0) || !(dt_min > 0.0) || !(dt_min < dt0))
        throw std::invalid_argument("SimParams: need 0 < dt_min < dt0");
    if (!(U_max >= 1e6)) throw std::invalid_argument("SimParams: U_max must be >= 1e6");
    if (!(growth_cap > 1.0) || !(growth_cap <= 2.0))
        throw std::invalid_argument("SimParams: growth_cap must lie in (1, 2]");
    if (grid.size() <= 0) throw std::invalid_argument("SimParams: invalid grid");
    if (dealias && p != std::floor(p))
        throw std::invalid_argument("SimParams: dealiasing requires integer p");
    if (max_snapshots < 32)
        throw std::invalid_argument("SimParams: max_snapshots must be >= 32");
}

PhiValues phi_functions(double z) {
    PhiValues v{};
    if (std::abs(z) <= 0.5) {
        // Degree-12 Taylor: phi_j(z) = sum_k z^k / (k+j)!; truncation is
        // below 1e-13 relative at |z| = 1/2.
        static const double inv_fact[] = {
            1.0,
            1.0,
            1.0 / 2,
            1.0 / 6,
            1.0 / 24,
            1.0 / 120,
            1.0 / 720,
            1.0 / 5040,
            1.0 / 40320,
            1.0 / 362880,
            1.0 / 3628800,
            1.0 / 39916800,
            1.0 / 479001600,
            1.0 / 6227020800.0,
            1.0 / 87178291200.0,
            1.0 / 1307674368000.0};
        double zk = 1.0;
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (int k = 0; k <= 12; ++k) {
            s1 += zk * inv_fact[k + 1];
            s2 += zk * inv_fact[k + 2];
            s3 += zk * inv_fact[k + 3];
            zk *= z;
        }
        v.phi1 = s1;
        v.phi2 = s2;
        v.phi3 = s3;
    } else {
        const double em1 = std::expm1(z);
        v.phi1 = em1 / z;
        v.phi2 = (em1 - z) / (z * z);
        v.phi3 = (em1 - z - 0.5 * z * z) / (z * z * z);
    }
    return v;
}

namespace {

// Pointwise nonlinearity |u|^p with fast paths for p = 2, 3.
void abs_pow_inplace(std::vector<double>& v, double p) {
    if (p == 2.0) {
        for (double& x : v) x = x * x;
    } else if (p == 3.0) {
        for (double& x : v) x = std::abs(x) * x * x;
    } else {
        for (double& x : v) x = std::pow(std::abs(x), p);
    }
}

int next_pow2(int v) {
    int r = 1;
    while (r < v) r <<= 1;
    return r;
}

// Spectral zero-padding of coeffs from an N-grid onto an M-grid (M > N),
// splitting the unmatched -N/2 Nyquist mode symmetrically.
SpectralCoeffs pad_spectrum(const SpectralCoeffs& c, const GridSpec& fine) {
    const GridSpec& g = c.grid;
    SpectralCoeffs out(fine);
    const std::int64_t total = g.size();
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = g.unflatten(i);
        // Destination slots per axis; Nyquist splits into two half-weight slots.
        std::array<std::array<int, 2>, 3> slots{};
        std::array<int, 3> nslots{1, 1, 1};
        double weight = 1.0;
        for (int a = 0; a < g.n; ++a) {
            const int k = g.freq_index(j[a]);
            if (k == -g.N / 2) {
                slots[a] = {fine.N - g.N / 2, g.N / 2};
                nslots[a] = 2;
                weight *= 0.5;
            } else {
                slots[a] = {k >= 0 ? k : k + fine.N, 0};
            }
        }
        for (int s0 = 0; s0 < nslots[0]; ++s0)
            for (int s1 = 0; s1 < nslots[1]; ++s1)
                for (int s2 = 0; s2 < nslots[2]; ++s2) {
                    std::array<int, 3> jf{slots[0][s0], g.n > 1 ? slots[1][s1] : 0,
                                          g.n > 2 ? slots[2][s2] : 0};
                    out.coeffs[fine.flatten(jf)] += c.coeffs[i] * weight;
                }
    }
    return out;
}

// Truncation back to the N-grid; aliased +N/2 content folds onto -N/2.
SpectralCoeffs truncate_spectrum(const SpectralCoeffs& c, const GridSpec& coarse) {
    const GridSpec& fine = c.grid;
    SpectralCoeffs out(coarse);
    const std::int64_t total = fine.size();
    for (std::int64_t i = 0; i < total; ++i) {
        auto j = fine.unflatten(i);
        std::array<int, 3> jc{0, 0, 0};
        bool keep = true;
        for (int a = 0; a < fine.n && keep; ++a) {
            const int k = fine.freq_index(j[a]);
            if (k > coarse.N / 2 || k < -coarse.N / 2) {
                keep = false;
            } else {
                const int kc = (k == coarse.N / 2) ? -coarse.N / 2 : k;
                jc[a] = kc >= 0 ? kc : kc + coarse.N;
            }
        }
        if (keep) out.coeffs[coarse.flatten(jc)] += c.coeffs[i];
    }
    return out;
}

// ETD stepper with per-h coefficient caching. All linear algebra is
// diagonal in Fourier space; the nonlinearity is evaluated pointwise in
// physical space (optionally on a zero-padded grid).
class EtdStepper {
  public:
    EtdStepper(const PropagatorSpec& prop, double p, Scheme scheme, bool nonlinear,
               bool dealias)
        : prop_(prop), p_(p), scheme_(scheme), nonlinear_(nonlinear), dealias_(dealias) {
        if (dealias_) {
            const int M = std::max(2 * 16, next_pow2(static_cast<int>(
                                                std::ceil((p + 1.0) * 0.5 * prop.grid.N))));
            fine_ = make_grid(prop.grid.n, M, prop.grid.L);
        }
    }

    RealField step(const RealField& u, double h) {
        const Coeffs& k = coeffs_for(h);
        SpectralCoeffs uh = forward(u);
        const std::int64_t total = prop_.grid.size();

        if (!nonlinear_) {
            SpectralCoeffs out(prop_.grid);
            for (std::int64_t i = 0; i < total; ++i) out.coeffs[i] = k.E[i] * uh.coeffs[i];
            return inverse(out);
        }

        SpectralCoeffs Nu = nonlinear_hat(u);
        if (scheme_ == Scheme::Etd1) {
            SpectralCoeffs out(prop_.grid);
            for (std::int64_t i = 0; i < total; ++i)
                out.coeffs[i] = k.E[i] * uh.coeffs[i] + h * k.p1[i] * Nu.coeffs[i];
            return inverse(out);
        }

        SpectralCoeffs ah(prop_.grid), bh(prop_.grid), ch(prop_.grid), outh(prop_.grid);
        for (std::int64_t i = 0; i < total; ++i)
            ah.coeffs[i] = k.E2[i] * uh.coeffs[i] + k.chalf[i] * Nu.coeffs[i];
        SpectralCoeffs Na = nonlinear_hat(inverse(ah));
        for (std::int64_t i = 0; i < total; ++i)
            bh.coeffs[i] = k.E2[i] * uh.coeffs[i] + k.chalf[i] * Na.coeffs[i];
        SpectralCoeffs Nb = nonlinear_hat(inverse(bh));
        for (std::int64_t i = 0; i < total; ++i)
            ch.coeffs[i] =
                k.E2[i] * ah.coeffs[i] + k.chalf[i] * (2.0 * Nb.coeffs[i] - Nu.coeffs[i]);
        SpectralCoeffs Nc = nonlinear_hat(inverse(ch));
        for (std::int64_t i = 0; i < total; ++i)
            outh.coeffs[i] = k.E[i] * uh.coeffs[i] + k.b1[i] * Nu.coeffs[i] +
                             k.b2[i] * (Na.coeffs[i] + Nb.coeffs[i]) + k.b3[i] * Nc.coeffs[i];
        return inverse(outh);
    }

  private:
    struct Coeffs {
        std::vector<double> E, E2, chalf, b1, b2, b3, p1;
    };

    const Coeffs& coeffs_for(double h) {
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        if (cache_.size() > 64) cache_.clear();
        Coeffs k;
        const std::int64_t total = prop_.grid.size();
        k.E.resize(total);
        if (scheme_ == Scheme::Etd1) {
            k.p1.resize(total);
            for (std::int64_t i = 0; i < total; ++i) {
                const double z = -h * prop_.symbol.values[i];
                k.E[i] = std::exp(z);
                k.p1[i] = phi_functions(z).phi1;
            }
        } else {
            k.E2.resize(total);
            k.chalf.resize(total);
            k.b1.resize(total);
            k.b2.resize(total);
            k.b3.resize(total);
            for (std::int64_t i = 0; i < total; ++i) {
                const double z = -h * prop_.symbol.values[i];
                k.E[i] = std::exp(z);
                k.E2[i] = std::exp(0.5 * z);
                k.chalf[i] = 0.5 * h * phi_functions(0.5 * z).phi1;
                const PhiValues ph = phi_functions(z);
                k.b1[i] = h * (ph.phi1 - 3.0 * ph.phi2 + 4.0 * ph.phi3);
                k.b2[i] = h * (2.0 * ph.phi2 - 4.0 * ph.phi3);
                k.b3[i] = h * (4.0 * ph.phi3 - ph.phi2);
            }
        }
        auto [pos, ok] = cache_.emplace(h, std::move(k));
        return pos->second;
    }

    SpectralCoeffs nonlinear_hat(const RealField& u) {
        if (!dealias_) {
            RealField w = u;
            abs_pow_inplace(w.values, p_);
            return forward(w);
        }
        RealField fine_u = inverse(pad_spectrum(forward(u), fine_));
        abs_pow_inplace(fine_u.values, p_);
        return truncate_spectrum(forward(fine_u), prop_.grid);
    }

    const PropagatorSpec& prop_;
    double p_;
    Scheme scheme_;
    bool nonlinear_;
    bool dealias_;
    GridSpec fine_;
    std::map<double, Coeffs> cache_;
};

bool finite_max_abs(const RealField& u, double& out_linf) {
    double m = 0.0;
    for (double v : u.values) {
        if (!std::isfinite(v)) return false;
        m = std::max(m, std::abs(v));
    }
    out_linf = m;
    return true;
}

}  // namespace

RealField etd_step(const RealField& u, double h, const PropagatorSpec& prop, double p,
                   Scheme scheme, bool nonlinear, bool dealias) {
    if (!(h > 0.0)) throw std::invalid_argument("etd_step: step must be positive");
    EtdStepper stepper(prop, p, scheme, nonlinear, dealias);
    return stepper.step(u, h);
}

Trajectory evolve(const SimParams& params) {
    params.validate();
    Trajectory traj;
    traj.params = params;

    const GridSpec& grid = params.grid;
    RealField u = sample_profile(params.u0, grid);
    for (double& v : u.values) v *= params.epsilon;
    if (!u.finite()) throw std::invalid_argument("evolve: initial field is not finite");
    if (!(mass(u) > 0.0))
        traj.note = "warning: initial data has nonpositive mass";

    const PropagatorSpec prop = make_propagator(params.m, grid);
    EtdStepper stepper(prop, params.p, params.scheme, params.nonlinear, params.dealias);

    const double snap_dt_base =
        params.snapshot_dt > 0.0 ? params.snapshot_dt : params.t_end / 128.0;
    double snap_dt = snap_dt_base;
    double next_uniform = snap_dt;

    double t = 0.0;
    double h = params.dt0;
    double linf = lp_norm(u, std::numeric_limits<double>::infinity());
    traj.norm_history.push_back({0.0, 0.0, lp_norm(u, 1.0), linf, lp_norm(u, params.p)});
    traj.snapshots.push_back({0.0, u, true});
    double last_geom_linf = linf;

    auto take_snapshot = [&](double at, bool geometric) {
        traj.snapshots.push_back({at, u, geometric});
        if (static_cast<int>(traj.snapshots.size()) > params.max_snapshots) {
            // Thin every other uniform snapshot and coarsen the cadence.
            std::vector<Snapshot> kept;
            kept.reserve(traj.snapshots.size());
            bool drop = false;
            for (auto& s : traj.snapshots) {
                if (s.geometric || s.t == 0.0) {
                    kept.push_back(std::move(s));
                } else {
                    if (!drop) kept.push_back(std::move(s));
                    drop = !drop;
                }
            }
            traj.snapshots = std::move(kept);
            snap_dt *= 2.0;
        }
    };

    // Doubling is gated by a state-dependent ceiling: a fraction of the
    // local nonlinear time scale |u|^(1-p)/(p-1), and the uniform
    // snapshot cadence.
    auto step_ceiling = [&](double cur_linf) {
        double cap = snap_dt;
        if (params.nonlinear && cur_linf > 0.0)
            cap = std::min(cap, 0.05 * std::pow(cur_linf, 1.0 - params.p) / (params.p - 1.0));
        return cap;
    };

    int consecutive_small = 0;
    const double half_cap_ratio = 1.0 + 0.5 * (params.growth_cap - 1.0);

    while (true) {
        if (t >= params.t_end * (1.0 - 1e-14)) {
            traj.outcome = Outcome::Resolved;
            break;
        }
        const double h_eff = std::min(h, params.t_end - t);
        RealField candidate = stepper.step(u, h_eff);
        double linf_new = 0.0;
        const bool finite = finite_max_abs(candidate, linf_new);
        const bool too_fast = finite && linf > 0.0 && linf_new > params.growth_cap * linf;

        if ((!finite || too_fast) && params.adaptive) {
            h = 0.5 * h_eff;
            if (h < params.dt_min) {
                traj.outcome = !finite ? Outcome::BlowupDetected : Outcome::StepCollapse;
                break;
            }
            continue;
        }
        if (!finite) {  // fixed-step mode
            traj.outcome = Outcome::BlowupDetected;
            break;
        }

        t += h_eff;
        u = std::move(candidate);
        const double l1 = lp_norm(u, 1.0);
        const double lpn = lp_norm(u, params.p);
        traj.norm_history.push_back({t, h_eff, l1, linf_new, lpn});

        bool geom = false;
        if (last_geom_linf > 0.0 && linf_new >= 2.0 * last_geom_linf) {
            geom = true;
            last_geom_linf = linf_new;
        } else if (last_geom_linf == 0.0 && linf_new > 0.0) {
            last_geom_linf = linf_new;
        }
        bool uniform = false;
        if (t >= next_uniform - 1e-14 * params.t_end) {
            uniform = true;
            while (next_uniform <= t + 1e-14 * params.t_end) next_uniform += snap_dt;
        }
        if (geom || uniform) take_snapshot(t, geom);

        if (linf_new >= params.U_max) {
            traj.outcome = Outcome::BlowupDetected;
            break;
        }

        if (params.adaptive) {
            if (linf > 0.0 && linf_new <= half_cap_ratio * linf)
                ++consecutive_small;
            else
                consecutive_small = 0;
            if (consecutive_small >= 8) {
                if (2.0 * h <= step_ceiling(linf_new)) {
                    h *= 2.0;
                    consecutive_small = 0;
                }
            }
        }
        linf = linf_new;
    }

    traj.t_final = t;
    if (traj.snapshots.back().t < t) traj.snapshots.push_back({t, u, false});
    return traj;
}

BlowupEstimate estimate_blowup_time(const Trajectory& traj, double p) {
    if (traj.outcome == Outcome::Resolved)
        throw std::invalid_argument(
            "estimate_blowup_time: trajectory did not end in blow-up or step collapse");
    BlowupEstimate est;

    std::vector<double> ts, linfs;
    for (const auto& s : traj.norm_history) {
        if (std::isfinite(s.linf) && s.linf > 0.0) {
            ts.push_back(s.t);
            linfs.push_back(s.linf);
        }
    }
    if (ts.size() < 4) {
        est.low_confidence = true;
        est.flag = "too few finite samples";
        return est;
    }
    const double linf_max = *std::max_element(linfs.begin(), linfs.end());
    if (linf_max < 100.0 * linfs.front()) {
        est.low_confidence = true;
        est.flag = "insufficient growth";
    }

    // Fit window: the last decade of sup-norm growth (widened if sparse).
    double threshold = linf_max / 10.0;
    std::vector<double> xt, yt;
    for (int attempt = 0; attempt < 2; ++attempt) {
        xt.clear();
        yt.clear();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (linfs[i] >= threshold) {
                xt.push_back(ts[i]);
                yt.push_back(std::pow(linfs[i], -(p - 1.0)));
            }
        }
        if (xt.size() >= 8) break;
        threshold = linf_max / 100.0;
    }
    if (xt.size() < 4) {
        est.low_confidence = true;
        est.flag = est.flag.empty() ? "too few points in fit window" : est.flag;
        return est;
    }

    const LinFit fit = linear_fit(xt, yt);
    est.fit_t_lo = xt.front();
    est.fit_t_hi = xt.back();
    est.fit_r2 = fit.r2;
    if (!(fit.slope < 0.0)) {
        est.low_confidence = true;
        est.flag = "nonnegative slope";
        return est;
    }
    est.T_est = -fit.intercept / fit.slope;
    est.rate_constant = std::pow(-fit.slope, -1.0 / (p - 1.0));
    if (fit.r2 < 0.99) {
        est.low_confidence = true;
        if (est.flag.empty()) est.flag = "fit r2 below 0.99";
    }
    if (!(est.T_est > est.fit_t_hi)) {
        est.low_confidence = true;
        if (est.flag.empty()) est.flag = "extrapolated root not beyond data";
    }
    return est;
}

double duhamel_residual(const Trajectory& traj, double t_check) {
    const SimParams& params = traj.params;
    std::vector<const Snapshot*> snaps;
    for (const auto& s : traj.snapshots)
        if (s.t <= t_check * (1.0 + 1e-12) + 1e-300) snaps.push_back(&s);
    if (snaps.size() < 16)
        throw std::invalid_argument("duhamel_residual: need at least 16 snapshots in [0, t]");

    const Snapshot& target = *snaps.back();
    const double t_star = target.t;
    const PropagatorSpec prop = make_propagator(params.m, params.grid);

    RealField residual = propagate(snaps.front()->field, t_star, prop);
    const std::int64_t total = params.grid.size();
    for (std::int64_t i = 0; i < total; ++i)
        residual.values[i] = target.field.values[i] - residual.values[i];

    if (params.nonlinear) {
        const std::size_t K = snaps.size();
        for (std::size_t k = 0; k < K; ++k) {
            double w;
            if (k == 0)
                w = 0.5 * (snaps[1]->t - snaps[0]->t);
            else if (k + 1 == K)
                w = 0.5 * (snaps[K - 1]->t - snaps[K - 2]->t);
            else
                w = 0.5 * (snaps[k + 1]->t - snaps[k - 1]->t);
            if (w == 0.0) continue;
            RealField src = snaps[k]->field;
            abs_pow_inplace(src.values, params.p);
            RealField prop_src = propagate(src, t_star - snaps[k]->t, prop);
            for (std::int64_t i = 0; i < total; ++i)
                residual.values[i] -= w * prop_src.values[i];
        }
    }

    const double denom =
        std::max(lp_norm(target.field, std::numeric_limits<double>::infinity()), 1e-300);
    return lp_norm(residual, std::numeric_limits<double>::infinity()) / denom;
}

}  // namespace fujitalab
