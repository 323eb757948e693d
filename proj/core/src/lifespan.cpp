#include "fujitalab/lifespan.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fujitalab/norms.hpp"
#include "fujitalab/stats.hpp"

namespace fujitalab {

RegimeInfo classify_regime(int n, int m, double p) {
    if (n < 1 || m < 1)
        throw std::invalid_argument("classify_regime: n and m must be >= 1");
    if (!(p > 1.0)) throw std::invalid_argument("classify_regime: p must exceed 1");
    RegimeInfo info;
    info.n = n;
    info.m = m;
    info.p = p;
    info.p_fuj = 1.0 + 2.0 * m / n;
    if (std::abs(p - info.p_fuj) < 1e-12) {
        info.regime = Regime::Critical;
        info.critical_rate = p - 1.0;
    } else if (p < info.p_fuj) {
        info.regime = Regime::Subcritical;
        info.theoretical_exponent = -1.0 / (1.0 / (p - 1.0) - n / (2.0 * m));
    } else {
        info.regime = Regime::Supercritical;
    }
    return info;
}

double weight_integral(double t, double a) {
    if (a == 1.0) return std::log1p(t);
    return (std::pow(1.0 + t, 1.0 - a) - 1.0) / (1.0 - a);
}

int worker_count() {
    if (const char* env = std::getenv("FUJITA_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

namespace {

int next_pow2(int v) {
    int r = 1;
    while (r < v) r <<= 1;
    return r;
}

double predict_lifespan(const RegimeInfo& info, double eps) {
    switch (info.regime) {
        case Regime::Subcritical:
            return std::pow(eps, *info.theoretical_exponent);
        case Regime::Critical:
            return std::exp(std::pow(eps, -(info.p - 1.0)));
        case Regime::Supercritical:
            return std::numeric_limits<double>::quiet_NaN();
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

LifespanResult run_lifespan(const SimParams& base, const DomainPolicy& policy) {
    const int n = base.grid.n;
    const RegimeInfo info = classify_regime(n, base.m, base.p);
    const bool expect_blowup = info.regime != Regime::Supercritical;

    const double T_pred =
        expect_blowup ? predict_lifespan(info, base.epsilon) : policy.supercritical_t_end;
    const double width = base.u0.kind == InitialProfile::Kind::Gaussian ? base.u0.width : 1.0;
    const double dx_target = width / policy.points_per_width;

    double L = std::max(policy.c_dom * std::pow(T_pred, 1.0 / (2.0 * base.m)), 16.0 * width);
    int N = std::clamp(next_pow2(static_cast<int>(std::ceil(L / dx_target))), 64, policy.N_cap);

    LifespanResult result;
    double prev_T = std::numeric_limits<double>::quiet_NaN();

    for (int k = 0; k <= policy.max_doublings; ++k) {
        SimParams params = base;
        params.grid = make_grid(n, N, L);
        params.t_end = policy.t_end_factor * T_pred;
        if (base.dt0 <= 0.0) params.dt0 = std::min(1e-2, 1e-3 * T_pred);
        if (!(params.dt_min < params.dt0)) params.dt_min = params.dt0 * 1e-10;

        Trajectory traj = evolve(params);
        double T_k = std::numeric_limits<double>::infinity();
        BlowupEstimate est;
        if (traj.outcome != Outcome::Resolved) {
            est = estimate_blowup_time(traj, params.p);
            T_k = est.T_est;
        }
        result.domain_record.push_back({L, N, T_k});
        result.params = params;
        result.blowup = est;
        result.T_eps = T_k;

        if (!expect_blowup && traj.outcome == Outcome::Resolved) {
            result.note = "no blow-up observed up to t_end";
            break;
        }
        if (traj.outcome == Outcome::Resolved) {
            result.note = "no blow-up observed in a regime that predicts one";
            break;
        }
        if (std::isfinite(prev_T) && std::isfinite(T_k) &&
            std::abs(T_k - prev_T) < policy.convergence_tol * std::abs(prev_T)) {
            result.converged = true;
            break;
        }
        prev_T = T_k;
        if (k == policy.max_doublings) break;
        if (2 * N > policy.N_cap) {
            result.note = "resolution ceiling reached before domain convergence";
            break;
        }
        L *= 2.0;
        N *= 2;  // dx is held fixed across doublings
    }
    if (!result.converged && result.note.empty())
        result.note = "domain convergence not reached within max doublings";
    return result;
}

std::vector<SweepRow> sweep_epsilon(const SimParams& base,
                                    const std::vector<double>& eps_list,
                                    const DomainPolicy& policy, int max_workers) {
    if (eps_list.empty()) throw std::invalid_argument("sweep_epsilon: empty epsilon list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0))
            throw std::invalid_argument("sweep_epsilon: epsilons must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("sweep_epsilon: epsilons must be strictly decreasing");
    }

    const int workers =
        std::max(1, std::min<int>(max_workers > 0 ? max_workers : worker_count(),
                                  static_cast<int>(eps_list.size())));
    std::vector<SweepRow> rows(eps_list.size());

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= eps_list.size()) return;
            SimParams params = base;
            params.epsilon = eps_list[i];
            LifespanResult r = run_lifespan(params, policy);
            rows[i] = {eps_list[i],       r.T_eps,
                       r.converged,       r.domain_record.back().L,
                       r.domain_record.back().N, r.blowup.fit_r2};
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return rows;
}

ScalingFit fit_scaling(const std::vector<SweepRow>& table, const RegimeInfo& regime) {
    if (regime.regime == Regime::Supercritical)
        throw std::invalid_argument("fit_scaling: no scaling law in the supercritical regime");

    std::vector<double> eps, T;
    for (const auto& row : table) {
        if (row.converged && std::isfinite(row.T_eps) && row.T_eps > 0.0) {
            eps.push_back(row.eps);
            T.push_back(row.T_eps);
        }
    }
    if (eps.size() < 4)
        throw std::invalid_argument("fit_scaling: need at least 4 converged rows");

    ScalingFit out;
    out.regime = regime.regime;
    out.rows_used = static_cast<int>(eps.size());

    std::vector<double> x(eps.size()), y(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) y[i] = std::log(T[i]);

    if (regime.regime == Regime::Subcritical) {
        for (std::size_t i = 0; i < eps.size(); ++i) x[i] = std::log(eps[i]);
        const LinFit fit = linear_fit(x, y);
        out.theoretical_exponent = *regime.theoretical_exponent;
        out.fitted_slope = fit.slope;
        out.intercept = fit.intercept;
        out.stderr_slope = fit.stderr_slope;
        out.r2 = fit.r2;
        out.rms_residual = fit.rms;
    } else {
        for (std::size_t i = 0; i < eps.size(); ++i)
            x[i] = std::pow(eps[i], -(regime.p - 1.0));
        const LinFit fit = linear_fit(x, y);
        out.fitted_slope = fit.slope;
        out.intercept = fit.intercept;
        out.stderr_slope = fit.stderr_slope;
        out.r2 = fit.r2;
        out.rms_residual = fit.rms;
        // Competing model: pure power law T ~ eps^s.
        std::vector<double> xlog(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) xlog[i] = std::log(eps[i]);
        out.powerlaw_rms_residual = linear_fit(xlog, y).rms;
    }
    return out;
}

MTrace m_functional_check(const Trajectory& traj, const RegimeInfo& regime) {
    MTrace trace;
    const double eps = traj.params.epsilon;
    const double alpha = regime.n / (2.0 * regime.m);
    const double a = regime.n * (regime.p - 1.0) / (2.0 * regime.m);

    double running = 0.0;
    for (const auto& s : traj.norm_history) {
        const double value = std::pow(1.0 + s.t, alpha) * s.linf + s.l1;
        running = std::max(running, value);
        trace.times.push_back(s.t);
        trace.M_values.push_back(running);
    }
    if (trace.M_values.empty() || trace.M_values.back() == 0.0) {
        trace.degenerate = true;
        trace.T1_observed = std::numeric_limits<double>::infinity();
        return trace;
    }

    trace.C0 = trace.M_values.front() / eps;

    double C1 = 0.0;
    for (std::size_t i = 1; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        const double M = trace.M_values[i];
        const double excess = M - trace.C0 * eps;
        if (excess <= 0.0) continue;
        const double I = weight_integral(t, a);
        if (I <= 0.0) continue;
        C1 = std::max(C1, excess / (std::pow(M, regime.p) * I));
    }
    trace.C1 = C1;

    trace.T1_observed = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        if (trace.M_values[i] >= 2.0 * trace.C0 * eps) {
            trace.T1_observed = trace.times[i];
            break;
        }
    }
    return trace;
}

}  // namespace fujitalab
