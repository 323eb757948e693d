#include "fujitalab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fujitalab/report.hpp"

namespace fujitalab {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error: " + where + ": " + what);
}

double parse_double(const std::string& where, const std::string& key, const std::string& v) {
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(where, "key '" + key + "': expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& where, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        fail(where, "key '" + key + "': expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& where, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(where, "key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& where, const std::string& key,
                               const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(where, "key '" + key + "': empty list entry");
        out.push_back(parse_double(where, key, item));
    }
    if (out.empty()) fail(where, "key '" + key + "': empty list");
    return out;
}

using Setter = std::function<void(Config&, const std::string& where, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto d = [](double Config::* f) {
            return [f](Config& c, const std::string& w, const std::string& k,
                       const std::string& v) { c.*f = parse_double(w, k, v); };
        };
        auto i = [](int Config::* f) {
            return [f](Config& c, const std::string& w, const std::string& k,
                       const std::string& v) { c.*f = parse_int(w, k, v); };
        };
        auto b = [](bool Config::* f) {
            return [f](Config& c, const std::string& w, const std::string& k,
                       const std::string& v) { c.*f = parse_bool(w, k, v); };
        };
        auto s = [](std::string Config::* f) {
            return [f](Config& c, const std::string&, const std::string&,
                       const std::string& v) { c.*f = v; };
        };
        auto lst = [](std::vector<double> Config::* f) {
            return [f](Config& c, const std::string& w, const std::string& k,
                       const std::string& v) { c.*f = parse_list(w, k, v); };
        };

        t["problem.n"] = i(&Config::n);
        t["problem.m"] = i(&Config::m);
        t["problem.p"] = d(&Config::p);
        t["problem.epsilon"] = d(&Config::epsilon);
        t["problem.eps_list"] = lst(&Config::eps_list);
        t["problem.u0"] = s(&Config::u0);
        t["problem.u0_width"] = d(&Config::u0_width);
        t["problem.u0_mass"] = d(&Config::u0_mass);
        t["problem.u0_value"] = d(&Config::u0_value);

        t["grid.N"] = i(&Config::grid_N);
        t["grid.L"] = d(&Config::grid_L);

        t["integrator.scheme"] = s(&Config::scheme);
        t["integrator.dt0"] = d(&Config::dt0);
        t["integrator.dt_min"] = d(&Config::dt_min);
        t["integrator.U_max"] = d(&Config::U_max);
        t["integrator.growth_cap"] = d(&Config::growth_cap);
        t["integrator.t_end"] = d(&Config::t_end);
        t["integrator.nonlinear"] = b(&Config::nonlinear);
        t["integrator.dealias"] = b(&Config::dealias);
        t["integrator.snapshot_dt"] = d(&Config::snapshot_dt);
        t["integrator.max_snapshots"] = i(&Config::max_snapshots);

        t["harness.c_dom"] = d(&Config::c_dom);
        t["harness.convergence_tol"] = d(&Config::convergence_tol);
        t["harness.max_doublings"] = i(&Config::max_doublings);
        t["harness.t_end_factor"] = d(&Config::t_end_factor);
        t["harness.points_per_width"] = d(&Config::points_per_width);
        t["harness.N_cap"] = i(&Config::N_cap);
        t["harness.supercritical_t_end"] = d(&Config::supercritical_t_end);
        t["harness.eps_cap_critical"] = d(&Config::eps_cap_critical);

        t["testfn.R_list"] = lst(&Config::R_list);
        t["testfn.l"] = i(&Config::l);
        t["testfn.R0"] = d(&Config::R0);
        t["testfn.resolution"] = i(&Config::resolution);
        t["testfn.r_points"] = i(&Config::r_points);
        t["testfn.time_cells"] = i(&Config::time_cells);

        t["kernel.t_list"] = lst(&Config::kernel_t_list);

        t["decay.p"] = d(&Config::decay_p);
        t["decay.q"] = d(&Config::decay_q);
        t["decay.t_lo"] = d(&Config::decay_t_lo);
        t["decay.t_hi"] = d(&Config::decay_t_hi);
        t["decay.points"] = i(&Config::decay_points);

        t["output.directory"] = s(&Config::out_dir);
        t["output.csv"] = b(&Config::emit_csv);
        t["output.json"] = b(&Config::emit_json);
        t["output.fields"] = b(&Config::emit_fields);
        return t;
    }();
    return table;
}

const char* kSections[] = {"problem", "grid", "integrator", "harness",
                           "testfn",  "kernel", "decay",     "output"};

void set_key(Config& cfg, const std::string& where, const std::string& full_key,
             const std::string& value) {
    auto it = schema().find(full_key);
    if (it == schema().end()) fail(where, "unknown key '" + full_key + "'");
    it->second(cfg, where, full_key, value);
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "line " + std::to_string(lineno);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail(where, "malformed section header");
            section = trim(body.substr(1, body.size() - 2));
            if (std::find_if(std::begin(kSections), std::end(kSections),
                             [&](const char* s) { return section == s; }) ==
                std::end(kSections))
                fail(where, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(where, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (section.empty()) fail(where, "key '" + key + "' outside any section");
        if (key.empty()) fail(where, "empty key");
        set_key(cfg, where, section + "." + key, value);
    }
    validate_config(cfg);
    return cfg;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void apply_override(Config& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        fail("--set", "expected section.key=value, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    set_key(cfg, "--set " + key, key, value);
}

void validate_config(const Config& cfg) {
    const std::string w = "validation";
    if (cfg.n < 1 || cfg.n > 3) fail(w, "problem.n must be 1, 2, or 3");
    if (cfg.m < 1) fail(w, "problem.m must be >= 1");
    if (!(cfg.p > 1.0)) fail(w, "problem.p: p must exceed 1");
    if (!(cfg.epsilon > 0.0)) fail(w, "problem.epsilon must be positive");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] > 0.0)) fail(w, "problem.eps_list entries must be positive");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
            fail(w, "problem.eps_list must be strictly decreasing");
    }
    if (cfg.u0 != "gaussian" && cfg.u0 != "constant")
        fail(w, "problem.u0 must be 'gaussian' or 'constant'");
    if (!(cfg.u0_width > 0.0)) fail(w, "problem.u0_width must be positive");

    if (cfg.grid_N != 0 && (cfg.grid_N < 16 || !is_power_of_two(cfg.grid_N)))
        fail(w, "grid.N: N must be a power of two (>= 16)");
    if (cfg.grid_L < 0.0) fail(w, "grid.L must be positive (or 0 for auto)");

    if (cfg.scheme != "etdrk4" && cfg.scheme != "etd1")
        fail(w, "integrator.scheme must be 'etdrk4' or 'etd1'");
    if (cfg.dt0 < 0.0) fail(w, "integrator.dt0 must be positive (or 0 for auto)");
    if (!(cfg.dt_min > 0.0)) fail(w, "integrator.dt_min must be positive");
    if (!(cfg.U_max >= 1e6)) fail(w, "integrator.U_max must be >= 1e6");
    if (!(cfg.growth_cap > 1.0 && cfg.growth_cap <= 2.0))
        fail(w, "integrator.growth_cap must lie in (1, 2]");
    if (cfg.t_end < 0.0) fail(w, "integrator.t_end must be positive (or 0 for auto)");
    if (cfg.snapshot_dt < 0.0) fail(w, "integrator.snapshot_dt must be >= 0");
    if (cfg.max_snapshots < 32) fail(w, "integrator.max_snapshots must be >= 32");
    if (cfg.dealias && cfg.p != std::floor(cfg.p))
        fail(w, "integrator.dealias requires integer problem.p");

    if (!(cfg.c_dom > 0.0)) fail(w, "harness.c_dom must be positive");
    if (!(cfg.convergence_tol > 0.0 && cfg.convergence_tol < 1.0))
        fail(w, "harness.convergence_tol must lie in (0, 1)");
    if (cfg.max_doublings < 0 || cfg.max_doublings > 10)
        fail(w, "harness.max_doublings must lie in [0, 10]");
    if (!(cfg.t_end_factor > 0.0)) fail(w, "harness.t_end_factor must be positive");
    if (!(cfg.points_per_width > 0.0)) fail(w, "harness.points_per_width must be positive");
    if (cfg.N_cap < 64 || !is_power_of_two(cfg.N_cap))
        fail(w, "harness.N_cap must be a power of two >= 64");
    if (!(cfg.supercritical_t_end > 0.0))
        fail(w, "harness.supercritical_t_end must be positive");

    for (double R : cfg.R_list)
        if (!(R > 0.0)) fail(w, "testfn.R_list entries must be positive");
    if (cfg.l < 0) fail(w, "testfn.l must be >= 0 (0 picks the minimal admissible)");
    if (!(cfg.R0 > 0.0)) fail(w, "testfn.R0 must be positive");
    if (cfg.resolution < 0) fail(w, "testfn.resolution must be >= 0");
    if (cfg.r_points < 16) fail(w, "testfn.r_points must be >= 16");
    if (cfg.time_cells < 16) fail(w, "testfn.time_cells must be >= 16");

    for (double t : cfg.kernel_t_list)
        if (!(t > 0.0)) fail(w, "kernel.t_list entries must be positive");

    if (!(cfg.decay_p >= 1.0)) fail(w, "decay.p must be >= 1");
    if (!(cfg.decay_q >= cfg.decay_p)) fail(w, "decay.q must be >= decay.p");
    if (!(cfg.decay_t_lo > 0.0 && cfg.decay_t_hi > cfg.decay_t_lo))
        fail(w, "decay window must satisfy 0 < t_lo < t_hi");
    if (!(cfg.decay_t_hi >= 8.0 * cfg.decay_t_lo))
        fail(w, "decay window must span at least a factor of 8");
    if (cfg.decay_points < 4) fail(w, "decay.points must be >= 4");

    if (cfg.out_dir.empty()) fail(w, "output.directory must not be empty");

    // Critical-regime sweeps are capped below: T grows as exp(eps^{-(p-1)}),
    // so very small eps is out of reach at desk scale.
    if (!cfg.eps_list.empty()) {
        const RegimeInfo info = classify_regime(cfg.n, cfg.m, cfg.p);
        if (info.regime == Regime::Critical) {
            for (double e : cfg.eps_list)
                if (e < cfg.eps_cap_critical)
                    fail(w, "problem.eps_list: critical-regime sweeps require eps >= " +
                                format_double(cfg.eps_cap_critical) +
                                " (lower harness.eps_cap_critical to override)");
        }
    }
}

InitialProfile Config::profile() const {
    if (u0 == "constant") return InitialProfile::constant(u0_value);
    return InitialProfile::gaussian(u0_width, u0_mass);
}

DomainPolicy Config::domain_policy() const {
    DomainPolicy p;
    p.c_dom = c_dom;
    p.convergence_tol = convergence_tol;
    p.max_doublings = max_doublings;
    p.t_end_factor = t_end_factor;
    p.points_per_width = points_per_width;
    p.N_cap = N_cap;
    p.supercritical_t_end = supercritical_t_end;
    return p;
}

namespace {
int next_pow2_int(int v) {
    int r = 1;
    while (r < v) r <<= 1;
    return r;
}
}  // namespace

SimParams Config::sim_params() const {
    SimParams params;
    params.m = m;
    params.p = p;
    params.epsilon = epsilon;
    params.u0 = profile();
    params.scheme = scheme == "etd1" ? Scheme::Etd1 : Scheme::Etdrk4;
    params.dt_min = dt_min;
    params.U_max = U_max;
    params.growth_cap = growth_cap;
    params.nonlinear = nonlinear;
    params.dealias = dealias;
    params.snapshot_dt = snapshot_dt;
    params.max_snapshots = max_snapshots;

    const RegimeInfo info = classify_regime(n, m, p);
    double T_pred = supercritical_t_end;
    if (info.regime == Regime::Subcritical)
        T_pred = std::pow(epsilon, *info.theoretical_exponent);
    else if (info.regime == Regime::Critical)
        T_pred = std::exp(std::pow(epsilon, -(p - 1.0)));

    const double width = u0 == "gaussian" ? u0_width : 1.0;
    double L = grid_L;
    if (L <= 0.0)
        L = std::max(c_dom * std::pow(T_pred, 1.0 / (2.0 * m)), 16.0 * width);
    int N = grid_N;
    if (N == 0)
        N = std::clamp(next_pow2_int(static_cast<int>(std::ceil(L * points_per_width / width))),
                       64, N_cap);
    params.grid = make_grid(n, N, L);

    params.t_end = t_end > 0.0 ? t_end : t_end_factor * T_pred;
    params.dt0 = dt0 > 0.0 ? dt0 : std::min(1e-2, 1e-3 * params.t_end);
    if (!(params.dt_min < params.dt0)) params.dt_min = params.dt0 * 1e-10;
    return params;
}

std::string Config::canonical_text() const {
    std::ostringstream out;
    auto fd = [&](double v) { return format_double(v); };
    auto flist = [&](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += format_double(v[i]);
        }
        return s;
    };
    out << "[problem]\n";
    out << "n = " << n << "\n";
    out << "m = " << m << "\n";
    out << "p = " << fd(p) << "\n";
    out << "epsilon = " << fd(epsilon) << "\n";
    if (!eps_list.empty()) out << "eps_list = " << flist(eps_list) << "\n";
    out << "u0 = " << u0 << "\n";
    out << "u0_width = " << fd(u0_width) << "\n";
    out << "u0_mass = " << fd(u0_mass) << "\n";
    out << "u0_value = " << fd(u0_value) << "\n";
    out << "[grid]\n";
    out << "N = " << grid_N << "\n";
    out << "L = " << fd(grid_L) << "\n";
    out << "[integrator]\n";
    out << "scheme = " << scheme << "\n";
    out << "dt0 = " << fd(dt0) << "\n";
    out << "dt_min = " << fd(dt_min) << "\n";
    out << "U_max = " << fd(U_max) << "\n";
    out << "growth_cap = " << fd(growth_cap) << "\n";
    out << "t_end = " << fd(t_end) << "\n";
    out << "nonlinear = " << (nonlinear ? "true" : "false") << "\n";
    out << "dealias = " << (dealias ? "true" : "false") << "\n";
    out << "snapshot_dt = " << fd(snapshot_dt) << "\n";
    out << "max_snapshots = " << max_snapshots << "\n";
    out << "[harness]\n";
    out << "c_dom = " << fd(c_dom) << "\n";
    out << "convergence_tol = " << fd(convergence_tol) << "\n";
    out << "max_doublings = " << max_doublings << "\n";
    out << "t_end_factor = " << fd(t_end_factor) << "\n";
    out << "points_per_width = " << fd(points_per_width) << "\n";
    out << "N_cap = " << N_cap << "\n";
    out << "supercritical_t_end = " << fd(supercritical_t_end) << "\n";
    out << "eps_cap_critical = " << fd(eps_cap_critical) << "\n";
    out << "[testfn]\n";
    out << "R_list = " << flist(R_list) << "\n";
    out << "l = " << l << "\n";
    out << "R0 = " << fd(R0) << "\n";
    out << "resolution = " << resolution << "\n";
    out << "r_points = " << r_points << "\n";
    out << "time_cells = " << time_cells << "\n";
    out << "[kernel]\n";
    out << "t_list = " << flist(kernel_t_list) << "\n";
    out << "[decay]\n";
    out << "p = " << fd(decay_p) << "\n";
    out << "q = " << fd(decay_q) << "\n";
    out << "t_lo = " << fd(decay_t_lo) << "\n";
    out << "t_hi = " << fd(decay_t_hi) << "\n";
    out << "points = " << decay_points << "\n";
    out << "[output]\n";
    out << "directory = " << out_dir << "\n";
    out << "csv = " << (emit_csv ? "true" : "false") << "\n";
    out << "json = " << (emit_json ? "true" : "false") << "\n";
    out << "fields = " << (emit_fields ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace fujitalab
