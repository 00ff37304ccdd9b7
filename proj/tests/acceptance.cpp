// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "conflab/errors.hpp"
#include "conflab/experiments.hpp"
#include "conflab/flows.hpp"
#include "conflab/inequalities.hpp"
#include "conflab/symmfunc.hpp"

using namespace conflab;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
    bool pass = false;
    std::string detail;
};

Vec cos_k(const SphereConfig& cfg, double a, int k) {
    return sample(cfg, [=](double t) { return a * std::cos(k * t); });
}

Verdict conformal_invariance() {
    bool ok = true;
    std::string d;
    for (int m : {2, 3}) {
        ExperimentConfig c;
        c.general.m = m;
        c.general.seed = kSeed;
        c.invariance.N = 401;
        c.invariance.samples = 20;
        c.invariance.amplitude = 0.5;
        c.invariance.tol = 1e-4;
        c.invariance.min_order = 1.9;
        const auto r = cmd_invariance(c);
        double worst_c = 0.0;
        for (const auto& s : r.summary["samples"]) worst_c = std::max(worst_c, s["rel_err"].get<double>());
        const double order = r.summary["order"].is_null() ? 0.0 : r.summary["order"].get<double>();
        ok = ok && r.exit_code == kExitPass && worst_c <= 1e-4 && order >= 1.9;
        d += fmt::format("n={}: max rel err {:.2e} at N=401, order {:.2f}; ", 2 * m, worst_c, order);
    }
    return {ok, d};
}

Verdict alpha_exact() {
    bool ok = true;
    std::string d;
    for (int m : {2, 3}) {
        const SphereConfig cfg(m, 401);
        const Vec u = sample(cfg, [](double t) { return 0.05 * std::cos(2 * t) + 0.02 * std::cos(3 * t) - 0.02 * std::cos(t); });
        const Vec bump = cos_k(cfg, 0.03, 4);
        auto scaled = [&](double a, double b) {
            return [=, &u](double s) { Vec r = u; for (double& x : r) x *= a + b * s; return r; };
        };
        auto constant = [&](double b) {
            return [=, &u](double) { Vec r = u; for (double& x : r) x *= b; return r; };
        };
        const double straight = energy_E(cfg, u, 16);
        const double two_leg = path_energy(cfg, scaled(0.0, 0.5), constant(0.5), 16) +
                               path_energy(cfg, scaled(0.5, 0.5), constant(0.5), 16);
        const double curved = path_energy(
            cfg,
            [&](double s) { Vec r(u.size()); for (std::size_t j = 0; j < r.size(); ++j) r[j] = s * s * u[j] + s * (1 - s) * bump[j]; return r; },
            [&](double s) { Vec r(u.size()); for (std::size_t j = 0; j < r.size(); ++j) r[j] = 2 * s * u[j] + (1 - 2 * s) * bump[j]; return r; },
            24);
        const double dev = std::max({std::abs(two_leg - straight), std::abs(curved - straight), std::abs(curved - two_leg)});
        const double q8 = std::abs(energy_E(cfg, u, 8) - straight);
        ok = ok && dev <= 1e-8 && q8 <= 1e-9;
        d += fmt::format("n={}: E={:.10f}, max path deviation {:.2e}, Q=8 vs 16 {:.1e}; ", 2 * m, straight, dev, q8);
    }
    return {ok, d};
}

Verdict geodesic_conservation() {
    const SphereConfig cfg(2, 201);
    const Vec u0(201, 0.0), w0 = cos_k(cfg, 0.1, 2);
    GeodesicOptions o;
    o.T = 1.0;
    o.dt = 1e-3;
    o.record_every = 100;
    o.monitor_F = false;
    const auto r = geodesic_ivp(cfg, u0, w0, o);
    bool ok = r.status == RunStatus::ok && r.momentum_drift <= 1e-8 && r.speed2_drift <= 1e-8;
    std::string d = fmt::format("dt=1e-3: momentum drift {:.2e}, speed2 drift {:.2e}; halving ratios", r.momentum_drift,
                                r.speed2_drift);
    double pm = 0.0, ps = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        o.dt = dt;
        const auto q = geodesic_ivp(cfg, u0, w0, o);
        if (pm > 0.0) {
            const double rm = pm / q.momentum_drift, rs = ps / q.speed2_drift;
            ok = ok && rm >= 12.0 && rm <= 20.0 && rs >= 12.0 && rs <= 20.0;
            d += fmt::format(" {:.1f}/{:.1f}", rm, rs);
        }
        pm = q.momentum_drift;
        ps = q.speed2_drift;
    }
    return {ok, d};
}

Verdict geodesic_convexity() {
    const SphereConfig cfg(2, 101);
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity(), tol = 0.0;
    int converged = 0, members = 0;
    for (int i = 0; i < 10; ++i) {
        const auto k = static_cast<std::uint64_t>(i);
        const Vec ua = random_profile(cfg, 0.05, 3, kSeed, 2 * k, true);
        const Vec ub = random_profile(cfg, 0.05, 3, kSeed, 2 * k + 1, true);
        members += in_C_A(cfg, ua).member && in_C_A(cfg, ub).member;
        const auto b = geodesic_bvp(cfg, ua, ub);
        if (b.status != RunStatus::ok) {
            ok = false;
            continue;
        }
        ++converged;
        const auto c = convexity_along_geodesic(cfg, b.trajectory);
        worst = std::min(worst, c.min_d2F);
        tol = c.eps_tol;
        ok = ok && c.ok;
    }
    ok = ok && members == 10;
    return {ok, fmt::format("{}/10 BVPs converged, {}/10 endpoint pairs in C_A, min second difference {:.3e} (tolerance -{:.1e})",
                            converged, members, worst, tol)};
}

Verdict flow_monotonicity() {
    const SphereConfig cfg(2, 201);
    bool ok = true;
    double worst_dF = -1.0, worst_dS = -1.0, worst_rel = 0.0;
    const double eps_tol = 1e-9;
    for (int s = 0; s < 10; ++s) {
        const Vec u0 = s == 0 ? cos_k(cfg, 0.1, 2) : random_profile(cfg, 0.1, 3, kSeed, static_cast<std::uint64_t>(s), true);
        FlowOptions o;
        o.T = 0.25;
        const auto r = inverse_flow(cfg, u0, o);
        if (r.status == RunStatus::cone_exit) ok = false;
        const auto& rows = r.trace.rows;
        for (std::size_t k = 1; k < rows.size(); ++k) {
            worst_dF = std::max(worst_dF, rows[k].F - rows[k - 1].F);
            worst_dS = std::max(worst_dS, rows[k].entropy - rows[k - 1].entropy);
        }
        const auto e = entropy_monitor(cfg, r, eps_tol);
        worst_rel = std::max(worst_rel, e.max_rel_dev);
        ok = ok && e.nonincreasing && e.max_analytic <= 0.0;
    }
    ok = ok && worst_dF <= eps_tol && worst_dS <= eps_tol && worst_rel <= 1e-5;
    return {ok, fmt::format("10 starts, N=201: max step change F {:.2e}, entropy {:.2e}; entropy rate vs differences {:.2e} relative",
                            worst_dF, worst_dS, worst_rel)};
}

Verdict stationarity() {
    bool ok = true;
    std::string d;
    for (int m : {2, 3}) {
        const SphereConfig cfg(m, 101);
        for (int s = 0; s < 3; ++s) {
            const Vec u0 = s == 0 ? cos_k(cfg, 0.1, 2) : random_profile(cfg, 0.1, 3, kSeed, static_cast<std::uint64_t>(100 + s), true);
            FlowOptions o;
            o.T = 8.0;
            o.record_every = 100;
            o.stationarity_tol = 1e-6;
            const auto r = inverse_flow(cfg, u0, o);
            const bool reached = r.status == RunStatus::stationary && r.residual <= 1e-6;
            const bool reported_exit = r.status == RunStatus::cone_exit;
            ok = ok && (reached || reported_exit);
            d += fmt::format("n={} start {}: {} at t={:.3f} residual {:.1e}; ", 2 * m, s, to_string(r.status), r.t_end, r.residual);
        }
    }
    return {ok, d};
}

Verdict inequality_fuzz() {
    bool ok = true;
    std::string d;
    for (int n : {4, 6, 8}) {
        const auto cr = fuzz_croosh(n, 100000, stream_seed(kSeed, static_cast<std::uint64_t>(n)));
        const auto mr = fuzz_matrix_rearrangement(n, 100000, stream_seed(kSeed, 10u + static_cast<std::uint64_t>(n)));
        const auto ml = fuzz_maclaurin(n, 100000, stream_seed(kSeed, 20u + static_cast<std::uint64_t>(n)));
        const auto eq = croosh_inequality(Vec(static_cast<std::size_t>(n), 0.5), 0);
        const bool eq_ok = std::abs(eq.lhs - eq.rhs) <= 1e-12 * std::max(1.0, eq.lhs);
        ok = ok && cr.violations == 0 && mr.violations == 0 && ml.violations == 0 && eq_ok && cr.samples == 100000;
        if (n == 4) ok = ok && std::abs(eq.lhs - 4.5) <= 1e-12 && std::abs(eq.rhs - 4.5) <= 1e-12;
        d += fmt::format("n={}: violations {}/{}/{} (worst {:.1e}), equality {}={}; ", n, cr.violations, mr.violations,
                         ml.violations, cr.worst, eq.lhs, eq.rhs);
    }
    const auto vi = fuzz_vieta(100000, stream_seed(kSeed, 99), 8);
    ok = ok && vi.violations == 0;
    d += fmt::format("vieta violations {} (worst {:.1e})", vi.violations, vi.worst);
    return {ok, d};
}

Verdict andrews_equality() {
    const SphereConfig cfg(2, 401);
    const Vec zero(401, 0.0), c1 = cos_k(cfg, 1.0, 1);
    const double gap = andrews_gap(cfg, zero, c1);
    InCAOptions o;
    o.dense_cross_check = true;
    const auto r = in_C_A(cfg, zero, o);
    const double corr = std::abs(weighted_correlation(geometry_state(cfg, zero), r.witness, c1));
    return {std::abs(gap) <= 1e-6 && corr >= 0.999,
            fmt::format("gap(cos) {:.2e}, witness correlation {:.8f}, min Rayleigh {:.2e}", gap, corr, r.min_rayleigh)};
}

Verdict inclusion() {
    bool ok = true;
    int tested = 0, passed = 0;
    double worst_rayleigh = std::numeric_limits<double>::infinity(), worst_margin = std::numeric_limits<double>::infinity();
    for (int m : {2, 3}) {
        const SphereConfig cfg(m, 201);
        std::vector<Vec> cases{Vec(201, 0.0), Vec(201, 0.6)};
        for (int i = 0; i < 10; ++i) cases.push_back(random_profile(cfg, 0.1, 3, kSeed, 500u + static_cast<std::uint64_t>(i), true));
        for (const Vec& u : cases) {
            const auto r = in_C_A(cfg, u);
            ++tested;
            passed += r.member && r.pointwise_ok;
            worst_rayleigh = std::min(worst_rayleigh, r.min_rayleigh);
            worst_margin = std::min(worst_margin, r.pointwise_margin);
            ok = ok && r.member && r.pointwise_ok;
        }
    }
    return {ok, fmt::format("{}/{} metrics pass both checks; min Rayleigh {:.2e}, min pointwise margin {:.2e}", passed, tested,
                            worst_rayleigh, worst_margin)};
}

Verdict length_monotone() {
    const SphereConfig cfg(2, 101);
    LengthOptions o;
    o.T = 1.0;
    o.S = 17;
    const double eps_tol = 1e-9;
    const auto r = length_monotonicity(cfg, [&](double s) { return cos_k(cfg, 0.1 * s, 2); }, o, eps_tol);
    return {r.status == RunStatus::ok && r.nonincreasing,
            fmt::format("{} samples, ell {:.6f} -> {:.6f}, max increase {:.2e}", r.ell.size(), r.ell.front(), r.ell.back(),
                        r.max_increase)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"conformal invariance", conformal_invariance},
        {"exactness of alpha", alpha_exact},
        {"geodesic conservation", geodesic_conservation},
        {"geodesic convexity", geodesic_convexity},
        {"flow monotonicity", flow_monotonicity},
        {"stationarity target", stationarity},
        {"inequality fuzzing", inequality_fuzz},
        {"Andrews equality case", andrews_equality},
        {"cone inclusion in C_A", inclusion},
        {"length monotonicity", length_monotone},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !v.pass;
        fmt::print("{} {:>2} {}: {} [{:.1f}s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail, secs);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures ? 1 : 0;
}
