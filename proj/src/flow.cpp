#include <algorithm>
#include <cmath>
#include <limits>

#include "conflab/errors.hpp"
#include "conflab/flows.hpp"
#include "conflab/inequalities.hpp"

namespace conflab {

namespace {

double vbar_of(const GeometryState& g) { return total_v(g) / volume(g); }

double sup_abs(const Vec& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

double default_cfl(const SphereConfig& cfg, double c) { return c > 0.0 ? c : 0.4 / cfg.m; }

Vec reciprocal(const Vec& v) {
    Vec r(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = 1.0 / v[j];
    return r;
}

} // namespace

double flow_cfl_dt(const SphereConfig& cfg, const GeometryState& g, double c_cfl) {
    const double h = cfg.h();
    const double vbar = vbar_of(g);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.vm.size(); ++j) {
        const double diff = vbar * std::max(g.l_rad[j], g.l_tan[j]) * std::exp(2.0 * g.u[j]);
        best = std::min(best, g.vm[j] * g.vm[j] / diff);
    }
    return c_cfl * h * h * best;
}

Vec flow_rhs(const GeometryState& g) {
    const double vbar = vbar_of(g);
    Vec r(g.vm.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = 1.0 - vbar / g.vm[j];
    return r;
}

double entropy(const GeometryState& g) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.vm.size(); ++j) {
        if (!(g.vm[j] > 0.0)) throw ConeError("entropy: v_m not positive");
        s += g.w[j] * g.vm[j] * std::log(g.vm[j]);
    }
    return s;
}

double entropy_rate(const SphereConfig& cfg, const GeometryState& g) {
    const FluxOperator S = FluxOperator(cfg, g.u).scaled(g.vm);
    const Vec r = reciprocal(g.vm);
    return -vbar_of(g) * S.pairing(r, r);
}

double entropy_rate_unweighted(const SphereConfig& cfg, const GeometryState& g) {
    const FluxOperator S(cfg, g.u);
    const Vec r = reciprocal(g.vm);
    return -vbar_of(g) * S.pairing(r, r);
}

double flow_d2F(const SphereConfig& cfg, const GeometryState& g) {
    const double vbar = vbar_of(g);
    return 2.0 * vbar * vbar * vbar * andrews_gap(g, andrews_operator(cfg, g), reciprocal(g.vm), cfg.n());
}

namespace {

struct Stage {
    GeometryState g;
    Vec k;
};

bool make_stage(const SphereConfig& cfg, const Vec& u, Stage& s) {
    try {
        s.g = geometry_state(cfg, u);
    } catch (const NumericalError&) {
        return false;
    }
    if (!in_cone_Cm(s.g)) return false;
    s.k = flow_rhs(s.g);
    return true;
}

double alpha_unchecked(const GeometryState& g, const Vec& phi) {
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * g.vm[j] * g.w[j];
    return s;
}

// One RK4 step from the stage-1 data s1. On success u holds the new state
// and dE the RK4 quadrature of alpha(u_t) over the step.
bool rk4_flow(const SphereConfig& cfg, Vec& u, const Stage& s1, double dt, double& dE) {
    const std::size_t N = u.size();
    Vec ut(N);
    Stage s2, s3, s4;
    for (std::size_t j = 0; j < N; ++j) ut[j] = u[j] + 0.5 * dt * s1.k[j];
    if (!make_stage(cfg, ut, s2)) return false;
    for (std::size_t j = 0; j < N; ++j) ut[j] = u[j] + 0.5 * dt * s2.k[j];
    if (!make_stage(cfg, ut, s3)) return false;
    for (std::size_t j = 0; j < N; ++j) ut[j] = u[j] + dt * s3.k[j];
    if (!make_stage(cfg, ut, s4)) return false;
    Vec du(N);
    for (std::size_t j = 0; j < N; ++j) du[j] = dt / 6.0 * (s1.k[j] + 2.0 * s2.k[j] + 2.0 * s3.k[j] + s4.k[j]);
    // E changes by the integral of alpha along the straight step; the stage
    // values are not a faithful quadrature of that for stiff modes.
    dE = 0.0;
    const double off = 0.5 / std::sqrt(3.0);
    for (double sq : {0.5 - off, 0.5 + off}) {
        for (std::size_t j = 0; j < N; ++j) ut[j] = u[j] + sq * du[j];
        try {
            dE += 0.5 * alpha_unchecked(geometry_state(cfg, ut), du);
        } catch (const NumericalError&) {
            return false;
        }
    }
    for (std::size_t j = 0; j < N; ++j) u[j] += du[j];
    return true;
}

MonitorRow flow_row(const SphereConfig& cfg, const GeometryState& g, const Vec& k, double t, double E,
                    double dt) {
    MonitorRow row;
    row.t = t;
    row.F = assemble_F(g, cfg.n(), E).F;
    row.momentum = alpha_unchecked(g, k);
    double s2 = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) s2 += k[j] * k[j] * g.vm[j] * g.w[j];
    row.speed2 = s2;
    row.entropy = entropy(g);
    row.min_vm = g.min_vm();
    row.min_L = g.min_L();
    row.dt = dt;
    return row;
}

} // namespace

FlowResult inverse_flow(const SphereConfig& cfg, const Vec& u0, const FlowOptions& opt) {
    cfg.validate();
    if (u0.size() != static_cast<std::size_t>(cfg.N)) throw ArgumentError("inverse_flow: length mismatch");
    const double c_cfl = default_cfl(cfg, opt.c_cfl);
    const int every = std::max(1, opt.record_every);

    FlowResult res;
    Vec u = u0;
    Stage s1;
    if (!make_stage(cfg, u, s1)) throw ConeError("inverse_flow: initial state outside the cone");
    double E = energy_E(cfg, u, opt.Q, Exec::serial);
    double t = 0.0;
    res.residual0 = sup_abs(s1.k);

    auto record = [&](double dt) {
        res.trace.rows.push_back(flow_row(cfg, s1.g, s1.k, t, E, dt));
        res.d2F.push_back(flow_d2F(cfg, s1.g));
        res.entropy_rate.push_back(entropy_rate(cfg, s1.g));
        res.entropy_rate_unweighted.push_back(entropy_rate_unweighted(cfg, s1.g));
        if (opt.keep_snapshots) res.snapshots.push_back({t, u, s1.k});
    };

    long k = 0;
    double last_dt = 0.0;
    bool recorded_last = false;
    for (;;) {
        const double residual = sup_abs(s1.k);
        res.residual = residual;
        if (residual <= opt.stationarity_tol) {
            res.status = RunStatus::stationary;
            break;
        }
        if (t >= opt.T) break;
        if (k >= opt.max_steps) {
            res.status = RunStatus::stiffness;
            break;
        }
        double dt = flow_cfl_dt(cfg, s1.g, c_cfl);
        if (!(dt >= 1e-12)) {
            res.status = RunStatus::stiffness;
            break;
        }
        if (k % every == 0) {
            record(dt);
            recorded_last = true;
        } else {
            recorded_last = false;
        }
        if (t + dt > opt.T) dt = opt.T - t;
        Vec un = u;
        double dE = 0.0;
        if (!rk4_flow(cfg, un, s1, dt, dE)) {
            res.status = RunStatus::cone_exit;
            break;
        }
        Stage next;
        if (!make_stage(cfg, un, next)) {
            res.status = RunStatus::cone_exit;
            break;
        }
        u = std::move(un);
        s1 = std::move(next);
        E += dE;
        t = (t + dt >= opt.T) ? opt.T : t + dt;
        last_dt = dt;
        ++k;
        if (opt.recheck_E_every > 0 && k % opt.recheck_E_every == 0) {
            const double Ep = energy_E(cfg, u, opt.Q, Exec::serial);
            res.max_E_recheck = std::max(res.max_E_recheck, std::abs(Ep - E));
        }
        recorded_last = false;
    }
    if (!recorded_last) record(last_dt);
    res.t_end = t;
    res.steps = k;
    res.u_final = u;
    return res;
}

EntropyReport entropy_monitor(const SphereConfig& cfg, const FlowResult& run, double eps_tol) {
    EntropyReport rep;
    const auto& rows = run.trace.rows;
    (void)cfg;
    if (run.entropy_rate.size() != rows.size())
        throw ArgumentError("entropy_monitor: flow result lacks per-row entropy rates");
    rep.nonincreasing = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].entropy - rows[k - 1].entropy > eps_tol) rep.nonincreasing = false;
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        const double hm = rows[k].t - rows[k - 1].t;
        const double hp = rows[k + 1].t - rows[k].t;
        if (!(hm > 0.0) || !(hp > 0.0)) continue;
        const double fm = rows[k - 1].entropy, f0 = rows[k].entropy, fp = rows[k + 1].entropy;
        const double fd = (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
        EntropyRow r;
        r.t = rows[k].t;
        r.fd = fd;
        r.analytic = run.entropy_rate[k];
        r.unweighted = run.entropy_rate_unweighted[k];
        rep.rows.push_back(r);
    }
    double scale = 0.0;
    rep.max_analytic = -std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) {
        scale = std::max(scale, std::abs(r.analytic));
        rep.max_analytic = std::max(rep.max_analytic, r.analytic);
        rep.max_abs_dev = std::max(rep.max_abs_dev, std::abs(r.fd - r.analytic));
    }
    rep.max_rel_dev = scale > 0.0 ? rep.max_abs_dev / scale : rep.max_abs_dev;
    return rep;
}

double path_length(const SphereConfig& cfg, const std::vector<Vec>& members) {
    const std::size_t S = members.size();
    if (S < 3) throw ArgumentError("path_length: need at least three members");
    const double ds = 1.0 / static_cast<double>(S - 1);
    const std::size_t N = members[0].size();
    Vec speed(S);
    for (std::size_t i = 0; i < S; ++i) {
        Vec du(N);
        for (std::size_t j = 0; j < N; ++j) {
            if (i == 0)
                du[j] = (4.0 * (members[1][j] - members[0][j]) - (members[2][j] - members[0][j])) / (2.0 * ds);
            else if (i == S - 1)
                du[j] = ((members[S - 3][j] - members[S - 1][j]) - 4.0 * (members[S - 2][j] - members[S - 1][j])) /
                        (2.0 * ds);
            else
                du[j] = (members[i + 1][j] - members[i - 1][j]) / (2.0 * ds);
        }
        const GeometryState g = geometry_state(cfg, members[i]);
        speed[i] = std::sqrt(std::max(0.0, vm_inner(g, du, du)));
    }
    double ell = 0.0;
    for (std::size_t i = 0; i < S; ++i) ell += (i == 0 || i == S - 1 ? 0.5 : 1.0) * speed[i];
    return ell * ds;
}

LengthReport length_monotonicity(const SphereConfig& cfg, const std::function<Vec(double)>& family,
                                 const LengthOptions& opt, double eps_tol) {
    cfg.validate();
    if (opt.S < 3) throw ArgumentError("length_monotonicity: need at least three members");
    const int S = opt.S;
    const double c_cfl = default_cfl(cfg, opt.c_cfl);
    std::vector<Vec> u(static_cast<std::size_t>(S));
    std::vector<Stage> st(static_cast<std::size_t>(S));
    for (int i = 0; i < S; ++i) {
        u[static_cast<std::size_t>(i)] = family(static_cast<double>(i) / (S - 1));
        if (!make_stage(cfg, u[static_cast<std::size_t>(i)], st[static_cast<std::size_t>(i)]))
            throw ConeError("length_monotonicity: family member outside the cone");
    }
    LengthReport rep;
    rep.eps_tol = eps_tol;
    auto record = [&](double t) {
        rep.t.push_back(t);
        rep.ell.push_back(path_length(cfg, u));
    };
    double t = 0.0;
    long k = 0;
    record(0.0);
    const bool par = opt.exec == Exec::parallel;
    while (t < opt.T) {
        double dt = std::numeric_limits<double>::infinity();
        double resid = 0.0;
        for (const auto& s : st) {
            dt = std::min(dt, flow_cfl_dt(cfg, s.g, c_cfl));
            resid = std::max(resid, sup_abs(s.k));
        }
        if (resid == 0.0) break;
        if (!(dt >= 1e-12)) {
            rep.status = RunStatus::stiffness;
            break;
        }
        if (t + dt > opt.T) dt = opt.T - t;
        int failed = 0;
#pragma omp parallel for if (par) schedule(static) reduction(+ : failed)
        for (int i = 0; i < S; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            Vec un = u[ii];
            double dE = 0.0;
            Stage next;
            if (!rk4_flow(cfg, un, st[ii], dt, dE) || !make_stage(cfg, un, next)) {
                ++failed;
                continue;
            }
            u[ii] = std::move(un);
            st[ii] = std::move(next);
        }
        if (failed > 0) {
            rep.status = RunStatus::cone_exit;
            break;
        }
        t = (t + dt >= opt.T) ? opt.T : t + dt;
        ++k;
        if (k % std::max(1, opt.record_every) == 0 || t >= opt.T) record(t);
    }
    rep.max_increase = 0.0;
    for (std::size_t i = 1; i < rep.ell.size(); ++i)
        rep.max_increase = std::max(rep.max_increase, rep.ell[i] - rep.ell[i - 1]);
    rep.nonincreasing = rep.max_increase <= eps_tol;
    return rep;
}

} // namespace conflab
