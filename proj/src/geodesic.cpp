#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "conflab/errors.hpp"
#include "conflab/flows.hpp"
#include "conflab/inequalities.hpp"

namespace conflab {

const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::stationary: return "stationary";
    case RunStatus::cone_exit: return "cone_exit";
    case RunStatus::stiffness: return "stiffness";
    case RunStatus::no_convergence: return "no_convergence";
    }
    return "unknown";
}

namespace {

// Coefficients of G(p) = integral_0^p ((1 - q^2)/2)^{m-1} dq in odd powers:
// G(p) = sum_k g[k] p^{2k+1}.
Vec G_coefficients(int m) {
    Vec g(static_cast<std::size_t>(m));
    const double scale = std::pow(0.5, m - 1);
    for (int k = 0; k < m; ++k)
        g[static_cast<std::size_t>(k)] = binomial(m - 1, k) * ((k % 2) ? -1.0 : 1.0) * scale / (2 * k + 1);
    return g;
}

double G_eval(const Vec& g, double p) {
    const double p2 = p * p;
    double s = 0.0;
    for (std::size_t k = g.size(); k-- > 0;) s = s * p2 + g[k];
    return s * p;
}

double Gprime(int m, double p) { return std::pow(0.5 * (1.0 - p * p), m - 1); }

} // namespace

CellModel cell_model(const SphereConfig& cfg, const Vec& u) {
    const int N = cfg.N, n = cfg.n(), m = cfg.m;
    const double h = cfg.h();
    const double c = sphere_area(n - 1) * binomial(n - 1, m - 1);
    static thread_local int cached_m = -1;
    static thread_local Vec gco;
    if (cached_m != m) {
        gco = G_coefficients(m);
        cached_m = m;
    }
    CellModel cm;
    cm.p.resize(static_cast<std::size_t>(N - 1));
    cm.kappa.resize(static_cast<std::size_t>(N - 1));
    Vec Gf(static_cast<std::size_t>(N + 1));
    Gf.front() = G_eval(gco, 1.0);
    Gf.back() = G_eval(gco, -1.0);
    for (int f = 0; f < N - 1; ++f) {
        const auto k = static_cast<std::size_t>(f);
        const double th = (f + 0.5) * h;
        const double s = std::sin(th);
        const double p = std::cos(th) - s * (u[k + 1] - u[k]) / h;
        cm.p[k] = p;
        cm.kappa[k] = c * Gprime(m, p) * s;
        Gf[k + 1] = G_eval(gco, p);
    }
    cm.W.resize(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const auto k = static_cast<std::size_t>(j);
        cm.W[k] = -c * (Gf[k + 1] - Gf[k]);
    }
    return cm;
}

bool cell_admissible(const CellModel& c) {
    for (double x : c.W)
        if (!(x > 0.0)) return false;
    for (double p : c.p)
        if (!(std::abs(p) < 1.0)) return false;
    return true;
}

Vec geodesic_rhs(const SphereConfig& cfg, const Vec& u, const Vec& w) {
    const GeometryState g = geometry_state(cfg, u);
    require_cone(g, "geodesic_rhs");
    const Derivatives dw = derivatives(cfg, w);
    Vec r(u.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        r[j] = g.l_rad[j] * std::exp(2.0 * u[j]) * dw.d1[j] * dw.d1[j] / g.vm[j];
    return r;
}

namespace {

bool accel_into(const SphereConfig& cfg, const Vec& u, const Vec& w, Vec& a) {
    const CellModel cm = cell_model(cfg, u);
    if (!cell_admissible(cm)) return false;
    const double h = cfg.h();
    a.assign(u.size(), 0.0);
    for (std::size_t f = 0; f + 1 < u.size(); ++f) {
        const double d = w[f + 1] - w[f];
        const double fl = cm.kappa[f] * d * d / (2.0 * h);
        a[f] += fl;
        a[f + 1] += fl;
    }
    for (std::size_t j = 0; j < a.size(); ++j) a[j] /= cm.W[j];
    return true;
}

// One RK4 step of (u, w)' = (w, accel). Returns false if a stage leaves the
// admissible set of the discrete metric.
bool rk4_geodesic(const SphereConfig& cfg, Vec& u, Vec& w, double dt) {
    const std::size_t N = u.size();
    Vec a1, a2, a3, a4, ut(N), wt(N);
    if (!accel_into(cfg, u, w, a1)) return false;
    for (std::size_t j = 0; j < N; ++j) {
        ut[j] = u[j] + 0.5 * dt * w[j];
        wt[j] = w[j] + 0.5 * dt * a1[j];
    }
    const Vec w2 = wt;
    if (!accel_into(cfg, ut, w2, a2)) return false;
    for (std::size_t j = 0; j < N; ++j) {
        ut[j] = u[j] + 0.5 * dt * w2[j];
        wt[j] = w[j] + 0.5 * dt * a2[j];
    }
    const Vec w3 = wt;
    if (!accel_into(cfg, ut, w3, a3)) return false;
    for (std::size_t j = 0; j < N; ++j) {
        ut[j] = u[j] + dt * w3[j];
        wt[j] = w[j] + dt * a3[j];
    }
    const Vec w4 = wt;
    if (!accel_into(cfg, ut, w4, a4)) return false;
    for (std::size_t j = 0; j < N; ++j) {
        u[j] += dt / 6.0 * (w[j] + 2.0 * w2[j] + 2.0 * w3[j] + w4[j]);
        w[j] += dt / 6.0 * (a1[j] + 2.0 * a2[j] + 2.0 * a3[j] + a4[j]);
    }
    return true;
}

double dotW(const Vec& W, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < W.size(); ++j) s += W[j] * a[j] * b[j];
    return s;
}

double sumW(const Vec& W, const Vec& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < W.size(); ++j) s += W[j] * a[j];
    return s;
}

} // namespace

Vec geodesic_accel(const SphereConfig& cfg, const Vec& u, const Vec& w) {
    Vec a;
    if (!accel_into(cfg, u, w, a)) throw ConeError("geodesic_accel: state outside the admissible set");
    return a;
}

GeodesicResult geodesic_ivp(const SphereConfig& cfg, const Vec& u0, const Vec& w0,
                            const GeodesicOptions& opt) {
    cfg.validate();
    if (u0.size() != static_cast<std::size_t>(cfg.N) || w0.size() != u0.size())
        throw ArgumentError("geodesic_ivp: length mismatch");
    if (!(opt.dt > 0.0) || !(opt.T >= 0.0)) throw ArgumentError("geodesic_ivp: bad time step");
    {
        const GeometryState g = geometry_state(cfg, u0);
        require_cone(g, "geodesic_ivp");
        if (!cell_admissible(cell_model(cfg, u0)))
            throw ConeError("geodesic_ivp: initial state outside the discrete cone");
    }
    GeodesicResult res;
    Vec u = u0, w = w0;
    const long steps = std::lround(opt.T / opt.dt);
    const double dt = steps > 0 ? opt.T / static_cast<double>(steps) : opt.dt;
    const int every = std::max(1, opt.record_every);

    auto record = [&](double t) {
        const GeometryState g = geometry_state(cfg, u);
        const CellModel cm = cell_model(cfg, u);
        MonitorRow row;
        row.t = t;
        row.momentum = sumW(cm.W, w);
        row.speed2 = dotW(cm.W, w, w);
        row.entropy = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) row.entropy += g.w[j] * g.vm[j] * std::log(g.vm[j]);
        row.min_vm = g.min_vm();
        row.min_L = g.min_L();
        row.dt = dt;
        row.F = opt.monitor_F ? functional_F(cfg, u, opt.Q, Exec::serial).F
                              : std::numeric_limits<double>::quiet_NaN();
        res.trace.rows.push_back(row);
        res.path.push_back({t, u, w});
    };

    {
        const CellModel cm = cell_model(cfg, u);
        res.momentum0 = sumW(cm.W, w);
        res.speed20 = dotW(cm.W, w, w);
    }
    const double sref = res.speed20 > 0.0 ? res.speed20 : 1.0;
    record(0.0);
    for (long k = 1; k <= steps; ++k) {
        Vec un = u, wn = w;
        bool okstep = rk4_geodesic(cfg, un, wn, dt);
        if (okstep) okstep = in_cone_Cm(geometry_state(cfg, un));
        if (!okstep) {
            res.status = RunStatus::cone_exit;
            res.exit_time = (k - 1) * dt;
            break;
        }
        u = std::move(un);
        w = std::move(wn);
        const CellModel cm = cell_model(cfg, u);
        res.momentum_drift = std::max(res.momentum_drift, std::abs(sumW(cm.W, w) - res.momentum0) / sref);
        res.speed2_drift = std::max(res.speed2_drift, std::abs(dotW(cm.W, w, w) - res.speed20) / sref);
        if (k % every == 0 || k == steps) record(k * dt);
    }
    if (res.status == RunStatus::ok) res.exit_time = opt.T;
    res.u_final = u;
    res.w_final = w;
    return res;
}

bool geodesic_endpoint(const SphereConfig& cfg, const Vec& u0, const Vec& w0, double T, double dt,
                       Vec& out) {
    Vec u = u0, w = w0;
    const long steps = std::max(1L, std::lround(T / dt));
    const double h = T / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k)
        if (!rk4_geodesic(cfg, u, w, h)) return false;
    for (double x : u)
        if (!std::isfinite(x)) return false;
    out = std::move(u);
    return true;
}

BvpResult geodesic_bvp(const SphereConfig& cfg, const Vec& u0, const Vec& u1, const BvpOptions& opt) {
    cfg.validate();
    const int N = cfg.N;
    if (u0.size() != static_cast<std::size_t>(N) || u1.size() != u0.size())
        throw ArgumentError("geodesic_bvp: length mismatch");
    require_cone(geometry_state(cfg, u0), "geodesic_bvp (start)");
    require_cone(geometry_state(cfg, u1), "geodesic_bvp (end)");

    BvpResult res;
    Vec w(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j)
        w[static_cast<std::size_t>(j)] = (u1[static_cast<std::size_t>(j)] - u0[static_cast<std::size_t>(j)]) / opt.T;

    auto residual_of = [&](const Vec& wv, Vec& r) {
        Vec end;
        if (!geodesic_endpoint(cfg, u0, wv, opt.T, opt.dt, end)) return false;
        r.resize(end.size());
        for (std::size_t j = 0; j < end.size(); ++j) r[j] = end[j] - u1[j];
        return true;
    };
    auto supnorm = [](const Vec& r) {
        double s = 0.0;
        for (double x : r) s = std::max(s, std::abs(x));
        return s;
    };

    Vec r;
    if (!residual_of(w, r)) {
        res.status = RunStatus::cone_exit;
        return res;
    }
    double rn = supnorm(r);
    int it = 0;
    while (rn > opt.tol && it < opt.max_iter) {
        ++it;
        Eigen::MatrixXd J(N, N);
        bool jac_ok = true;
        const bool par = opt.exec == Exec::parallel;
#pragma omp parallel for if (par) schedule(dynamic)
        for (int k = 0; k < N; ++k) {
            Vec wk = w;
            const double eps = opt.fd_step * std::max(1.0, std::abs(wk[static_cast<std::size_t>(k)]));
            wk[static_cast<std::size_t>(k)] += eps;
            Vec rk;
            bool ok = false;
            try {
                ok = residual_of(wk, rk);
            } catch (...) {
                ok = false;
            }
            if (!ok) {
#pragma omp atomic write
                jac_ok = false;
                continue;
            }
            for (int j = 0; j < N; ++j)
                J(j, k) = (rk[static_cast<std::size_t>(j)] - r[static_cast<std::size_t>(j)]) / eps;
        }
        if (!jac_ok) break;
        Eigen::VectorXd rhs(N);
        for (int j = 0; j < N; ++j) rhs(j) = -r[static_cast<std::size_t>(j)];
        const Eigen::VectorXd delta = J.partialPivLu().solve(rhs);
        double lambda = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
            Vec wt = w;
            for (int j = 0; j < N; ++j) wt[static_cast<std::size_t>(j)] += lambda * delta(j);
            Vec rt;
            if (residual_of(wt, rt) && supnorm(rt) < rn) {
                w = std::move(wt);
                r = std::move(rt);
                rn = supnorm(r);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    res.iterations = it;
    res.residual = rn;
    res.w0 = w;
    if (rn > opt.tol) {
        res.status = RunStatus::no_convergence;
        return res;
    }
    GeodesicOptions go;
    go.T = opt.T;
    go.dt = opt.dt;
    go.record_every = opt.record_every;
    go.monitor_F = opt.monitor_F;
    res.trajectory = geodesic_ivp(cfg, u0, w, go);
    res.status = res.trajectory.status == RunStatus::ok ? RunStatus::ok : res.trajectory.status;
    return res;
}

double convexity_tolerance(const SphereConfig& cfg, double dt) {
    const double h = cfg.h();
    return std::max(1e-6, kConvexityC * (h * h + dt * dt));
}

ConvexityReport convexity_along_geodesic(const SphereConfig& cfg, const GeodesicResult& traj) {
    ConvexityReport rep;
    const auto& rows = traj.trace.rows;
    if (rows.size() < 3 || traj.path.size() != rows.size())
        throw ArgumentError("convexity_along_geodesic: need at least three monitored snapshots");
    const double step = rows[1].t - rows[0].t;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (!std::isfinite(rows[k].F)) throw ArgumentError("convexity_along_geodesic: F not monitored");
        if (std::abs((rows[k].t - rows[k - 1].t) - step) > 1e-9 * std::max(1.0, step))
            throw ArgumentError("convexity_along_geodesic: snapshots not equally spaced");
    }
    rep.eps_tol = convexity_tolerance(cfg, step);
    rep.min_d2F = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        rep.t.push_back(r.t);
        rep.F.push_back(r.F);
    }
    for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
        const double d2 = (rows[k + 1].F - 2.0 * rows[k].F + rows[k - 1].F) / (step * step);
        const GeometryState g = geometry_state(cfg, traj.path[k].u);
        const double gap = andrews_gap(g, andrews_operator(cfg, g), traj.path[k].w, cfg.n());
        const double id = total_v(g) / volume(g) * gap;
        rep.d2F.push_back(d2);
        rep.identity.push_back(id);
        rep.min_d2F = std::min(rep.min_d2F, d2);
        rep.max_identity_dev = std::max(rep.max_identity_dev, std::abs(d2 - id));
    }
    rep.ok = rep.min_d2F >= -rep.eps_tol;
    return rep;
}

} // namespace conflab
