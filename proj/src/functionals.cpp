#include "conflab/functionals.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "conflab/errors.hpp"

namespace conflab {

GaussRule gauss_legendre(int Q) {
    if (Q < 1 || Q > 128) throw ArgumentError("gauss_legendre: order out of range");
    GaussRule r;
    r.nodes.resize(static_cast<std::size_t>(Q));
    r.weights.resize(static_cast<std::size_t>(Q));
    const auto q = static_cast<unsigned>(Q);
    for (int i = 0; i < Q; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (Q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(q, x);
            const double pm = Q > 1 ? std::legendre(q - 1, x) : 1.0;
            dp = Q * (x * p - pm) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            const double p = std::legendre(q, x);
            const double pm = Q > 1 ? std::legendre(q - 1, x) : 1.0;
            dp = Q * (x * p - pm) / (x * x - 1.0);
        }
        const auto k = static_cast<std::size_t>(Q - 1 - i);
        r.nodes[k] = 0.5 * (x + 1.0);
        r.weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

double alpha(const GeometryState& g, const Vec& phi) {
    require_cone(g, "alpha");
    if (phi.size() != g.vm.size()) throw ArgumentError("alpha: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * g.vm[j] * g.w[j];
    return s;
}

double alpha(const SphereConfig& cfg, const Vec& u, const Vec& phi) {
    return alpha(geometry_state(cfg, u), phi);
}

double path_energy(const SphereConfig& cfg, const PathFn& path, const PathFn& dpath, int Q,
                   Exec ex) {
    const GaussRule rule = gauss_legendre(Q);
    Vec vals(static_cast<std::size_t>(Q), 0.0);
    std::vector<char> outside(static_cast<std::size_t>(Q), 0);
    const bool par = ex == Exec::parallel;
#pragma omp parallel for if (par) schedule(static)
    for (int i = 0; i < Q; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double s = rule.nodes[k];
        try {
            const GeometryState g = geometry_state(cfg, path(s));
            if (!in_cone_Cm(g)) {
                outside[k] = 1;
                continue;
            }
            vals[k] = alpha(g, dpath(s));
        } catch (const std::exception&) {
            outside[k] = 2;
        }
    }
    double E = 0.0;
    for (int i = 0; i < Q; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (outside[k] == 2)
            throw NumericalError("energy: non-finite state at s = " + std::to_string(rule.nodes[k]));
        if (outside[k])
            throw PathError("energy: path leaves the cone at s = " + std::to_string(rule.nodes[k]),
                            rule.nodes[k]);
        E += rule.weights[k] * vals[k];
    }
    return E;
}

double energy_E(const SphereConfig& cfg, const Vec& u, int Q, Exec ex) {
    auto path = [&](double s) {
        Vec p = u;
        for (double& x : p) x *= s;
        return p;
    };
    auto dpath = [&](double) { return u; };
    return path_energy(cfg, path, dpath, Q, ex);
}

FunctionalReport assemble_F(const GeometryState& g, int n, double E) {
    FunctionalReport r;
    r.E = E;
    r.v = total_v(g);
    r.V = volume(g);
    r.vbar = r.v / r.V;
    r.F = kSignE * E + kSignLog * (r.v / n) * std::log(r.V);
    r.sign = kSignE;
    return r;
}

FunctionalReport functional_F(const SphereConfig& cfg, const Vec& u, int Q, Exec ex) {
    const double E = energy_E(cfg, u, Q, ex);
    return assemble_F(geometry_state(cfg, u), cfg.n(), E);
}

double first_variation(const SphereConfig& cfg, const Vec& u, const Vec& udot) {
    const GeometryState g = geometry_state(cfg, u);
    const double vbar = total_v(g) / volume(g);
    double s = 0.0;
    for (std::size_t j = 0; j < udot.size(); ++j) s += udot[j] * (-g.vm[j] + vbar) * g.w[j];
    return s;
}

Vec grad_F(const GeometryState& g) {
    for (std::size_t j = 0; j < g.vm.size(); ++j)
        if (!(g.vm[j] > 0.0))
            throw ConeError("grad_F: v_m not positive at node " + std::to_string(j));
    const double vbar = total_v(g) / volume(g);
    Vec r(g.vm.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = -1.0 + vbar / g.vm[j];
    return r;
}

Vec grad_F(const SphereConfig& cfg, const Vec& u) { return grad_F(geometry_state(cfg, u)); }

double vm_inner(const GeometryState& g, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j] * g.vm[j] * g.w[j];
    return s;
}

double covariant_pairing(const SphereConfig& cfg, const Vec& u, const Vec& udot, const Vec& a,
                         const Vec& a_dot, const Vec& b) {
    const GeometryState g = geometry_state(cfg, u);
    const FluxOperator S(cfg, u);
    const StaggeredDiff D(cfg);
    const Vec da = D.apply(a);
    const Vec du = D.apply(udot);
    const Vec bf = to_faces(cfg, b);
    double corr = 0.0;
    for (std::size_t f = 0; f < da.size(); ++f) corr += S.face_coef()[f] * bf[f] * da[f] * du[f];
    return vm_inner(g, a_dot, b) - corr;
}

} // namespace conflab
