#include "conflab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "conflab/errors.hpp"

namespace conflab {

using std::numbers::pi;

SphereConfig::SphereConfig(int m_, int N_) : m(m_), N(N_) { validate(); }

void SphereConfig::validate() const {
    if (m < 2) throw ArgumentError("sphere: m must be >= 2 (n = 2m >= 4)");
    if (N < 33 || N % 2 == 0)
        throw ArgumentError("sphere: grid size must be odd and >= 33, got " + std::to_string(N));
}

double SphereConfig::h() const { return pi / (N - 1); }

double SphereConfig::theta(int j) const { return j == N - 1 ? pi : j * h(); }

Vec SphereConfig::thetas() const {
    Vec t(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) t[static_cast<std::size_t>(j)] = theta(j);
    return t;
}

double sphere_area(int k) {
    return 2.0 * std::pow(pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double round_total_v(int m) {
    return binomial(2 * m, m) * std::pow(0.5, m) * sphere_area(2 * m);
}

namespace {

inline int reflect(int k, int N) {
    if (k < 0) return -k;
    if (k > N - 1) return 2 * (N - 1) - k;
    return k;
}

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

// Lagrange weights in z = theta^2 through z_k = (k h)^2, k = 1..3.
// Returns weights for the value at z* (deriv = false) or for d/dtheta at
// theta* = sqrt(z*) (deriv = true).
std::array<double, 3> even_fit_weights(double h, double theta_star, bool deriv) {
    const double z[3] = {h * h, 4 * h * h, 9 * h * h};
    const double zs = theta_star * theta_star;
    std::array<double, 3> wts{};
    for (int k = 0; k < 3; ++k) {
        double den = 1.0;
        for (int l = 0; l < 3; ++l)
            if (l != k) den *= z[k] - z[l];
        double num = 0.0;
        if (!deriv) {
            num = 1.0;
            for (int l = 0; l < 3; ++l)
                if (l != k) num *= zs - z[l];
        } else {
            for (int j = 0; j < 3; ++j) {
                if (j == k) continue;
                double p = 1.0;
                for (int l = 0; l < 3; ++l)
                    if (l != k && l != j) p *= zs - z[l];
                num += p;
            }
            num *= 2.0 * theta_star;
        }
        wts[static_cast<std::size_t>(k)] = num / den;
    }
    return wts;
}

} // namespace

Derivatives derivatives(const SphereConfig& cfg, const Vec& u) {
    cfg.validate();
    const int N = cfg.N;
    if (static_cast<int>(u.size()) != N) throw ArgumentError("derivatives: length mismatch");
    const double h = cfg.h();
    Derivatives d;
    d.d1.assign(static_cast<std::size_t>(N), 0.0);
    d.d2.assign(static_cast<std::size_t>(N), 0.0);
    auto at = [&](int k) { return u[static_cast<std::size_t>(reflect(k, N))]; };
    for (int j = 0; j < N; ++j) {
        const double um2 = at(j - 2), um1 = at(j - 1), u0 = at(j), up1 = at(j + 1), up2 = at(j + 2);
        d.d1[static_cast<std::size_t>(j)] = (8 * (up1 - um1) - (up2 - um2)) / (12 * h);
        d.d2[static_cast<std::size_t>(j)] =
            (16 * ((um1 - u0) + (up1 - u0)) - ((um2 - u0) + (up2 - u0))) / (12 * h * h);
    }
    d.d1.front() = 0.0;
    d.d1.back() = 0.0;
    return d;
}

double GeometryState::min_vm() const { return *std::min_element(vm.begin(), vm.end()); }

double GeometryState::min_L() const {
    return std::min(*std::min_element(l_rad.begin(), l_rad.end()),
                    *std::min_element(l_tan.begin(), l_tan.end()));
}

GeometryState geometry_state(const SphereConfig& cfg, const Vec& u, Exec ex) {
    const Derivatives d = derivatives(cfg, u);
    const int N = cfg.N, n = cfg.n(), m = cfg.m;
    const double h = cfg.h();
    const double area = sphere_area(n - 1);
    const double cr = binomial(n - 1, m - 1), ct = binomial(n - 1, m);
    const double lr0 = binomial(n - 2, m - 2), lr1 = binomial(n - 2, m - 1);

    GeometryState g;
    g.theta = cfg.thetas();
    g.u = u;
    g.d1 = d.d1;
    g.d2 = d.d2;
    const auto sz = static_cast<std::size_t>(N);
    g.a_rad.resize(sz);
    g.a_tan.resize(sz);
    g.vm.resize(sz);
    g.l_rad.resize(sz);
    g.l_tan.resize(sz);
    g.w.resize(sz);

    bool bad = false;
    const bool par = ex == Exec::parallel;
#pragma omp parallel for if (par) schedule(static) reduction(|| : bad)
    for (int j = 0; j < N; ++j) {
        const auto k = static_cast<std::size_t>(j);
        const double th = g.theta[k];
        const double up = g.d1[k], upp = g.d2[k];
        const bool pole = j == 0 || j == N - 1;
        const double cot_up = pole ? upp : std::cos(th) / std::sin(th) * up;
        const double e2u = std::exp(2.0 * u[k]);
        const double ar = e2u * (0.5 + upp + 0.5 * up * up);
        const double at = e2u * (0.5 + cot_up - 0.5 * up * up);
        const double atm1 = ipow(at, m - 1);
        g.a_rad[k] = ar;
        g.a_tan[k] = at;
        g.vm[k] = cr * ar * atm1 + ct * atm1 * at;
        g.l_rad[k] = cr * atm1;
        g.l_tan[k] = lr0 * ar * ipow(at, m - 2) + lr1 * atm1;
        g.w[k] = pole ? 0.0 : area * std::exp(-n * u[k]) * ipow(std::sin(th), n - 1) * h;
        if (!std::isfinite(g.vm[k]) || !std::isfinite(g.w[k]) || !std::isfinite(g.l_tan[k]))
            bad = true;
    }
    if (bad) throw NumericalError("geometry_state: non-finite derived values");
    return g;
}

double integrate(const GeometryState& g, const Vec& f) {
    if (f.size() != g.w.size()) throw ArgumentError("integrate: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g.w[j];
    return s;
}

double total_v(const GeometryState& g) { return integrate(g, g.vm); }

double volume(const GeometryState& g) {
    double s = 0.0;
    for (double x : g.w) s += x;
    return s;
}

double total_v(const SphereConfig& cfg, const Vec& u) { return total_v(geometry_state(cfg, u)); }
double volume(const SphereConfig& cfg, const Vec& u) { return volume(geometry_state(cfg, u)); }
double integrate(const SphereConfig& cfg, const Vec& u, const Vec& f) {
    return integrate(geometry_state(cfg, u), f);
}

bool in_cone_Cm(const GeometryState& g) {
    for (std::size_t j = 0; j < g.vm.size(); ++j)
        if (!(g.vm[j] > 0.0) || !(g.l_rad[j] > 0.0) || !(g.l_tan[j] > 0.0)) return false;
    return true;
}

bool in_cone_Cm(const SphereConfig& cfg, const Vec& u) { return in_cone_Cm(geometry_state(cfg, u)); }

void require_cone(const GeometryState& g, const char* who) {
    for (std::size_t j = 0; j < g.vm.size(); ++j)
        if (!(g.vm[j] > 0.0) || !(g.l_rad[j] > 0.0) || !(g.l_tan[j] > 0.0))
            throw ConeError(std::string(who) + ": state outside the cone at node " +
                            std::to_string(j) + " (vm=" + std::to_string(g.vm[j]) +
                            ", l_rad=" + std::to_string(g.l_rad[j]) +
                            ", l_tan=" + std::to_string(g.l_tan[j]) + ")");
}

StaggeredDiff::StaggeredDiff(const SphereConfig& cfg) {
    cfg.validate();
    const int N = cfg.N;
    const double h = cfg.h();
    idx_.resize(static_cast<std::size_t>(N - 1));
    c_.resize(static_cast<std::size_t>(N - 1));
    for (int r = 0; r < N - 1; ++r) {
        idx_[static_cast<std::size_t>(r)] = {r - 1, r, r + 1, r + 2};
        c_[static_cast<std::size_t>(r)] = {1 / (24 * h), -27 / (24 * h), 27 / (24 * h), -1 / (24 * h)};
    }
    for (int r = 0; r < 2; ++r) {
        const auto wts = even_fit_weights(h, (r + 0.5) * h, true);
        idx_[static_cast<std::size_t>(r)] = {1, 2, 3, 1};
        c_[static_cast<std::size_t>(r)] = {wts[0], wts[1], wts[2], 0.0};
        const auto s = static_cast<std::size_t>(N - 2 - r);
        idx_[s] = {N - 2, N - 3, N - 4, N - 2};
        c_[s] = {-wts[0], -wts[1], -wts[2], 0.0};
    }
    // Rows are applied as differences against their first node, so constants
    // map to exactly zero; the first coefficient is kept consistent for the
    // transpose.
    for (auto& c : c_) c[0] = -(c[1] + c[2] + c[3]);
}

Vec StaggeredDiff::apply(const Vec& phi) const {
    Vec out(idx_.size());
    for (std::size_t f = 0; f < idx_.size(); ++f) {
        const auto& ix = idx_[f];
        const double base = phi[static_cast<std::size_t>(ix[0])];
        double s = 0.0;
        for (std::size_t k = 1; k < 4; ++k) s += c_[f][k] * (phi[static_cast<std::size_t>(ix[k])] - base);
        out[f] = s;
    }
    return out;
}

void StaggeredDiff::apply_transpose_add(const Vec& g, Vec& out) const {
    for (std::size_t f = 0; f < idx_.size(); ++f)
        for (int k = 0; k < 4; ++k)
            out[static_cast<std::size_t>(idx_[f][static_cast<std::size_t>(k)])] += c_[f][static_cast<std::size_t>(k)] * g[f];
}

Vec face_thetas(const SphereConfig& cfg) {
    Vec t(static_cast<std::size_t>(cfg.N - 1));
    for (int f = 0; f < cfg.N - 1; ++f) t[static_cast<std::size_t>(f)] = (f + 0.5) * cfg.h();
    return t;
}

Vec to_faces(const SphereConfig& cfg, const Vec& v) {
    const int N = cfg.N;
    Vec out(static_cast<std::size_t>(N - 1));
    auto at = [&](int k) { return v[static_cast<std::size_t>(reflect(k, N))]; };
    for (int f = 0; f < N - 1; ++f)
        out[static_cast<std::size_t>(f)] = (-at(f - 1) + 9 * at(f) + 9 * at(f + 1) - at(f + 2)) / 16.0;
    return out;
}

double pole_extrapolate(const Vec& v, bool north) {
    // Weights of the even fit at theta = 0 do not depend on h.
    static const std::array<double, 3> w0 = even_fit_weights(1.0, 0.0, false);
    const std::size_t N = v.size();
    if (north) return w0[0] * v[1] + w0[1] * v[2] + w0[2] * v[3];
    return w0[0] * v[N - 2] + w0[1] * v[N - 3] + w0[2] * v[N - 4];
}

FluxOperator::FluxOperator(const SphereConfig& cfg, const Vec& u) : cfg_(cfg), D_(cfg) {
    const int n = cfg.n(), m = cfg.m;
    const double h = cfg.h();
    const Vec up = D_.apply(u);
    const Vec tf = face_thetas(cfg);
    const double base = h * sphere_area(n - 1) * binomial(n - 1, m - 1);
    q_.resize(up.size());
    for (std::size_t f = 0; f < up.size(); ++f) {
        const double s = std::sin(tf[f]);
        const double t = 0.5 + std::cos(tf[f]) / s * up[f] - 0.5 * up[f] * up[f];
        q_[f] = base * ipow(s, n - 1) * ipow(t, m - 1);
    }
    w_ = geometry_state(cfg, u).w;
}

FluxOperator::FluxOperator(const SphereConfig& cfg, Vec face_coef, Vec weights)
    : cfg_(cfg), D_(cfg), q_(std::move(face_coef)), w_(std::move(weights)) {
    if (q_.size() != static_cast<std::size_t>(cfg.N - 1) || w_.size() != static_cast<std::size_t>(cfg.N))
        throw ArgumentError("flux operator: coefficient length mismatch");
}

FluxOperator FluxOperator::scaled(const Vec& nodal) const {
    const Vec mf = to_faces(cfg_, nodal);
    Vec q = q_;
    for (std::size_t f = 0; f < q.size(); ++f) q[f] *= mf[f];
    return FluxOperator(cfg_, std::move(q), w_);
}

Vec FluxOperator::apply(const Vec& phi) const {
    Vec g = D_.apply(phi);
    for (std::size_t f = 0; f < g.size(); ++f) g[f] *= q_[f];
    Vec out(phi.size(), 0.0);
    D_.apply_transpose_add(g, out);
    return out;
}

double FluxOperator::pairing(const Vec& phi, const Vec& psi) const {
    const Vec a = D_.apply(phi);
    const Vec b = D_.apply(psi);
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) s += q_[f] * a[f] * b[f];
    return s;
}

Vec FluxOperator::div_L_grad(const Vec& phi) const {
    const Vec s = apply(phi);
    Vec out(s.size(), 0.0);
    for (std::size_t j = 1; j + 1 < s.size(); ++j) out[j] = -s[j] / w_[j];
    out.front() = pole_extrapolate(out, true);
    out.back() = pole_extrapolate(out, false);
    return out;
}

Vec FluxOperator::interior_matrix() const {
    const int N = cfg_.N;
    const int M = N - 2;
    Vec A(static_cast<std::size_t>(M) * static_cast<std::size_t>(M), 0.0);
    for (std::size_t f = 0; f < q_.size(); ++f) {
        const auto& id = D_.index(f);
        const auto& c = D_.coef(f);
        for (int a = 0; a < 4; ++a) {
            const int ia = id[static_cast<std::size_t>(a)];
            if (ia <= 0 || ia >= N - 1 || c[static_cast<std::size_t>(a)] == 0.0) continue;
            for (int b = 0; b < 4; ++b) {
                const int ib = id[static_cast<std::size_t>(b)];
                if (ib <= 0 || ib >= N - 1 || c[static_cast<std::size_t>(b)] == 0.0) continue;
                A[static_cast<std::size_t>(ia - 1) * static_cast<std::size_t>(M) + static_cast<std::size_t>(ib - 1)] +=
                    q_[f] * c[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(b)];
            }
        }
    }
    return A;
}

double FluxOperator::min_face_coef() const { return *std::min_element(q_.begin(), q_.end()); }

Vec div_L_grad(const SphereConfig& cfg, const Vec& u, const Vec& phi) {
    return FluxOperator(cfg, u).div_L_grad(phi);
}

LinearizationCheck linearization_check(const SphereConfig& cfg, const Vec& u, const Vec& udot,
                                       const Vec& phi, double t) {
    if (!(t > 1e-12)) throw NumericalError("linearization_check: step underflow");
    auto alpha_at = [&](double s) {
        Vec us = u;
        for (std::size_t j = 0; j < us.size(); ++j) us[j] += s * udot[j];
        const GeometryState g = geometry_state(cfg, us);
        Vec f(phi.size());
        for (std::size_t j = 0; j < f.size(); ++j) f[j] = phi[j] * g.vm[j];
        return integrate(g, f);
    };
    LinearizationCheck r;
    r.lhs = (alpha_at(t) - alpha_at(-t)) / (2.0 * t);
    r.rhs = -FluxOperator(cfg, u).pairing(phi, udot);
    r.deviation = std::abs(r.lhs - r.rhs);
    return r;
}

} // namespace conflab
