#include "conflab/inequalities.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conflab/errors.hpp"

namespace conflab {

namespace {

double variance_term(const GeometryState& g, const Vec& phi) {
    double i1 = 0.0, V = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        i1 += phi[j] * g.w[j];
        V += g.w[j];
    }
    const double mean = i1 / V;
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) s += (phi[j] - mean) * (phi[j] - mean) * g.w[j];
    return s;
}

Vec reciprocal(const Vec& v) {
    Vec r(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = 1.0 / v[j];
    return r;
}

} // namespace

FluxOperator andrews_operator(const SphereConfig& cfg, const GeometryState& g) {
    return FluxOperator(cfg, g.u).scaled(reciprocal(g.vm));
}

double andrews_gap(const GeometryState& g, const FluxOperator& andrews, const Vec& phi, int n) {
    return andrews.pairing(phi, phi) - n * variance_term(g, phi);
}

double andrews_gap(const SphereConfig& cfg, const Vec& u, const Vec& phi) {
    const GeometryState g = geometry_state(cfg, u);
    require_cone(g, "andrews_gap");
    return andrews_gap(g, andrews_operator(cfg, g), phi, cfg.n());
}

double ricci_andrews_gap(const SphereConfig& cfg, const Vec& u, const Vec& phi) {
    const GeometryState g = geometry_state(cfg, u);
    const int n = cfg.n();
    Vec nodal(g.u.size());
    for (std::size_t j = 0; j < nodal.size(); ++j) {
        const double lam_rad = (n - 2) * g.a_rad[j] + g.a_rad[j] + (n - 1) * g.a_tan[j];
        if (!(lam_rad > 0.0))
            throw RicciPositivityError("ricci_andrews_gap: radial Ricci eigenvalue not positive at node " +
                                       std::to_string(j));
        nodal[j] = std::exp(-(n - 2) * g.u[j]) / lam_rad;
    }
    const Vec mf = to_faces(cfg, nodal);
    const Vec tf = face_thetas(cfg);
    Vec q(mf.size());
    const double base = cfg.h() * sphere_area(n - 1);
    for (std::size_t f = 0; f < q.size(); ++f) q[f] = base * std::pow(std::sin(tf[f]), n - 1) * mf[f];
    const FluxOperator R(cfg, std::move(q), g.w);
    return R.pairing(phi, phi) - n / (n - 1.0) * variance_term(g, phi);
}

PointwiseMatrixReport pointwise_matrix_check(const SphereConfig& cfg, const Vec& u, double tol) {
    const GeometryState g = geometry_state(cfg, u);
    const int n = cfg.n(), m = cfg.m;
    PointwiseMatrixReport r;
    r.margin = std::numeric_limits<double>::infinity();
    Vec a(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < g.u.size(); ++j) {
        a[0] = g.a_rad[j];
        std::fill(a.begin() + 1, a.end(), g.a_tan[j]);
        if (!in_positive_cone(m, a))
            throw DomainError("pointwise_matrix_check: node " + std::to_string(j) +
                              " outside the positive cone");
        const Vec lam = ricci_from_schouten(a);
        const double sm = elem_sym(m, a);
        for (int dir = 0; dir < 2; ++dir) {
            const auto i = static_cast<std::size_t>(dir);
            if (!(lam[i] > 0.0))
                throw RicciPositivityError("pointwise_matrix_check: Ricci eigenvalue not positive at node " +
                                           std::to_string(j));
            const double margin = elem_sym_omit(m - 1, i, a) / sm - (n - 1.0) / lam[i];
            if (margin < r.margin) {
                r.margin = margin;
                r.worst_node = static_cast<int>(j);
                r.worst_direction = dir;
            }
        }
    }
    r.ok = r.margin >= -tol;
    return r;
}

double weighted_correlation(const GeometryState& g, const Vec& a, const Vec& b) {
    double V = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        V += g.w[j];
        ma += a[j] * g.w[j];
        mb += b[j] * g.w[j];
    }
    ma /= V;
    mb /= V;
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double x = a[j] - ma, y = b[j] - mb;
        ab += x * y * g.w[j];
        aa += x * x * g.w[j];
        bb += y * y * g.w[j];
    }
    return ab / std::sqrt(aa * bb);
}

QuadraticFormReport in_C_A(const SphereConfig& cfg, const Vec& u, const InCAOptions& opt) {
    const GeometryState g = geometry_state(cfg, u);
    require_cone(g, "in_C_A");
    const int N = cfg.N, n = cfg.n();
    const int M = N - 2;
    const FluxOperator SA = andrews_operator(cfg, g);

    QuadraticFormReport rep;
    rep.eps_tol = opt.eps_tol;
    rep.dense_min = std::numeric_limits<double>::quiet_NaN();

    // A = S_A - n (Mass - w w^T / V) on interior nodes, then
    // B = Mass^{-1/2} A Mass^{-1/2}, a plain symmetric eigenproblem.
    const Vec Sflat = SA.interior_matrix();
    Eigen::VectorXd w(M), sq(M);
    double V = 0.0;
    for (int i = 0; i < M; ++i) {
        w(i) = g.w[static_cast<std::size_t>(i + 1)];
        sq(i) = std::sqrt(w(i));
        V += w(i);
    }
    Eigen::MatrixXd B(M, M);
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < M; ++k) {
            double a = Sflat[static_cast<std::size_t>(i) * static_cast<std::size_t>(M) + static_cast<std::size_t>(k)];
            a -= n * ((i == k ? w(i) : 0.0) - w(i) * w(k) / V);
            B(i, k) = a / (sq(i) * sq(k));
        }
    B = 0.5 * (B + B.transpose());

    // Null direction of constants in these coordinates.
    const Eigen::VectorXd c = sq.normalized();
    auto deflate = [&](Eigen::VectorXd& x) { x -= c.dot(x) * c; };

    // B >= -n on the cone (S_A is positive semidefinite there), so the shift
    // below keeps B - shift positive definite and inverse iteration lands on
    // the smallest eigenvalue.
    const double shift = -(n + 1.0);
    Eigen::MatrixXd Bs = B;
    Bs.diagonal().array() -= shift;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(Bs);
    if (ldlt.info() != Eigen::Success) throw NumericalError("in_C_A: factorization failed");

    Eigen::VectorXd x(M);
    for (int i = 0; i < M; ++i) x(i) = (i + 1.0) / M - 0.5 + 0.1 * std::cos(0.7 * i);
    deflate(x);
    x.normalize();
    double mu = x.dot(B * x);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        Eigen::VectorXd y = ldlt.solve(x);
        deflate(y);
        y.normalize();
        const double mu_new = y.dot(B * y);
        const double res = (B * y - mu_new * y).norm();
        x = y;
        const double change = std::abs(mu_new - mu);
        mu = mu_new;
        if (change <= opt.tol * std::max(1.0, std::abs(mu)) && res <= 1e-6) break;
    }
    rep.iterations = it + 1;
    rep.min_rayleigh = mu;

    Vec z(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < M; ++i) z[static_cast<std::size_t>(i + 1)] = x(i) / sq(i);
    z.front() = pole_extrapolate(z, true);
    z.back() = pole_extrapolate(z, false);
    double zmax = 0.0;
    for (double v : z) zmax = std::max(zmax, std::abs(v));
    // Orient so that the value near the north pole is non-negative.
    const double sgn = z[1] >= 0.0 ? 1.0 : -1.0;
    for (double& v : z) v *= sgn / zmax;
    rep.witness = std::move(z);

    const Vec cosv = sample(cfg, [](double t) { return std::cos(t); });
    rep.equality_gap = andrews_gap(g, SA, cosv, n) / variance_term(g, cosv);

    if (opt.dense_cross_check) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(M, M) - c * c.transpose();
        Eigen::MatrixXd Bp = P * B * P + (1e3 * (n + 1.0)) * c * c.transpose();
        Bp = 0.5 * (Bp + Bp.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bp, Eigen::EigenvaluesOnly);
        rep.dense_min = es.eigenvalues()(0);
    }

    try {
        const PointwiseMatrixReport pw = pointwise_matrix_check(cfg, u);
        rep.pointwise_ok = pw.ok;
        rep.pointwise_margin = pw.margin;
    } catch (const DomainError&) {
        if (!opt.tolerate_pointwise_errors) throw;
        rep.pointwise_ok = false;
        rep.pointwise_margin = -std::numeric_limits<double>::infinity();
    }
    rep.member = rep.min_rayleigh >= -opt.eps_tol;
    return rep;
}

} // namespace conflab
