#include <gtest/gtest.h>

#include <cmath>

#include "conflab/errors.hpp"
#include "conflab/flows.hpp"
#include "conflab/inequalities.hpp"

using namespace conflab;

namespace {

Vec cos_k(const SphereConfig& cfg, double a, int k) {
    return sample(cfg, [=](double t) { return a * std::cos(k * t); });
}

Vec admissible_u(const SphereConfig& cfg) {
    return sample(cfg, [](double t) { return 0.03 * std::cos(2 * t) - 0.01 * std::cos(3 * t); });
}

double max_abs(const Vec& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

} // namespace

// ---------------------------------------------------------------- geodesics

TEST(GeodesicRhs, ConstantVelocityAndSign) {
    const SphereConfig cfg(2, 201);
    const Vec u = admissible_u(cfg);
    EXPECT_LE(max_abs(geodesic_rhs(cfg, u, Vec(201, 0.7))), 1e-20);
    for (double x : geodesic_rhs(cfg, u, cos_k(cfg, 0.2, 3))) EXPECT_GE(x, 0.0);
    EXPECT_EQ(max_abs(geodesic_accel(cfg, u, Vec(201, -1.3))), 0.0);
    for (double x : geodesic_accel(cfg, u, cos_k(cfg, 0.2, 3))) EXPECT_GE(x, 0.0);
}

TEST(GeodesicRhs, CellAccelerationApproachesPointwise) {
    double prev = 0.0;
    for (int N : {101, 201, 401}) {
        const SphereConfig cfg(2, N);
        const Vec u = admissible_u(cfg), w = cos_k(cfg, 0.1, 2);
        const Vec a = geodesic_accel(cfg, u, w), r = geodesic_rhs(cfg, u, w);
        double err = 0.0;
        for (int j = N / 8; j < N - N / 8; ++j) err = std::max(err, std::abs(a[static_cast<std::size_t>(j)] - r[static_cast<std::size_t>(j)]));
        if (prev > 0.0) EXPECT_GE(std::log2(prev / err), 1.5);
        prev = err;
    }
}

TEST(CellModel, MassesTelescope) {
    for (int m : {2, 3}) {
        const SphereConfig cfg(m, 101);
        for (const Vec& u : {Vec(101, 0.0), admissible_u(cfg), Vec(101, 0.4)}) {
            const CellModel c = cell_model(cfg, u);
            EXPECT_TRUE(cell_admissible(c));
            double s = 0.0;
            for (double x : c.W) s += x;
            EXPECT_NEAR(s, round_total_v(m), 1e-12 * round_total_v(m));
        }
    }
}

// The acceleration is the Euler-Lagrange equation of 1/2 sum W_j(u) w_j^2:
// W a = 1/2 d/du (sum W w^2) - (dW/du . w) w.
TEST(CellModel, AccelerationIsEulerLagrange) {
    const SphereConfig cfg(2, 41);
    const Vec u = admissible_u(cfg), w = cos_k(cfg, 0.2, 2);
    const std::size_t N = u.size();
    const CellModel c0 = cell_model(cfg, u);
    const double eps = 1e-6;
    std::vector<Vec> dW(N); // dW[i][j] = dW_j / du_i
    for (std::size_t i = 0; i < N; ++i) {
        Vec up = u, um = u;
        up[i] += eps;
        um[i] -= eps;
        const Vec Wp = cell_model(cfg, up).W, Wm = cell_model(cfg, um).W;
        dW[i].resize(N);
        for (std::size_t j = 0; j < N; ++j) dW[i][j] = (Wp[j] - Wm[j]) / (2 * eps);
    }
    const Vec a = geodesic_accel(cfg, u, w);
    for (std::size_t j = 0; j < N; ++j) {
        double force = 0.0, dWdt = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            force += 0.5 * dW[j][i] * w[i] * w[i];
            dWdt += dW[i][j] * w[i];
        }
        const double ref = (force - dWdt * w[j]) / c0.W[j];
        EXPECT_NEAR(a[j], ref, 1e-6 * std::max(1.0, std::abs(ref))) << "node " << j;
    }
}

TEST(GeodesicIvp, ConstantVelocityIsExact) {
    const SphereConfig cfg(2, 101);
    const Vec u0 = admissible_u(cfg);
    GeodesicOptions o;
    o.dt = 1e-2;
    o.monitor_F = false;
    const auto r = geodesic_ivp(cfg, u0, Vec(101, 0.25), o);
    ASSERT_EQ(r.status, RunStatus::ok);
    for (std::size_t j = 0; j < u0.size(); ++j) EXPECT_NEAR(r.u_final[j], u0[j] + 0.25, 1e-14);
}

TEST(GeodesicIvp, Conservation) {
    const SphereConfig cfg(2, 201);
    GeodesicOptions o;
    o.dt = 1e-3;
    o.record_every = 100;
    o.monitor_F = false;
    const auto r = geodesic_ivp(cfg, Vec(201, 0.0), cos_k(cfg, 0.1, 2), o);
    ASSERT_EQ(r.status, RunStatus::ok);
    EXPECT_LE(r.momentum_drift, 1e-8);
    EXPECT_LE(r.speed2_drift, 1e-8);
}

TEST(GeodesicIvp, DriftFallsSixteenfoldPerHalving) {
    const SphereConfig cfg(2, 201);
    double prev_m = 0.0, prev_s = 0.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        GeodesicOptions o;
        o.dt = dt;
        o.monitor_F = false;
        const auto r = geodesic_ivp(cfg, Vec(201, 0.0), cos_k(cfg, 0.1, 2), o);
        if (prev_m > 0.0) {
            EXPECT_NEAR(prev_m / r.momentum_drift, 16.0, 4.0);
            EXPECT_NEAR(prev_s / r.speed2_drift, 16.0, 4.0);
        }
        prev_m = r.momentum_drift;
        prev_s = r.speed2_drift;
    }
}

TEST(GeodesicIvp, ConeExitIsReported) {
    const SphereConfig cfg(2, 101);
    GeodesicOptions o;
    o.dt = 1e-2;
    o.T = 3.0;
    o.monitor_F = false;
    const auto r = geodesic_ivp(cfg, Vec(101, 0.0), cos_k(cfg, 0.6, 3), o);
    EXPECT_EQ(r.status, RunStatus::cone_exit);
    EXPECT_LT(r.exit_time, 3.0);
}

TEST(GeodesicBvp, TrivialCases) {
    const SphereConfig cfg(2, 65);
    const Vec u0 = admissible_u(cfg);
    Vec u1 = u0;
    for (double& x : u1) x += 0.2;
    const auto r = geodesic_bvp(cfg, u0, u1);
    ASSERT_EQ(r.status, RunStatus::ok);
    EXPECT_LE(r.iterations, 1);
    for (double x : r.w0) EXPECT_NEAR(x, 0.2, 1e-12);
    const auto z = geodesic_bvp(cfg, u0, u0);
    ASSERT_EQ(z.status, RunStatus::ok);
    EXPECT_EQ(max_abs(z.w0), 0.0);
}

TEST(GeodesicBvp, RoundToPerturbed) {
    const SphereConfig cfg(2, 101);
    // Much beyond 0.05 the discrete geodesic steepens and shooting breaks down.
    const Vec u1 = cos_k(cfg, 0.05, 2);
    const auto r = geodesic_bvp(cfg, Vec(101, 0.0), u1);
    ASSERT_EQ(r.status, RunStatus::ok);
    EXPECT_LE(r.residual, 1e-8);
    for (std::size_t j = 0; j < u1.size(); ++j) EXPECT_NEAR(r.trajectory.u_final[j], u1[j], 1e-8);
    EXPECT_LE(r.trajectory.speed2_drift, 1e-6);
}

TEST(GeodesicBvp, SerialParallelIdentical) {
    const SphereConfig cfg(2, 49);
    const Vec u0 = admissible_u(cfg), u1 = cos_k(cfg, -0.03, 2);
    BvpOptions a, b;
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    a.monitor_F = b.monitor_F = false;
    EXPECT_EQ(geodesic_bvp(cfg, u0, u1, a).w0, geodesic_bvp(cfg, u0, u1, b).w0);
}

TEST(Convexity, ScalingRayIsFlat) {
    const SphereConfig cfg(2, 101);
    GeodesicOptions o;
    o.dt = 1e-2;
    o.record_every = 5;
    const auto g = geodesic_ivp(cfg, admissible_u(cfg), Vec(101, 0.3), o);
    const auto c = convexity_along_geodesic(cfg, g);
    for (double x : c.d2F) EXPECT_NEAR(x, 0.0, 1e-7);
    EXPECT_TRUE(c.ok);
}

TEST(Convexity, RoundSpherePerturbations) {
    const SphereConfig cfg(2, 101);
    for (const Vec& w : {cos_k(cfg, 0.1, 1), cos_k(cfg, 0.1, 2), cos_k(cfg, 0.05, 3)}) {
        GeodesicOptions o;
        o.dt = 1e-2;
        o.record_every = 1;
        const auto g = geodesic_ivp(cfg, Vec(101, 0.0), w, o);
        ASSERT_EQ(g.status, RunStatus::ok);
        const auto c = convexity_along_geodesic(cfg, g);
        EXPECT_TRUE(c.ok) << c.min_d2F;
        // Second differences agree with (v/V) andrews_gap(u_t).
        double scale = 0.0;
        for (double x : c.identity) scale = std::max(scale, std::abs(x));
        EXPECT_LE(c.max_identity_dev, 1e-3 * std::max(scale, 1e-3));
    }
}

TEST(Convexity, ToleranceFloor) {
    EXPECT_EQ(convexity_tolerance(SphereConfig(2, 401), 1e-3), 1e-6);
    const double h = SphereConfig(2, 101).h();
    EXPECT_DOUBLE_EQ(convexity_tolerance(SphereConfig(2, 101), 1e-2), kConvexityC * (h * h + 1e-4));
    EXPECT_GT(convexity_tolerance(SphereConfig(2, 33), 1.0), 1e-6);
}

// ---------------------------------------------------------------- flow

TEST(InverseFlow, FixedPoints) {
    const SphereConfig cfg(2, 101);
    for (double c : {0.0, 0.4}) {
        const auto r = inverse_flow(cfg, Vec(101, c));
        EXPECT_EQ(r.status, RunStatus::stationary);
        EXPECT_EQ(r.steps, 0);
        EXPECT_LE(r.residual, 1e-12);
    }
}

TEST(InverseFlow, MonotoneAndContracting) {
    const SphereConfig cfg(2, 201);
    FlowOptions o;
    o.T = 0.5;
    const auto r = inverse_flow(cfg, cos_k(cfg, 0.1, 2), o);
    ASSERT_EQ(r.status, RunStatus::ok);
    const auto& rows = r.trace.rows;
    ASSERT_GT(rows.size(), 10u);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LE(rows[k].F - rows[k - 1].F, 1e-10);
        EXPECT_LE(rows[k].entropy - rows[k - 1].entropy, 1e-10);
    }
    EXPECT_LE(r.residual, 0.1 * r.residual0);
    for (double x : r.d2F) EXPECT_GE(x, -1e-8);
    for (double x : r.entropy_rate) EXPECT_LE(x, 1e-12);
}

TEST(InverseFlow, EntropyRateMatchesDifferences) {
    const SphereConfig cfg(2, 201);
    FlowOptions o;
    o.T = 0.2;
    const auto r = inverse_flow(cfg, cos_k(cfg, 0.1, 2), o);
    const auto e = entropy_monitor(cfg, r);
    EXPECT_TRUE(e.nonincreasing);
    EXPECT_LE(e.max_rel_dev, 1e-5);
    EXPECT_LE(e.max_analytic, 0.0);
}

TEST(InverseFlow, EntropyRateRound) {
    const SphereConfig cfg(3, 101);
    const GeometryState g = geometry_state(cfg, Vec(101, 0.0));
    EXPECT_EQ(entropy_rate(cfg, g), 0.0);
    EXPECT_EQ(entropy_rate_unweighted(cfg, g), 0.0);
}

// d/dt F = -vm_inner(grad, grad); d^2/dt^2 F = 2 vbar^3 andrews_gap(1/v_m).
TEST(InverseFlow, SecondDerivativeOfF) {
    const SphereConfig cfg(2, 201);
    FlowOptions o;
    o.T = 0.05;
    const auto r = inverse_flow(cfg, admissible_u(cfg), o);
    const auto& rows = r.trace.rows;
    for (std::size_t k = 1; k + 1 < rows.size(); k += rows.size() / 7) {
        const double hm = rows[k].t - rows[k - 1].t, hp = rows[k + 1].t - rows[k].t;
        const double d2 = 2.0 * (hm * rows[k + 1].F - (hm + hp) * rows[k].F + hp * rows[k - 1].F) / (hm * hp * (hm + hp));
        const double d1 = (rows[k + 1].F - rows[k - 1].F) / (hm + hp);
        EXPECT_NEAR(d1, -rows[k].speed2, 1e-5 * rows[k].speed2);
        EXPECT_NEAR(d2, r.d2F[k], 1e-2 * std::abs(r.d2F[k]));
    }
}

// The discrete 1-form is closed only up to O(h^4), so the flow path and the
// straight path differ by that much.
TEST(InverseFlow, IncrementalEnergyMatchesRecheck) {
    double prev = 0.0;
    for (int N : {51, 101}) {
        const SphereConfig cfg(2, N);
        FlowOptions o;
        o.T = 0.2;
        o.recheck_E_every = 200;
        const auto r = inverse_flow(cfg, cos_k(cfg, 0.1, 2), o);
        EXPECT_LE(r.max_E_recheck, 1e-7 * std::pow(100.0 / (N - 1), 4));
        if (prev > 0.0) EXPECT_GE(prev / r.max_E_recheck, 12.0);
        prev = r.max_E_recheck;
    }
}

TEST(InverseFlow, ReachesStationarity) {
    const SphereConfig cfg(2, 101);
    FlowOptions o;
    o.T = 4.0;
    o.record_every = 50;
    o.stationarity_tol = 1e-6;
    const auto r = inverse_flow(cfg, cos_k(cfg, 0.1, 2), o);
    EXPECT_EQ(r.status, RunStatus::stationary);
    EXPECT_LE(r.residual, 1e-6);
}

// ---------------------------------------------------------------- length

TEST(Length, ConstantFamilyAndQuadrature) {
    const SphereConfig cfg(2, 101);
    EXPECT_EQ(path_length(cfg, std::vector<Vec>(5, admissible_u(cfg))), 0.0);
    const int S = 9;
    std::vector<Vec> fam;
    for (int i = 0; i < S; ++i) fam.push_back(cos_k(cfg, 0.1 * i / (S - 1.0), 2));
    const Vec du = cos_k(cfg, 0.1, 2);
    double ell = 0.0;
    for (int i = 0; i < S; ++i) {
        const double wgt = (i == 0 || i == S - 1) ? 0.5 : 1.0;
        ell += wgt * std::sqrt(vm_inner(geometry_state(cfg, fam[static_cast<std::size_t>(i)]), du, du));
    }
    ell /= (S - 1);
    EXPECT_NEAR(path_length(cfg, fam), ell, 1e-10 * ell);
}

TEST(Length, Monotone) {
    const SphereConfig cfg(2, 101);
    LengthOptions o;
    o.T = 0.3;
    o.S = 9;
    const auto r = length_monotonicity(cfg, [&](double s) { return cos_k(cfg, 0.1 * s, 2); }, o);
    EXPECT_EQ(r.status, RunStatus::ok);
    EXPECT_TRUE(r.nonincreasing);
    EXPECT_LT(r.ell.back(), r.ell.front());
}

TEST(Length, SerialParallelIdentical) {
    const SphereConfig cfg(2, 65);
    LengthOptions a, b;
    a.T = b.T = 0.02;
    a.S = b.S = 5;
    a.exec = Exec::serial;
    b.exec = Exec::parallel;
    auto fam = [&](double s) { return cos_k(cfg, 0.1 * s, 2); };
    EXPECT_EQ(length_monotonicity(cfg, fam, a).ell, length_monotonicity(cfg, fam, b).ell);
}
