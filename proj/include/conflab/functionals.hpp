#pragma once

#include <functional>

#include "conflab/sphere.hpp"

namespace conflab {

// F = kSignE * E + kSignLog * (v/n) * log V. These are the signs for which
// dF(phi) = integral of phi (vbar - v_m) dV_u and F(u + c) = F(u); the
// calibration tests in tests/test_functionals.cpp pin them down.
inline constexpr int kSignE = -1;
inline constexpr int kSignLog = -1;

struct FunctionalReport {
    double E = 0.0;
    double F = 0.0;
    double v = 0.0;
    double vbar = 0.0;
    double V = 0.0;
    int sign = kSignE;
};

struct GaussRule {
    Vec nodes;   // on [0, 1]
    Vec weights; // sum to 1
};
GaussRule gauss_legendre(int Q);

double alpha(const SphereConfig& cfg, const Vec& u, const Vec& phi);
double alpha(const GeometryState& g, const Vec& phi);

// Integral of alpha along a path s -> path(s), s in [0,1], with velocity
// dpath(s). Each Gauss node is checked for cone membership.
using PathFn = std::function<Vec(double)>;
double path_energy(const SphereConfig& cfg, const PathFn& path, const PathFn& dpath, int Q = 16,
                   Exec ex = kDefaultExec);

// E[u] along the straight segment s*u.
double energy_E(const SphereConfig& cfg, const Vec& u, int Q = 16, Exec ex = kDefaultExec);

FunctionalReport functional_F(const SphereConfig& cfg, const Vec& u, int Q = 16,
                              Exec ex = kDefaultExec);
// F from a known E (skips the path integral).
FunctionalReport assemble_F(const GeometryState& g, int n, double E);

// The displayed first variation: integral of udot (-v_m + vbar) dV_u.
double first_variation(const SphereConfig& cfg, const Vec& u, const Vec& udot);

// Gradient of F in the v_m-metric: -1 + vbar / v_m.
Vec grad_F(const SphereConfig& cfg, const Vec& u);
Vec grad_F(const GeometryState& g);

// <a, b>_u = integral of a b v_m dV_u.
double vm_inner(const GeometryState& g, const Vec& a, const Vec& b);

// <D a / dt, b>_u along a path with velocity udot, where a_dot = da/dt:
// <a_dot, b>_u - integral of b <L, grad a (x) grad udot> dV_u.
double covariant_pairing(const SphereConfig& cfg, const Vec& u, const Vec& udot, const Vec& a,
                         const Vec& a_dot, const Vec& b);

} // namespace conflab
