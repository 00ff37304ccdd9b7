#pragma once

#include "conflab/sphere.hpp"

namespace conflab {

// The form whose pairing is integral of v_m^{-1} <L, grad phi (x) grad psi> dV_u.
FluxOperator andrews_operator(const SphereConfig& cfg, const GeometryState& g);

// integral v_m^{-1} <L, grad phi (x) grad phi> dV_u
//   - n [ integral phi^2 dV_u - V_u^{-1} (integral phi dV_u)^2 ].
double andrews_gap(const SphereConfig& cfg, const Vec& u, const Vec& phi);
double andrews_gap(const GeometryState& g, const FluxOperator& andrews, const Vec& phi, int n);

// Andrews' Ricci-weighted form:
//   integral (Rc^{-1})^{ij} phi_i phi_j dV_u - n/(n-1) [variance term].
// Needs positive radial Ricci curvature.
double ricci_andrews_gap(const SphereConfig& cfg, const Vec& u, const Vec& phi);

struct PointwiseMatrixReport {
    bool ok = false;
    double margin = 0.0; // min over nodes and directions of sigma_{m-1;i}/sigma_m - (n-1)/lambda_i
    int worst_node = -1;
    int worst_direction = -1; // 0 radial, 1 tangential
};
// Throws DomainError if some node is outside the m-th positive cone and
// RicciPositivityError if some Ricci eigenvalue is not positive.
PointwiseMatrixReport pointwise_matrix_check(const SphereConfig& cfg, const Vec& u,
                                             double tol = 1e-10);

struct QuadraticFormReport {
    double min_rayleigh = 0.0;
    Vec witness;            // nodal, unit max norm, poles extrapolated
    bool pointwise_ok = false;
    double pointwise_margin = 0.0;
    double equality_gap = 0.0; // Rayleigh quotient of cos(theta)
    bool member = false;
    int iterations = 0;
    double dense_min = 0.0; // dense eigen-solver value when requested, else NaN
    double eps_tol = 0.0;
};

struct InCAOptions {
    double eps_tol = 1e-6;
    double tol = 1e-10;
    int max_iter = 2000;
    bool dense_cross_check = false;
    // Whether a Ricci-positivity or cone failure in the pointwise check
    // should be reported (pointwise_ok = false) instead of thrown.
    bool tolerate_pointwise_errors = true;
};

QuadraticFormReport in_C_A(const SphereConfig& cfg, const Vec& u, const InCAOptions& opt = {});

// Correlation of two nodal functions in L^2(dV_u) after removing means.
double weighted_correlation(const GeometryState& g, const Vec& a, const Vec& b);

} // namespace conflab
