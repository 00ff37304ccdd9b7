#pragma once

// Rotationally symmetric conformal factors u(theta) on the round S^n, n = 2m,
// for the metric g_u = exp(-2u) g_0, sampled on a uniform pole-to-pole grid.

#include <array>
#include <cstddef>

#include "conflab/exec.hpp"
#include "conflab/symmfunc.hpp"

namespace conflab {

struct SphereConfig {
    int m = 2;
    int N = 201;

    SphereConfig() = default;
    SphereConfig(int m_, int N_);
    int n() const { return 2 * m; }
    double h() const;
    double theta(int j) const;
    Vec thetas() const;
    void validate() const;
};

// Area of the unit S^k.
double sphere_area(int k);
// sigma_m(1/2, ..., 1/2) * Vol(S^n): the conformal invariant of the round class.
double round_total_v(int m);

struct Derivatives {
    Vec d1, d2;
};
// Fourth-order centred differences; u is extended evenly across both poles,
// so d1 vanishes there.
Derivatives derivatives(const SphereConfig& cfg, const Vec& u);

struct GeometryState {
    Vec theta, u, d1, d2;
    Vec a_rad, a_tan; // eigenvalues of g_u^{-1} A_u; a_tan has multiplicity n-1
    Vec vm;           // sigma_m of (a_rad, a_tan x (n-1))
    Vec l_rad, l_tan; // Newton tensor T_{m-1} eigenvalues
    Vec w;            // quadrature weights of dV_u (zero at the poles)

    double min_vm() const;
    double min_L() const;
};

GeometryState geometry_state(const SphereConfig& cfg, const Vec& u, Exec ex = Exec::serial);

double total_v(const SphereConfig& cfg, const Vec& u);
double total_v(const GeometryState& g);
double volume(const SphereConfig& cfg, const Vec& u);
double volume(const GeometryState& g);
double integrate(const SphereConfig& cfg, const Vec& u, const Vec& f);
double integrate(const GeometryState& g, const Vec& f);

bool in_cone_Cm(const GeometryState& g);
bool in_cone_Cm(const SphereConfig& cfg, const Vec& u);
// Throws ConeError naming the first offending node.
void require_cone(const GeometryState& g, const char* who);

// Staggered derivative from nodes to the N-1 half nodes. Interior rows use
// the fourth-order stencil (1,-27,27,-1)/24h; the two rows next to each pole
// differentiate the even fit a + b theta^2 + c theta^4 through the three
// nearest non-pole nodes, so no row touches a pole value.
class StaggeredDiff {
public:
    explicit StaggeredDiff(const SphereConfig& cfg);
    std::size_t faces() const { return idx_.size(); }
    Vec apply(const Vec& phi) const;
    // out[j] += sum_f D[f][j] * g[f]
    void apply_transpose_add(const Vec& g, Vec& out) const;
    const std::array<int, 4>& index(std::size_t f) const { return idx_[f]; }
    const std::array<double, 4>& coef(std::size_t f) const { return c_[f]; }

private:
    std::vector<std::array<int, 4>> idx_;
    std::vector<std::array<double, 4>> c_;
};

// Fourth-order interpolation of even nodal data to the half nodes.
Vec to_faces(const SphereConfig& cfg, const Vec& nodal);
Vec face_thetas(const SphereConfig& cfg);
// Even extrapolation of a pole value from nodes 1..3 (or N-2..N-4).
double pole_extrapolate(const Vec& v, bool north);

// The symmetric form S = D^T diag(q) D with
//   phi^T S psi  ~  integral of <L, grad phi (x) grad psi> dV_u.
// Face coefficients q_f = h * area(S^{n-1}) * C(n-1,m-1) * sin^{n-1} * t^{m-1},
// t = 1/2 + cot(theta) u' - u'^2/2 evaluated with the staggered u'.
class FluxOperator {
public:
    FluxOperator(const SphereConfig& cfg, const Vec& u);
    FluxOperator(const SphereConfig& cfg, Vec face_coef, Vec weights);

    // Copy with q_f scaled by a nodal multiplier interpolated to faces.
    FluxOperator scaled(const Vec& nodal_multiplier) const;

    Vec apply(const Vec& phi) const; // S phi
    double pairing(const Vec& phi, const Vec& psi) const;
    // -(S phi)_j / w_j at interior nodes; poles by even extrapolation.
    Vec div_L_grad(const Vec& phi) const;
    // Dense S restricted to interior nodes 1..N-2, row-major.
    Vec interior_matrix() const;

    const Vec& face_coef() const { return q_; }
    const Vec& weights() const { return w_; }
    const SphereConfig& config() const { return cfg_; }
    double min_face_coef() const;

private:
    SphereConfig cfg_;
    StaggeredDiff D_;
    Vec q_;
    Vec w_;
};

Vec div_L_grad(const SphereConfig& cfg, const Vec& u, const Vec& phi);

struct LinearizationCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double deviation = 0.0;
};
// lhs: centred difference in t of integrate(phi * vm) along u + t udot.
// rhs: -phi^T S udot.
LinearizationCheck linearization_check(const SphereConfig& cfg, const Vec& u, const Vec& udot,
                                       const Vec& phi, double t = 1e-4);

// Nodal samples of f(theta).
template <class F>
Vec sample(const SphereConfig& cfg, F f) {
    Vec v(static_cast<std::size_t>(cfg.N));
    for (int j = 0; j < cfg.N; ++j) v[static_cast<std::size_t>(j)] = f(cfg.theta(j));
    return v;
}

} // namespace conflab
