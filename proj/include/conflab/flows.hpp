#pragma once

#include <string>

#include "conflab/functionals.hpp"
#include "conflab/sphere.hpp"

namespace conflab {

struct MonitorRow {
    double t = 0.0;
    double F = 0.0;
    double momentum = 0.0; // integral of u_t v_m dV_u
    double speed2 = 0.0;   // integral of u_t^2 v_m dV_u
    double entropy = 0.0;  // integral of v_m log v_m dV_u
    double min_vm = 0.0;
    double min_L = 0.0;
    double dt = 0.0;
};

struct MonitorTrace {
    std::vector<MonitorRow> rows;
};

struct Snapshot {
    double t = 0.0;
    Vec u;
    Vec w; // velocity
};

enum class RunStatus { ok, stationary, cone_exit, stiffness, no_convergence };
const char* to_string(RunStatus s);

// ----------------------------------------------------------------------------
// Geodesics.
//
// The integrator evolves the Euler-Lagrange system of the discrete metric
// sum_j W_j(u) a_j b_j, where W_j is the exact v_m-mass of the cell around
// node j of the staggered profile p = cos(theta) - sin(theta) u'. The cell
// masses telescope, so sum_j W_j equals the round value for every u, and the
// discrete momentum sum W w and speed sum W w^2 are conserved exactly by the
// semi-discrete flow.

struct CellModel {
    Vec W;     // nodal cell masses
    Vec kappa; // face coefficients, > 0 inside the cone
    Vec p;     // face values of cos(theta) - sin(theta) u'
};
CellModel cell_model(const SphereConfig& cfg, const Vec& u);
bool cell_admissible(const CellModel& c);

// Pointwise v_m^{-1} l_rad e^{2u} (w')^2 with nodal derivatives.
Vec geodesic_rhs(const SphereConfig& cfg, const Vec& u, const Vec& w);
// Acceleration of the discrete metric's geodesic equation.
Vec geodesic_accel(const SphereConfig& cfg, const Vec& u, const Vec& w);

struct GeodesicOptions {
    double T = 1.0;
    double dt = 1e-3;
    int record_every = 10; // snapshots and monitor rows
    bool monitor_F = true;
    int Q = 16;
};

struct GeodesicResult {
    std::vector<Snapshot> path;
    MonitorTrace trace;
    RunStatus status = RunStatus::ok;
    double exit_time = 0.0;
    double momentum0 = 0.0, speed20 = 0.0;
    double momentum_drift = 0.0; // max |momentum - momentum0| / speed20
    double speed2_drift = 0.0;   // max |speed2 - speed20| / speed20
    Vec u_final, w_final;
};

GeodesicResult geodesic_ivp(const SphereConfig& cfg, const Vec& u0, const Vec& w0,
                            const GeodesicOptions& opt = {});

// u(T) for initial velocity w0, or nullopt-like flag on cone exit.
bool geodesic_endpoint(const SphereConfig& cfg, const Vec& u0, const Vec& w0, double T, double dt,
                       Vec& out);

struct BvpOptions {
    double T = 1.0;
    double dt = 1e-2;
    int max_iter = 50;
    double tol = 1e-8;
    double fd_step = 1e-7;
    int record_every = 1;
    bool monitor_F = true;
    Exec exec = kDefaultExec;
};

struct BvpResult {
    RunStatus status = RunStatus::no_convergence;
    int iterations = 0;
    double residual = 0.0;
    Vec w0;
    GeodesicResult trajectory;
};

BvpResult geodesic_bvp(const SphereConfig& cfg, const Vec& u0, const Vec& u1,
                       const BvpOptions& opt = {});

struct ConvexityReport {
    Vec t, F;
    Vec d2F;      // centred second differences at interior snapshots
    Vec identity; // (v/V) * andrews_gap(u_t) at the same snapshots
    double min_d2F = 0.0;
    double max_identity_dev = 0.0;
    double eps_tol = 0.0;
    bool ok = false;
};

// Constant of the tolerance max(1e-6, C (h^2 + dt^2)). Along the round-sphere
// geodesic with velocity cos(theta) (where F is affine) the second differences
// are about -1.1e-4 h^2; C keeps a factor of ten over that.
inline constexpr double kConvexityC = 1e-3;
double convexity_tolerance(const SphereConfig& cfg, double dt);

// Requires equally spaced snapshots with F monitored.
ConvexityReport convexity_along_geodesic(const SphereConfig& cfg, const GeodesicResult& traj);

// ----------------------------------------------------------------------------
// Inverse v_m-flow u_t = 1 - vbar / v_m, explicit RK4 with
// dt = c_cfl h^2 min_j vm^2 / (vbar max(l_rad, l_tan) e^{2u}).

struct FlowOptions {
    double T = 1.0;
    double c_cfl = -1.0; // <= 0 selects 0.4 / m
    double stationarity_tol = 1e-9;
    int record_every = 1;
    int Q = 16;
    // E is advanced with the RK4 quadrature of alpha along the trajectory;
    // every this many steps it is recomputed by the straight-path rule and
    // the difference is recorded (0 disables).
    int recheck_E_every = 0;
    long max_steps = 50'000'000;
    bool keep_snapshots = false;
};

struct EntropyRow {
    double t = 0.0;
    double fd = 0.0;       // centred difference of the entropy series
    double analytic = 0.0; // -vbar integral of v_m <L, grad(1/v_m) (x) grad(1/v_m)> dV_u
    double unweighted = 0.0; // the same without the v_m weight
};

struct FlowResult {
    MonitorTrace trace;
    std::vector<Snapshot> snapshots;
    RunStatus status = RunStatus::ok;
    double t_end = 0.0;
    long steps = 0;
    double residual = 0.0; // sup |1 - vbar/vm| at the end
    double residual0 = 0.0;
    double max_E_recheck = 0.0;
    // Per monitor row: 2 vbar^3 andrews_gap(1/v_m), and the two entropy rates.
    Vec d2F, entropy_rate, entropy_rate_unweighted;
    Vec u_final;
};

double flow_cfl_dt(const SphereConfig& cfg, const GeometryState& g, double c_cfl);
Vec flow_rhs(const GeometryState& g); // 1 - vbar / v_m
double entropy(const GeometryState& g);
// -vbar * integral of v_m <L, grad(1/v_m) (x) grad(1/v_m)> dV_u.
double entropy_rate(const SphereConfig& cfg, const GeometryState& g);
// -vbar * integral of <L, grad(1/v_m) (x) grad(1/v_m)> dV_u.
double entropy_rate_unweighted(const SphereConfig& cfg, const GeometryState& g);
// 2 vbar^3 andrews_gap(1/v_m): d^2F/dt^2 along the flow.
double flow_d2F(const SphereConfig& cfg, const GeometryState& g);

FlowResult inverse_flow(const SphereConfig& cfg, const Vec& u0, const FlowOptions& opt = {});

struct EntropyReport {
    std::vector<EntropyRow> rows;
    double max_abs_dev = 0.0;
    double max_rel_dev = 0.0; // relative to max |analytic| over the run
    double max_analytic = 0.0; // largest analytic value (should be <= 0)
    bool nonincreasing = false;
};
// Best with record_every = 1 so the centred differences resolve every step.
EntropyReport entropy_monitor(const SphereConfig& cfg, const FlowResult& run, double eps_tol = 1e-9);

struct LengthOptions {
    double T = 1.0;
    int S = 17;
    double c_cfl = -1.0;
    int record_every = 10;
    Exec exec = kDefaultExec;
};

struct LengthReport {
    Vec t, ell;
    RunStatus status = RunStatus::ok;
    double max_increase = 0.0;
    double eps_tol = 0.0;
    bool nonincreasing = false;
};

// Length of the discrete curve s -> members[i] (s_i uniform on [0,1]),
// trapezoid in s with second-order differences for du/ds.
double path_length(const SphereConfig& cfg, const std::vector<Vec>& members);

// Flows every member of the family family(s) on a common time grid.
LengthReport length_monotonicity(const SphereConfig& cfg, const std::function<Vec(double)>& family,
                                 const LengthOptions& opt = {}, double eps_tol = 1e-9);

} // namespace conflab
