#pragma once

// Experiment configuration: plain "key = value" lines grouped under
// [section] headers. '#' and ';' start comments. Unknown sections or keys
// are errors.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace conflab {

struct GeneralConfig {
    int m = 2;
    int N = 201;
    std::uint64_t seed = 20240601;
    int Q = 16;
};

// Section-level N = 0 inherits general.N.

struct InvarianceConfig {
    int N = 401;
    int samples = 20;
    double amplitude = 0.5;
    int modes = 4;
    double tol = 1e-4;    // relative, at N and at the refined grid 2N - 1
    double min_order = 1.9;
};

struct GeodesicConfig {
    int N = 0;
    double T = 1.0;
    double dt = 1e-3;
    double amplitude = 0.1; // initial velocity amplitude * cos(2 theta) at u = 0
    int record_every = 10;
    double drift_tol = 1e-8;
    // Step-halving ladder for the drift ratio.
    double ladder_dt = 0.1;
    int ladder_levels = 3;
    double min_ratio = 12.0;
    int bvp_count = 10;
    int bvp_N = 101;
    double bvp_dt = 1e-2;
    double bvp_amplitude = 0.05;
    int bvp_modes = 3;
};

struct FlowConfig {
    int N = 201;
    double T = 4.0;
    double c_cfl = 0.0; // 0 selects 0.4 / m
    int starts = 1;     // start 0 is amplitude * cos(2 theta), the rest random
    double amplitude = 0.1;
    int modes = 3;
    double target = 1e-6; // sup |1 - vbar/v_m| to reach
    int record_every = 1;
    double eps_tol = 1e-9;     // monotonicity slack for F and entropy
    double entropy_tol = 1e-5; // analytic vs finite-difference rate, relative
    // Length of the family s * length_amplitude * cos(2 theta), 0 members disables.
    int length_N = 101;
    int length_members = 17;
    double length_T = 1.0;
    double length_amplitude = 0.1;
};

struct InequalitiesConfig {
    int N = 401;
    int samples = 10;
    double amplitude = 0.1;
    int modes = 3;
    double eps_tol = 1e-6;
    double equality_tol = 1e-6;
    double min_correlation = 0.999;
    int dense_cross_check = 1;
};

struct FuzzConfig {
    long croosh_samples = 100000;
    long maclaurin_samples = 100000;
    long vieta_samples = 10000;
    long rearrangement_samples = 100000;
    std::vector<int> dims{4, 6, 8};
    double box_lo = -1.0;
    double box_hi = 2.0;
    int vieta_degree = 8;
    double equality_tol = 1e-12;
};

struct ExperimentConfig {
    GeneralConfig general;
    InvarianceConfig invariance;
    GeodesicConfig geodesic;
    FlowConfig flow;
    InequalitiesConfig inequalities;
    FuzzConfig fuzz;

    // Throws ConfigError on invalid combinations (even N, non-positive
    // tolerances, ...).
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Flat "section.key" -> value map of every setting, for echoing.
std::map<std::string, std::string> describe(const ExperimentConfig& c);

} // namespace conflab
