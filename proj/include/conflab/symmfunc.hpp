#pragma once

// Elementary symmetric functions of eigenvalue vectors and the inequalities
// built from them. Indices are 0-based everywhere.

#include <cstdint>
#include <span>
#include <vector>

#include "conflab/exec.hpp"

namespace conflab {

using Vec = std::vector<double>;

// An eigenvalue list of even length n >= 4 with finite entries. Most free
// functions below accept any span; this type is for callers that need the
// dimensional invariant checked once.
class EigenvalueVector {
public:
    explicit EigenvalueVector(Vec values);
    std::size_t n() const { return v_.size(); }
    std::size_t m() const { return v_.size() / 2; }
    const Vec& values() const { return v_; }
    operator std::span<const double>() const { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }

private:
    Vec v_;
};

struct NewtonDiagonal {
    Vec entries; // entries[i] = sigma_k with entry i removed
    int degree = 0;
};

double binomial(int n, int k);

// sigma_k via the coefficients of prod (x + lam_i).
double elem_sym(int k, std::span<const double> lam);
// All sigma_0..sigma_n in one pass.
Vec elem_sym_all(std::span<const double> lam);
double elem_sym_omit(int k, std::size_t i, std::span<const double> lam);
double normalized_sym(int k, std::span<const double> lam);
NewtonDiagonal newton_diagonal(int k, std::span<const double> lam);

Vec schouten_from_ricci(std::span<const double> lam);
Vec ricci_from_schouten(std::span<const double> a);

bool in_positive_cone(int k, std::span<const double> a);

struct MaclaurinResult {
    bool holds = false;
    double min_slack = 0.0; // min over k > l >= 1 of mean_l^{1/l} - mean_k^{1/k}
};
// Checks the chain up to degree kmax (default: n). Throws DomainError if some
// sigma_j, j <= kmax, is not positive.
MaclaurinResult maclaurin_check(std::span<const double> lam, int kmax = -1);

// Roots of the d-th derivative of prod (x - lam_i), ascending.
Vec derivative_roots(std::span<const double> lam, int d);

struct VietaResult {
    bool holds = false;
    double max_deviation = 0.0;
};
// Normalized means of lam against those of the critical points of its
// polynomial, for every degree 0..n-1.
VietaResult vieta_invariance_check(std::span<const double> lam, double tol = 1e-10);

struct CrooshResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
// (n-1) sigma_m(a) <= lambda_i sigma_{m-1;i}(a) with lambda the Ricci vector
// of the Schouten vector a. Requires n = 2m even and a in the m-th cone.
CrooshResult croosh_inequality(std::span<const double> a, std::size_t i);

// Randomized campaigns. Each sample draws from its own stream seeded by
// stream_seed(seed, sample), so the serial and parallel paths agree exactly.
struct FuzzStats {
    long samples = 0;    // accepted samples
    long draws = 0;      // raw draws (rejection sampling)
    long checks = 0;     // individual inequality evaluations
    long violations = 0;
    double worst = 0.0;  // most negative normalized slack seen
};

struct ConeBox {
    double lo = -1.0;
    double hi = 2.0;
};

FuzzStats fuzz_croosh(int n, long samples, std::uint64_t seed, ConeBox box = {},
                      Exec ex = kDefaultExec);
FuzzStats fuzz_maclaurin(int n, long samples, std::uint64_t seed, Exec ex = kDefaultExec);
FuzzStats fuzz_vieta(long samples, std::uint64_t seed, int max_degree = 8,
                     Exec ex = kDefaultExec);
// sigma_{m-1;i}/sigma_m >= (n-1)/lambda_i on cone samples with positive Ricci.
FuzzStats fuzz_matrix_rearrangement(int n, long samples, std::uint64_t seed,
                                    ConeBox box = {}, Exec ex = kDefaultExec);

} // namespace conflab
