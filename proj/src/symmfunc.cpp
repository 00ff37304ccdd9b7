#include "conflab/symmfunc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "conflab/errors.hpp"

namespace conflab {

EigenvalueVector::EigenvalueVector(Vec values) : v_(std::move(values)) {
    if (v_.size() < 4 || v_.size() % 2 != 0)
        throw ArgumentError("eigenvalue vector needs even length >= 4, got " +
                            std::to_string(v_.size()));
    for (double x : v_)
        if (!std::isfinite(x)) throw ArgumentError("eigenvalue vector has a non-finite entry");
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return std::round(r);
}

Vec elem_sym_all(std::span<const double> lam) {
    const std::size_t n = lam.size();
    Vec e(n + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j >= 1; --j) e[j] += lam[i] * e[j - 1];
    return e;
}

namespace {

// sigma_0..sigma_k of lam with position skip removed (skip = npos keeps all).
Vec sym_upto(int k, std::span<const double> lam, std::size_t skip) {
    Vec e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        if (i == skip) continue;
        ++used;
        const std::size_t top = std::min<std::size_t>(used, static_cast<std::size_t>(k));
        for (std::size_t j = top; j >= 1; --j) e[j] += lam[i] * e[j - 1];
    }
    return e;
}

void check_degree(int k, int hi) {
    if (k < 0 || k > hi)
        throw ArgumentError("degree " + std::to_string(k) + " outside [0, " +
                            std::to_string(hi) + "]");
}

} // namespace

double elem_sym(int k, std::span<const double> lam) {
    check_degree(k, static_cast<int>(lam.size()));
    return sym_upto(k, lam, static_cast<std::size_t>(-1))[static_cast<std::size_t>(k)];
}

double elem_sym_omit(int k, std::size_t i, std::span<const double> lam) {
    if (i >= lam.size())
        throw ArgumentError("index " + std::to_string(i) + " out of range for length " +
                            std::to_string(lam.size()));
    check_degree(k, static_cast<int>(lam.size()) - 1);
    return sym_upto(k, lam, i)[static_cast<std::size_t>(k)];
}

double normalized_sym(int k, std::span<const double> lam) {
    return elem_sym(k, lam) / binomial(static_cast<int>(lam.size()), k);
}

NewtonDiagonal newton_diagonal(int k, std::span<const double> lam) {
    check_degree(k, static_cast<int>(lam.size()) - 1);
    NewtonDiagonal d;
    d.degree = k;
    d.entries.resize(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) d.entries[i] = elem_sym_omit(k, i, lam);
    return d;
}

Vec schouten_from_ricci(std::span<const double> lam) {
    const double n = static_cast<double>(lam.size());
    if (lam.size() < 3) throw ArgumentError("schouten map needs n >= 3");
    double s1 = 0.0;
    for (double x : lam) s1 += x;
    const double shift = s1 / (2.0 * (n - 1.0));
    Vec a(lam.size());
    for (std::size_t i = 0; i < lam.size(); ++i) a[i] = (lam[i] - shift) / (n - 2.0);
    return a;
}

Vec ricci_from_schouten(std::span<const double> a) {
    const double n = static_cast<double>(a.size());
    if (a.size() < 3) throw ArgumentError("ricci map needs n >= 3");
    double s1 = 0.0;
    for (double x : a) s1 += x;
    Vec lam(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) lam[i] = (n - 2.0) * a[i] + s1;
    return lam;
}

bool in_positive_cone(int k, std::span<const double> a) {
    if (k < 1 || k > static_cast<int>(a.size()))
        throw ArgumentError("cone degree out of range");
    const Vec e = sym_upto(k, a, static_cast<std::size_t>(-1));
    for (int j = 1; j <= k; ++j)
        if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
    return true;
}

MaclaurinResult maclaurin_check(std::span<const double> lam, int kmax) {
    const int n = static_cast<int>(lam.size());
    if (kmax < 0) kmax = n;
    check_degree(kmax, n);
    const Vec e = elem_sym_all(lam);
    Vec mean(static_cast<std::size_t>(kmax) + 1, 1.0);
    for (int j = 1; j <= kmax; ++j) {
        const double s = e[static_cast<std::size_t>(j)];
        if (!(s > 0.0))
            throw DomainError("maclaurin: sigma_" + std::to_string(j) + " is not positive");
        mean[static_cast<std::size_t>(j)] = std::pow(s / binomial(n, j), 1.0 / j);
    }
    MaclaurinResult r;
    r.min_slack = 0.0;
    bool first = true;
    for (int k = 2; k <= kmax; ++k)
        for (int l = 1; l < k; ++l) {
            const double slack = mean[static_cast<std::size_t>(l)] - mean[static_cast<std::size_t>(k)];
            if (first || slack < r.min_slack) r.min_slack = slack;
            first = false;
        }
    double scale = 1.0;
    for (int j = 1; j <= kmax; ++j) scale = std::max(scale, mean[static_cast<std::size_t>(j)]);
    r.holds = r.min_slack >= -1e-12 * scale;
    return r;
}

namespace {

double horner(const Vec& c, double x) {
    double r = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) r = r * x + c[j];
    return r;
}

// Critical points of the polynomial c (ascending coefficients) whose roots
// are the sorted list r. Each one lies in [r_i, r_{i+1}]; on an open bracket
// the derivative starts with the sign of c inside the bracket and ends with
// the opposite sign, so the bisection never evaluates at a root of c.
Vec critical_points(const Vec& c, const Vec& dc, const Vec& r, double tol) {
    Vec out;
    out.reserve(r.size() - 1);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        double lo = r[i], hi = r[i + 1];
        if (hi - lo <= tol) {
            out.push_back(0.5 * (lo + hi));
            continue;
        }
        const double inside = horner(c, 0.5 * (lo + hi));
        const bool pos = inside > 0.0;
        for (int it = 0; it < 200 && hi - lo > tol; ++it) {
            const double x = 0.5 * (lo + hi);
            if (x <= lo || x >= hi) break;
            const double q = horner(dc, x);
            if (q == 0.0) {
                lo = hi = x;
                break;
            }
            if ((q > 0.0) == pos) lo = x;
            else hi = x;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

} // namespace

Vec derivative_roots(std::span<const double> lam, int d) {
    const int n = static_cast<int>(lam.size());
    if (d < 1 || d > n - 1)
        throw ArgumentError("derivative order " + std::to_string(d) + " outside [1, " +
                            std::to_string(n - 1) + "]");
    double centre = 0.0;
    for (double x : lam) centre += x;
    centre /= n;
    double scale = 0.0;
    for (double x : lam) scale = std::max(scale, std::abs(x - centre));
    Vec r(lam.begin(), lam.end());
    std::sort(r.begin(), r.end());
    if (scale == 0.0) return Vec(static_cast<std::size_t>(n - d), centre);

    // Work on y = (x - centre)/scale; derivative roots map back affinely.
    for (double& x : r) x = (x - centre) / scale;
    Vec c{1.0};
    for (double y : r) {
        Vec next(c.size() + 1, 0.0);
        for (std::size_t j = 0; j < c.size(); ++j) {
            next[j + 1] += c[j];
            next[j] -= y * c[j];
        }
        c = std::move(next);
    }
    const double tol = std::min(1e-13 / scale, 1e-13);
    for (int step = 0; step < d; ++step) {
        Vec dc(c.size() - 1);
        for (std::size_t j = 1; j < c.size(); ++j) dc[j - 1] = static_cast<double>(j) * c[j];
        r = critical_points(c, dc, r, tol);
        c = std::move(dc);
    }
    for (double& y : r) y = centre + scale * y;
    return r;
}

VietaResult vieta_invariance_check(std::span<const double> lam, double tol) {
    const int n = static_cast<int>(lam.size());
    if (n < 2) throw ArgumentError("vieta check needs at least two values");
    const Vec mu = derivative_roots(lam, 1);
    const Vec el = elem_sym_all(lam);
    const Vec em = elem_sym_all(mu);
    VietaResult r;
    for (int k = 0; k <= n - 1; ++k) {
        const double a = el[static_cast<std::size_t>(k)] / binomial(n, k);
        const double b = em[static_cast<std::size_t>(k)] / binomial(n - 1, k);
        r.max_deviation = std::max(r.max_deviation, std::abs(a - b));
    }
    r.holds = r.max_deviation <= tol;
    return r;
}

CrooshResult croosh_inequality(std::span<const double> a, std::size_t i) {
    const std::size_t n = a.size();
    if (n < 4 || n % 2 != 0) throw ArgumentError("croosh inequality needs even n >= 4");
    if (i >= n) throw ArgumentError("croosh inequality: index out of range");
    const int m = static_cast<int>(n / 2);
    if (!in_positive_cone(m, a)) throw DomainError("croosh inequality: vector outside the cone");
    const Vec lam = ricci_from_schouten(a);
    CrooshResult r;
    r.lhs = static_cast<double>(n - 1) * elem_sym(m, a);
    r.rhs = lam[i] * elem_sym_omit(m - 1, i, a);
    const double slack = 1e-12 * std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
    r.holds = r.lhs <= r.rhs + slack;
    return r;
}

namespace {

Vec draw_cone_sample(int n, int m, ConeBox box, std::mt19937_64& rng, long& draws) {
    std::uniform_real_distribution<double> U(box.lo, box.hi);
    Vec a(static_cast<std::size_t>(n));
    for (long attempt = 0; attempt < 1000000; ++attempt) {
        ++draws;
        for (double& x : a) x = U(rng);
        if (in_positive_cone(m, a)) return a;
    }
    throw NumericalError("cone sampler: acceptance rate too low for the configured box");
}

template <class Body>
FuzzStats run_campaign(long samples, Exec ex, Body body) {
    long draws = 0, checks = 0, violations = 0;
    double worst = 0.0;
    const bool par = ex == Exec::parallel;
#pragma omp parallel for if (par) schedule(static) reduction(+ : draws, checks, violations) \
    reduction(min : worst)
    for (long s = 0; s < samples; ++s) {
        FuzzStats local;
        body(s, local);
        draws += local.draws;
        checks += local.checks;
        violations += local.violations;
        worst = std::min(worst, local.worst);
    }
    FuzzStats st;
    st.samples = samples;
    st.draws = draws;
    st.checks = checks;
    st.violations = violations;
    st.worst = worst;
    return st;
}

void check_even(int n) {
    if (n < 4 || n % 2 != 0) throw ArgumentError("campaign dimension must be even and >= 4");
}

} // namespace

FuzzStats fuzz_croosh(int n, long samples, std::uint64_t seed, ConeBox box, Exec ex) {
    check_even(n);
    const int m = n / 2;
    return run_campaign(samples, ex, [&](long s, FuzzStats& st) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        const Vec a = draw_cone_sample(n, m, box, rng, st.draws);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const CrooshResult r = croosh_inequality(a, i);
            ++st.checks;
            if (!r.holds) ++st.violations;
            const double rel = (r.rhs - r.lhs) / std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
            st.worst = std::min(st.worst, rel);
        }
    });
}

FuzzStats fuzz_matrix_rearrangement(int n, long samples, std::uint64_t seed, ConeBox box,
                                    Exec ex) {
    check_even(n);
    const int m = n / 2;
    return run_campaign(samples, ex, [&](long s, FuzzStats& st) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        Vec a;
        Vec lam;
        for (;;) {
            a = draw_cone_sample(n, m, box, rng, st.draws);
            lam = ricci_from_schouten(a);
            if (std::all_of(lam.begin(), lam.end(), [](double x) { return x > 0.0; })) break;
        }
        const double sm = elem_sym(m, a);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double lhs = elem_sym_omit(m - 1, i, a) / sm;
            const double rhs = (n - 1.0) / lam[i];
            const double rel = (lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
            ++st.checks;
            if (rel < -1e-12) ++st.violations;
            st.worst = std::min(st.worst, rel);
        }
    });
}

FuzzStats fuzz_maclaurin(int n, long samples, std::uint64_t seed, Exec ex) {
    if (n < 2) throw ArgumentError("maclaurin campaign needs n >= 2");
    return run_campaign(samples, ex, [&](long s, FuzzStats& st) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::uniform_real_distribution<double> E(-1.0, 1.0);
        Vec lam(static_cast<std::size_t>(n));
        for (double& x : lam) x = (U(rng) + 1e-12) * std::pow(10.0, E(rng));
        ++st.draws;
        ++st.checks;
        const MaclaurinResult r = maclaurin_check(lam);
        if (!r.holds) ++st.violations;
        double mx = 0.0;
        for (double x : lam) mx = std::max(mx, x);
        st.worst = std::min(st.worst, r.min_slack / mx);
    });
}

FuzzStats fuzz_vieta(long samples, std::uint64_t seed, int max_degree, Exec ex) {
    if (max_degree < 2) throw ArgumentError("vieta campaign needs degree >= 2");
    return run_campaign(samples, ex, [&](long s, FuzzStats& st) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(s)));
        std::uniform_int_distribution<int> D(2, max_degree);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        Vec lam(static_cast<std::size_t>(D(rng)));
        for (double& x : lam) x = U(rng);
        ++st.draws;
        ++st.checks;
        const VietaResult r = vieta_invariance_check(lam);
        if (!r.holds) ++st.violations;
        st.worst = std::min(st.worst, -r.max_deviation);
    });
}

} // namespace conflab
