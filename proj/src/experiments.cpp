#include "conflab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "conflab/errors.hpp"
#include "conflab/inequalities.hpp"
#include "conflab/symmfunc.hpp"

namespace conflab {

namespace {

constexpr std::uint64_t kBvpStream = 1'000'000;

SphereConfig grid(const ExperimentConfig& c, int N) { return SphereConfig(c.general.m, N > 0 ? N : c.general.N); }

json base_summary(const std::string& command, const ExperimentConfig& c) {
    json s;
    s["schema"] = 1;
    s["command"] = command;
    s["m"] = c.general.m;
    s["n"] = 2 * c.general.m;
    s["seed"] = c.general.seed;
    json cfg = json::object();
    for (const auto& [k, v] : describe(c)) cfg[k] = v;
    s["config"] = cfg;
    return s;
}

Vec draw_coefficients(std::mt19937_64& rng, double amplitude, int modes) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Vec a(static_cast<std::size_t>(modes));
    double l1 = 0.0;
    for (int k = 1; k <= modes; ++k) {
        a[static_cast<std::size_t>(k - 1)] = amplitude * U(rng) / (k * k);
        l1 += std::abs(a[static_cast<std::size_t>(k - 1)]);
    }
    if (l1 > amplitude)
        for (double& x : a) x *= amplitude / l1;
    return a;
}

Vec cosine_series(const SphereConfig& cfg, const Vec& a) {
    return sample(cfg, [&](double t) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * std::cos(static_cast<double>(k + 1) * t);
        return s;
    });
}

bool admissible(const SphereConfig& cfg, const Vec& u) {
    try {
        return in_cone_Cm(geometry_state(cfg, u)) && cell_admissible(cell_model(cfg, u));
    } catch (const NumericalError&) {
        return false;
    }
}

// Severity order for combining outcomes: breach, then cone exit, then no
// convergence.
struct Outcome {
    bool breach = false, cone = false, stalled = false;
    int code() const {
        if (breach) return kExitBreach;
        if (cone) return kExitConeExit;
        if (stalled) return kExitNoConvergence;
        return kExitPass;
    }
};

const char* status_name(int code) {
    switch (code) {
    case kExitPass: return "pass";
    case kExitBreach: return "invariant_breach";
    case kExitConeExit: return "cone_exit";
    case kExitNoConvergence: return "no_convergence";
    default: return "config_error";
    }
}

void finish(CommandResult& r, const Outcome& o) {
    r.exit_code = o.code();
    r.summary["status"] = status_name(r.exit_code);
    r.summary["exit_code"] = r.exit_code;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

Vec random_profile(const SphereConfig& cfg, double amplitude, int modes, std::uint64_t seed,
                   std::uint64_t index, bool require_cone) {
    if (modes < 1) throw ArgumentError("random_profile: modes must be >= 1");
    std::mt19937_64 rng(stream_seed(seed, index));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Vec u = cosine_series(cfg, draw_coefficients(rng, amplitude, modes));
        if (!require_cone || admissible(cfg, u)) return u;
    }
    throw DomainError("random_profile: no admissible draw in 10000 attempts; lower the amplitude");
}

CommandResult cmd_invariance(const ExperimentConfig& c) {
    const auto& ic = c.invariance;
    const SphereConfig coarse = grid(c, ic.N);
    const SphereConfig fine(coarse.m, 2 * coarse.N - 1);
    const double v_round = round_total_v(coarse.m);

    CommandResult r;
    r.summary = base_summary("invariance", c);
    Outcome o;
    json samples = json::array();
    double worst = -1.0, sum_c = 0.0, sum_f = 0.0;
    int worst_i = -1;
    Vec worst_u;
    for (int i = 0; i < ic.samples; ++i) {
        std::mt19937_64 rng(stream_seed(c.general.seed, static_cast<std::uint64_t>(i)));
        const Vec a = draw_coefficients(rng, ic.amplitude, ic.modes);
        const Vec uc = cosine_series(coarse, a);
        const double vc = total_v(coarse, uc);
        const double vf = total_v(fine, cosine_series(fine, a));
        const double ec = std::abs(vc - v_round) / v_round;
        const double ef = std::abs(vf - v_round) / v_round;
        sum_c += ec;
        sum_f += ef;
        if (ec > ic.tol || ef > ic.tol || !std::isfinite(ec) || !std::isfinite(ef)) o.breach = true;
        if (std::max(ec, ef) > worst) {
            worst = std::max(ec, ef);
            worst_i = i;
            worst_u = uc;
        }
        samples.push_back({{"index", i}, {"coefficients", a}, {"v", vc}, {"rel_err", ec}, {"rel_err_refined", ef}});
    }
    // At roundoff level the ratio carries no information.
    const bool resolved = sum_c > 1e-13 * ic.samples;
    const double order = resolved && sum_f > 0.0 ? std::log2(sum_c / sum_f) : std::numeric_limits<double>::infinity();
    if (resolved && !(order >= ic.min_order)) o.breach = true;

    r.summary["v_round"] = v_round;
    r.summary["N"] = coarse.N;
    r.summary["N_refined"] = fine.N;
    r.summary["tol"] = ic.tol;
    r.summary["order"] = num_or_null(order);
    r.summary["order_resolved"] = resolved;
    r.summary["min_order"] = ic.min_order;
    r.summary["worst"] = {{"index", worst_i}, {"rel_err", worst}};
    r.summary["samples"] = samples;
    if (!worst_u.empty()) r.final_state = geometry_state(coarse, worst_u);
    finish(r, o);
    return r;
}

CommandResult cmd_geodesic(const ExperimentConfig& c) {
    const auto& gc = c.geodesic;
    const SphereConfig cfg = grid(c, gc.N);
    CommandResult r;
    r.summary = base_summary("geodesic", c);
    Outcome o;

    const Vec u0(static_cast<std::size_t>(cfg.N), 0.0);
    const Vec w0 = sample(cfg, [&](double t) { return gc.amplitude * std::cos(2.0 * t); });
    GeodesicOptions go;
    go.T = gc.T;
    go.dt = gc.dt;
    go.record_every = gc.record_every;
    go.Q = c.general.Q;
    const GeodesicResult ivp = geodesic_ivp(cfg, u0, w0, go);
    r.trace = ivp.trace;
    r.final_state = geometry_state(cfg, ivp.u_final);
    if (ivp.status == RunStatus::cone_exit) o.cone = true;
    else if (!(ivp.momentum_drift <= gc.drift_tol) || !(ivp.speed2_drift <= gc.drift_tol)) o.breach = true;
    r.summary["conservation"] = {{"N", cfg.N},
                                 {"dt", gc.dt},
                                 {"T", gc.T},
                                 {"status", to_string(ivp.status)},
                                 {"exit_time", ivp.exit_time},
                                 {"momentum0", ivp.momentum0},
                                 {"speed20", ivp.speed20},
                                 {"momentum_drift", ivp.momentum_drift},
                                 {"speed2_drift", ivp.speed2_drift},
                                 {"drift_tol", gc.drift_tol}};

    json ladder = json::array();
    Vec md, sd;
    for (int l = 0; l < gc.ladder_levels; ++l) {
        GeodesicOptions lo = go;
        lo.dt = gc.ladder_dt / std::pow(2.0, l);
        lo.monitor_F = false;
        lo.record_every = 1 << 30;
        const GeodesicResult lr = geodesic_ivp(cfg, u0, w0, lo);
        if (lr.status == RunStatus::cone_exit) o.cone = true;
        md.push_back(lr.momentum_drift);
        sd.push_back(lr.speed2_drift);
        ladder.push_back({{"dt", lo.dt}, {"status", to_string(lr.status)},
                          {"momentum_drift", lr.momentum_drift}, {"speed2_drift", lr.speed2_drift}});
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l + 1 < md.size(); ++l) {
        min_ratio = std::min(min_ratio, md[l] / md[l + 1]);
        min_ratio = std::min(min_ratio, sd[l] / sd[l + 1]);
    }
    if (md.size() >= 2 && !(min_ratio >= gc.min_ratio)) o.breach = true;
    r.summary["ladder"] = {{"levels", ladder}, {"min_ratio", num_or_null(min_ratio)}, {"required", gc.min_ratio}};

    const SphereConfig bcfg(c.general.m, gc.bvp_N);
    json bvps = json::array();
    double min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < gc.bvp_count; ++i) {
        const auto k = static_cast<std::uint64_t>(i);
        const Vec ua = random_profile(bcfg, gc.bvp_amplitude, gc.bvp_modes, c.general.seed, kBvpStream + 2 * k, true);
        const Vec ub = random_profile(bcfg, gc.bvp_amplitude, gc.bvp_modes, c.general.seed, kBvpStream + 2 * k + 1, true);
        const bool ma = in_C_A(bcfg, ua).member, mb = in_C_A(bcfg, ub).member;
        BvpOptions bo;
        bo.dt = gc.bvp_dt;
        const BvpResult b = geodesic_bvp(bcfg, ua, ub, bo);
        json e{{"index", i}, {"start_in_C_A", ma}, {"end_in_C_A", mb}, {"status", to_string(b.status)},
               {"iterations", b.iterations}, {"residual", b.residual}};
        if (b.status == RunStatus::ok) {
            const ConvexityReport cr = convexity_along_geodesic(bcfg, b.trajectory);
            e["min_d2F"] = cr.min_d2F;
            e["eps_tol"] = cr.eps_tol;
            e["max_identity_dev"] = cr.max_identity_dev;
            e["convex"] = cr.ok;
            min_margin = std::min(min_margin, cr.min_d2F + cr.eps_tol);
            if (!cr.ok) o.breach = true;
        } else if (b.status == RunStatus::cone_exit) {
            o.cone = true;
        } else {
            o.stalled = true;
        }
        bvps.push_back(e);
    }
    r.summary["convexity"] = {{"N", bcfg.N}, {"dt", gc.bvp_dt}, {"runs", bvps}, {"min_margin", num_or_null(min_margin)}};
    finish(r, o);
    return r;
}

CommandResult cmd_flow(const ExperimentConfig& c) {
    const auto& fc = c.flow;
    const SphereConfig cfg = grid(c, fc.N);
    CommandResult r;
    r.summary = base_summary("flow", c);
    Outcome o;

    FlowOptions fo;
    fo.T = fc.T;
    fo.c_cfl = fc.c_cfl > 0.0 ? fc.c_cfl : -1.0;
    fo.stationarity_tol = fc.target;
    fo.record_every = fc.record_every;
    fo.Q = c.general.Q;

    json runs = json::array();
    for (int s = 0; s < fc.starts; ++s) {
        const Vec u0 = s == 0 ? sample(cfg, [&](double t) { return fc.amplitude * std::cos(2.0 * t); })
                              : random_profile(cfg, fc.amplitude, fc.modes, c.general.seed,
                                               static_cast<std::uint64_t>(s), true);
        const FlowResult run = inverse_flow(cfg, u0, fo);
        double max_dF = -std::numeric_limits<double>::infinity();
        const auto& rows = run.trace.rows;
        for (std::size_t k = 1; k < rows.size(); ++k) max_dF = std::max(max_dF, rows[k].F - rows[k - 1].F);
        const EntropyReport er = entropy_monitor(cfg, run, fc.eps_tol);
        double min_d2F = std::numeric_limits<double>::infinity();
        for (double x : run.d2F) min_d2F = std::min(min_d2F, x);

        const bool F_mono = !(max_dF > fc.eps_tol);
        const bool rate_ok = er.max_rel_dev <= fc.entropy_tol;
        const bool reached = run.residual <= fc.target;
        if (!F_mono || !er.nonincreasing || !rate_ok) o.breach = true;
        if (run.status == RunStatus::cone_exit) o.cone = true;
        else if (!reached) o.stalled = true;

        runs.push_back({{"start", s},
                        {"status", to_string(run.status)},
                        {"t_end", run.t_end},
                        {"steps", run.steps},
                        {"residual0", run.residual0},
                        {"residual", run.residual},
                        {"reached_target", reached},
                        {"F0", rows.empty() ? 0.0 : rows.front().F},
                        {"F_end", rows.empty() ? 0.0 : rows.back().F},
                        {"max_F_increase", num_or_null(max_dF)},
                        {"F_nonincreasing", F_mono},
                        {"entropy_nonincreasing", er.nonincreasing},
                        {"entropy_rate_max_abs_dev", er.max_abs_dev},
                        {"entropy_rate_max_rel_dev", er.max_rel_dev},
                        {"entropy_rate_max", num_or_null(er.max_analytic)},
                        {"min_d2F", num_or_null(min_d2F)}});
        if (s == 0) {
            r.trace = run.trace;
            r.final_state = geometry_state(cfg, run.u_final);
        }
    }
    r.summary["N"] = cfg.N;
    r.summary["target"] = fc.target;
    r.summary["eps_tol"] = fc.eps_tol;
    r.summary["entropy_tol"] = fc.entropy_tol;
    r.summary["runs"] = runs;

    if (fc.length_members > 0) {
        const SphereConfig lcfg(c.general.m, fc.length_N);
        LengthOptions lo;
        lo.T = fc.length_T;
        lo.S = fc.length_members;
        lo.c_cfl = fo.c_cfl;
        const LengthReport lr = length_monotonicity(
            lcfg,
            [&](double s) { return sample(lcfg, [&](double t) { return s * fc.length_amplitude * std::cos(2.0 * t); }); },
            lo, fc.eps_tol);
        if (lr.status == RunStatus::cone_exit) o.cone = true;
        if (!lr.nonincreasing) o.breach = true;
        r.summary["length"] = {{"N", lcfg.N},
                               {"members", lo.S},
                               {"T", lo.T},
                               {"status", to_string(lr.status)},
                               {"ell0", lr.ell.empty() ? 0.0 : lr.ell.front()},
                               {"ell_end", lr.ell.empty() ? 0.0 : lr.ell.back()},
                               {"max_increase", lr.max_increase},
                               {"nonincreasing", lr.nonincreasing}};
    }
    finish(r, o);
    return r;
}

CommandResult cmd_inequalities(const ExperimentConfig& c) {
    const auto& qc = c.inequalities;
    const SphereConfig cfg = grid(c, qc.N);
    CommandResult r;
    r.summary = base_summary("inequalities", c);
    Outcome o;

    InCAOptions opt;
    opt.eps_tol = qc.eps_tol;
    opt.dense_cross_check = qc.dense_cross_check != 0;

    const Vec zero(static_cast<std::size_t>(cfg.N), 0.0);
    const GeometryState g0 = geometry_state(cfg, zero);
    const Vec c1 = sample(cfg, [](double t) { return std::cos(t); });
    const Vec c2 = sample(cfg, [](double t) { return std::cos(2.0 * t); });
    const double gap1 = andrews_gap(cfg, zero, c1);
    const double gap2 = andrews_gap(cfg, zero, c2);
    const QuadraticFormReport round = in_C_A(cfg, zero, opt);
    const double corr = std::abs(weighted_correlation(g0, round.witness, c1));
    if (!(std::abs(gap1) <= qc.equality_tol) || !(gap2 > 0.0) || !(corr >= qc.min_correlation) || !round.member)
        o.breach = true;
    r.summary["round"] = {{"gap_cos", gap1},
                          {"gap_cos2", gap2},
                          {"witness_correlation", corr},
                          {"equality_tol", qc.equality_tol},
                          {"report", to_json(round)}};
    r.extra_files["witness.csv"] = witness_csv(cfg, round);
    r.extra_files["qform.json"] = to_json(round, true).dump(2) + "\n";

    json samples = json::array();
    for (int i = 0; i < qc.samples; ++i) {
        const Vec u = random_profile(cfg, qc.amplitude, qc.modes, c.general.seed, static_cast<std::uint64_t>(i), true);
        const QuadraticFormReport q = in_C_A(cfg, u, opt);
        const bool dominance = !q.pointwise_ok || q.min_rayleigh >= -qc.eps_tol;
        if (!q.member || !q.pointwise_ok || !dominance) o.breach = true;
        json e = to_json(q);
        e["index"] = i;
        e["dominance_holds"] = dominance;
        samples.push_back(e);
    }
    r.summary["N"] = cfg.N;
    r.summary["samples"] = samples;
    r.final_state = g0;
    finish(r, o);
    return r;
}

CommandResult cmd_fuzz(const ExperimentConfig& c) {
    const auto& zc = c.fuzz;
    CommandResult r;
    r.summary = base_summary("fuzz", c);
    Outcome o;
    const ConeBox box{zc.box_lo, zc.box_hi};
    auto stats = [](const FuzzStats& s) {
        return json{{"samples", s.samples}, {"draws", s.draws}, {"checks", s.checks},
                    {"violations", s.violations}, {"worst", s.worst}};
    };

    json dims = json::array();
    for (std::size_t d = 0; d < zc.dims.size(); ++d) {
        const int n = zc.dims[d];
        const std::uint64_t base = stream_seed(c.general.seed, static_cast<std::uint64_t>(n));
        const FuzzStats cr = fuzz_croosh(n, zc.croosh_samples, stream_seed(base, 0), box);
        const FuzzStats mr = fuzz_matrix_rearrangement(n, zc.rearrangement_samples, stream_seed(base, 1), box);
        const FuzzStats ml = fuzz_maclaurin(n, zc.maclaurin_samples, stream_seed(base, 2));
        if (cr.violations || mr.violations || ml.violations) o.breach = true;

        const Vec half(static_cast<std::size_t>(n), 0.5);
        const CrooshResult eq = croosh_inequality(half, 0);
        const double dev = std::abs(eq.lhs - eq.rhs);
        const bool eq_ok = dev <= zc.equality_tol * std::max(1.0, std::abs(eq.lhs));
        if (!eq_ok) o.breach = true;
        dims.push_back({{"n", n},
                        {"croosh", stats(cr)},
                        {"matrix_rearrangement", stats(mr)},
                        {"maclaurin", stats(ml)},
                        {"equality", {{"lhs", eq.lhs}, {"rhs", eq.rhs}, {"deviation", dev}, {"ok", eq_ok}}}});
    }
    const FuzzStats vi = fuzz_vieta(zc.vieta_samples, stream_seed(c.general.seed, 1), zc.vieta_degree);
    if (vi.violations) o.breach = true;
    r.summary["dims"] = dims;
    r.summary["vieta"] = stats(vi);
    r.summary["box"] = {zc.box_lo, zc.box_hi};
    finish(r, o);
    return r;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& c) {
    if (name == "invariance") return cmd_invariance(c);
    if (name == "geodesic") return cmd_geodesic(c);
    if (name == "flow") return cmd_flow(c);
    if (name == "inequalities") return cmd_inequalities(c);
    if (name == "fuzz") return cmd_fuzz(c);
    throw ConfigError("unknown command '" + name + "'");
}

void write_outputs(const std::filesystem::path& dir, const CommandResult& r) {
    std::filesystem::create_directories(dir);
    write_atomic(dir / "summary.json", r.summary.dump(2) + "\n");
    write_atomic(dir / "trace.csv", trace_csv(r.trace));
    write_atomic(dir / "state_final.csv",
                 r.final_state ? state_csv(*r.final_state) : std::string(kStateHeader) + "\n");
    for (const auto& [name, content] : r.extra_files) write_atomic(dir / name, content);
}

} // namespace conflab
