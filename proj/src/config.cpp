#include "conflab/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "conflab/errors.hpp"

namespace conflab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v, const std::string& key) {
    T out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    auto [p, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || p != last)
        throw ConfigError("config: cannot parse '" + v + "' for " + key);
    return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(trim(item), key));
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

std::string fmt_num(double x) { return fmt::format("{}", x); }

struct Entry {
    std::function<void(const std::string&, const std::string&)> set;
    std::function<std::string()> get;
};

template <class T>
Entry bind(T& field) {
    Entry e;
    e.set = [&field](const std::string& v, const std::string& key) {
        if constexpr (std::is_same_v<T, std::vector<int>>) field = parse_int_list(v, key);
        else field = parse_number<T>(v, key);
    };
    e.get = [&field]() -> std::string {
        if constexpr (std::is_same_v<T, std::vector<int>>) {
            std::string s;
            for (std::size_t i = 0; i < field.size(); ++i) s += (i ? "," : "") + std::to_string(field[i]);
            return s;
        } else if constexpr (std::is_floating_point_v<T>) {
            return fmt_num(field);
        } else {
            return std::to_string(field);
        }
    };
    return e;
}

std::map<std::string, Entry> registry(ExperimentConfig& c) {
    std::map<std::string, Entry> r;
    r["general.m"] = bind(c.general.m);
    r["general.N"] = bind(c.general.N);
    r["general.seed"] = bind(c.general.seed);
    r["general.Q"] = bind(c.general.Q);

    r["invariance.N"] = bind(c.invariance.N);
    r["invariance.samples"] = bind(c.invariance.samples);
    r["invariance.amplitude"] = bind(c.invariance.amplitude);
    r["invariance.modes"] = bind(c.invariance.modes);
    r["invariance.tol"] = bind(c.invariance.tol);
    r["invariance.min_order"] = bind(c.invariance.min_order);

    r["geodesic.N"] = bind(c.geodesic.N);
    r["geodesic.T"] = bind(c.geodesic.T);
    r["geodesic.dt"] = bind(c.geodesic.dt);
    r["geodesic.amplitude"] = bind(c.geodesic.amplitude);
    r["geodesic.record_every"] = bind(c.geodesic.record_every);
    r["geodesic.drift_tol"] = bind(c.geodesic.drift_tol);
    r["geodesic.ladder_dt"] = bind(c.geodesic.ladder_dt);
    r["geodesic.ladder_levels"] = bind(c.geodesic.ladder_levels);
    r["geodesic.min_ratio"] = bind(c.geodesic.min_ratio);
    r["geodesic.bvp_count"] = bind(c.geodesic.bvp_count);
    r["geodesic.bvp_N"] = bind(c.geodesic.bvp_N);
    r["geodesic.bvp_dt"] = bind(c.geodesic.bvp_dt);
    r["geodesic.bvp_amplitude"] = bind(c.geodesic.bvp_amplitude);
    r["geodesic.bvp_modes"] = bind(c.geodesic.bvp_modes);

    r["flow.N"] = bind(c.flow.N);
    r["flow.T"] = bind(c.flow.T);
    r["flow.c_cfl"] = bind(c.flow.c_cfl);
    r["flow.starts"] = bind(c.flow.starts);
    r["flow.amplitude"] = bind(c.flow.amplitude);
    r["flow.modes"] = bind(c.flow.modes);
    r["flow.target"] = bind(c.flow.target);
    r["flow.record_every"] = bind(c.flow.record_every);
    r["flow.eps_tol"] = bind(c.flow.eps_tol);
    r["flow.entropy_tol"] = bind(c.flow.entropy_tol);
    r["flow.length_N"] = bind(c.flow.length_N);
    r["flow.length_members"] = bind(c.flow.length_members);
    r["flow.length_T"] = bind(c.flow.length_T);
    r["flow.length_amplitude"] = bind(c.flow.length_amplitude);

    r["inequalities.N"] = bind(c.inequalities.N);
    r["inequalities.samples"] = bind(c.inequalities.samples);
    r["inequalities.amplitude"] = bind(c.inequalities.amplitude);
    r["inequalities.modes"] = bind(c.inequalities.modes);
    r["inequalities.eps_tol"] = bind(c.inequalities.eps_tol);
    r["inequalities.equality_tol"] = bind(c.inequalities.equality_tol);
    r["inequalities.min_correlation"] = bind(c.inequalities.min_correlation);
    r["inequalities.dense_cross_check"] = bind(c.inequalities.dense_cross_check);

    r["fuzz.croosh_samples"] = bind(c.fuzz.croosh_samples);
    r["fuzz.maclaurin_samples"] = bind(c.fuzz.maclaurin_samples);
    r["fuzz.vieta_samples"] = bind(c.fuzz.vieta_samples);
    r["fuzz.rearrangement_samples"] = bind(c.fuzz.rearrangement_samples);
    r["fuzz.dims"] = bind(c.fuzz.dims);
    r["fuzz.box_lo"] = bind(c.fuzz.box_lo);
    r["fuzz.box_hi"] = bind(c.fuzz.box_hi);
    r["fuzz.vieta_degree"] = bind(c.fuzz.vieta_degree);
    r["fuzz.equality_tol"] = bind(c.fuzz.equality_tol);
    return r;
}

void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError("config: " + what);
}

} // namespace

void ExperimentConfig::validate() const {
    require(general.m >= 2, "general.m must be >= 2");
    require(general.N >= 33 && general.N % 2 == 1, "general.N must be odd and >= 33");
    require(general.Q >= 2 && general.Q <= 128, "general.Q must lie in [2, 128]");
    auto grid = [](int N, const char* key) {
        require(N == 0 || (N >= 33 && N % 2 == 1), std::string(key) + " must be 0 or odd and >= 33");
    };
    grid(invariance.N, "invariance.N");
    grid(geodesic.N, "geodesic.N");
    grid(flow.N, "flow.N");
    grid(inequalities.N, "inequalities.N");
    require(geodesic.bvp_N >= 33 && geodesic.bvp_N % 2 == 1, "geodesic.bvp_N must be odd and >= 33");
    require(flow.length_N >= 33 && flow.length_N % 2 == 1, "flow.length_N must be odd and >= 33");
    require(invariance.samples > 0, "invariance.samples must be positive");
    require(invariance.amplitude > 0.0 && geodesic.bvp_amplitude > 0.0 && flow.amplitude >= 0.0 &&
                inequalities.amplitude > 0.0 && flow.length_amplitude > 0.0,
            "amplitudes must be positive");
    require(invariance.modes >= 1 && geodesic.bvp_modes >= 1 && flow.modes >= 1 && inequalities.modes >= 1,
            "modes must be >= 1");
    require(invariance.tol > 0.0 && invariance.min_order > 0.0, "invariance tolerances must be positive");
    require(geodesic.T > 0.0 && geodesic.dt > 0.0 && geodesic.bvp_dt > 0.0 && geodesic.ladder_dt > 0.0,
            "geodesic times must be positive");
    require(geodesic.record_every > 0, "geodesic.record_every must be positive");
    require(geodesic.drift_tol > 0.0 && geodesic.min_ratio > 0.0, "geodesic tolerances must be positive");
    require(geodesic.ladder_levels == 0 || geodesic.ladder_levels >= 2, "geodesic.ladder_levels must be 0 or >= 2");
    require(geodesic.bvp_count >= 0, "geodesic.bvp_count must be non-negative");
    require(flow.T > 0.0 && flow.length_T > 0.0, "flow times must be positive");
    require(flow.c_cfl >= 0.0, "flow.c_cfl must be non-negative (0 selects the default)");
    require(flow.starts >= 1, "flow.starts must be >= 1");
    require(flow.target > 0.0 && flow.eps_tol > 0.0 && flow.entropy_tol > 0.0, "flow tolerances must be positive");
    require(flow.record_every > 0, "flow.record_every must be positive");
    require(flow.length_members == 0 || flow.length_members >= 3, "flow.length_members must be 0 or >= 3");
    require(inequalities.samples >= 0, "inequalities.samples must be non-negative");
    require(inequalities.eps_tol > 0.0 && inequalities.equality_tol > 0.0, "inequalities tolerances must be positive");
    require(inequalities.min_correlation > 0.0 && inequalities.min_correlation <= 1.0,
            "inequalities.min_correlation must lie in (0, 1]");
    require(fuzz.croosh_samples >= 0 && fuzz.maclaurin_samples >= 0 && fuzz.vieta_samples >= 0 &&
                fuzz.rearrangement_samples >= 0,
            "fuzz sample counts must be non-negative");
    for (int n : fuzz.dims) require(n >= 4 && n % 2 == 0, "fuzz.dims entries must be even and >= 4");
    require(fuzz.box_lo < fuzz.box_hi, "fuzz.box_lo must be below fuzz.box_hi");
    require(fuzz.vieta_degree >= 2, "fuzz.vieta_degree must be >= 2");
    require(fuzz.equality_tol > 0.0, "fuzz.equality_tol must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    auto reg = registry(c);
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(fmt::format("config line {}: malformed section header", lineno));
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"general", "invariance", "geodesic", "flow", "inequalities", "fuzz"};
            bool ok = false;
            for (const char* k : known) ok = ok || section == k;
            if (!ok) throw ConfigError(fmt::format("config line {}: unknown section [{}]", lineno, section));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = (section.empty() ? std::string("general") : section) + "." + key;
        auto it = reg.find(full);
        if (it == reg.end()) throw ConfigError(fmt::format("config line {}: unknown key '{}'", lineno, full));
        it->second.set(value, full);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::map<std::string, std::string> describe(const ExperimentConfig& c) {
    ExperimentConfig copy = c;
    std::map<std::string, std::string> out;
    for (auto& [k, e] : registry(copy)) out[k] = e.get();
    return out;
}

} // namespace conflab
