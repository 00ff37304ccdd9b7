#include "conflab/io.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <system_error>

namespace conflab {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{}", x);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw std::system_error(errno, std::generic_category(), "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string trace_csv(const MonitorTrace& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto& r : trace.rows)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", num(r.t), num(r.F), num(r.momentum), num(r.speed2),
                           num(r.entropy), num(r.min_vm), num(r.min_L), num(r.dt));
    return out;
}

std::string state_csv(const GeometryState& g) {
    std::string out = kStateHeader;
    out += '\n';
    for (std::size_t j = 0; j < g.u.size(); ++j)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", num(g.theta[j]), num(g.u[j]), num(g.a_rad[j]),
                           num(g.a_tan[j]), num(g.vm[j]), num(g.l_rad[j]), num(g.l_tan[j]), num(g.w[j]));
    return out;
}

std::string witness_csv(const SphereConfig& cfg, const QuadraticFormReport& r) {
    std::string out = "theta,witness\n";
    for (int j = 0; j < cfg.N && static_cast<std::size_t>(j) < r.witness.size(); ++j)
        out += fmt::format("{},{}\n", num(cfg.theta(j)), num(r.witness[static_cast<std::size_t>(j)]));
    return out;
}

json to_json(const FunctionalReport& r) {
    return json{{"E", r.E}, {"F", r.F}, {"v", r.v}, {"vbar", r.vbar}, {"V", r.V}, {"sign", r.sign}};
}

json to_json(const QuadraticFormReport& r, bool with_witness) {
    json j{{"min_rayleigh", r.min_rayleigh},
           {"pointwise_ok", r.pointwise_ok},
           {"pointwise_margin", r.pointwise_margin},
           {"equality_gap", r.equality_gap},
           {"member", r.member},
           {"eps_tol", r.eps_tol},
           {"iterations", r.iterations},
           {"test_space", "rotationally symmetric"}};
    if (std::isfinite(r.dense_min)) j["dense_min"] = r.dense_min;
    if (with_witness) j["witness"] = r.witness;
    return j;
}

} // namespace conflab
