#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "conflab/config.hpp"
#include "conflab/errors.hpp"
#include "conflab/experiments.hpp"
#include "conflab/io.hpp"

using namespace conflab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("conflab_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(CONFLAB_EXE) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Small enough for unit-test time.
const char* kQuick = R"(
[general]
m = 2
N = 65
[inequalities]
N = 129
samples = 2
[fuzz]
croosh_samples = 500
maclaurin_samples = 500
vieta_samples = 100
rearrangement_samples = 500
dims = 4, 6
)";

} // namespace

TEST(Config, EmptyGivesDefaults) {
    const ExperimentConfig c = parse_config("");
    EXPECT_EQ(c.general.m, 2);
    EXPECT_EQ(c.general.N, 201);
    EXPECT_EQ(c.invariance.samples, 20);
    const auto d = describe(c);
    EXPECT_EQ(d.at("general.m"), "2");
    EXPECT_EQ(d.at("fuzz.dims"), "4,6,8");
    EXPECT_EQ(d.at("invariance.tol"), "0.0001");
}

TEST(Config, ParsesSectionsAndComments) {
    const ExperimentConfig c = parse_config(R"(
# leading comment
N = 101            ; general section implied
[flow]
T = 2.5
starts = 3
[fuzz]
dims = 4,8
)");
    EXPECT_EQ(c.general.N, 101);
    EXPECT_DOUBLE_EQ(c.flow.T, 2.5);
    EXPECT_EQ(c.flow.starts, 3);
    EXPECT_EQ(c.fuzz.dims, (std::vector<int>{4, 8}));
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("[general]\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[nowhere]\n"), ConfigError);
    EXPECT_THROW(parse_config("[general]\nN = 100\n"), ConfigError);
    EXPECT_THROW(parse_config("[general]\nN = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("[general]\nN 101\n"), ConfigError);
    EXPECT_THROW(parse_config("[flow]\nentropy_tol = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("[fuzz]\ndims = 4,5\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/conflab.cfg"), ConfigError);
}

TEST(Io, AtomicWriteAndCsv) {
    const fs::path d = scratch("io");
    write_atomic(d / "x.txt", "hello\n");
    EXPECT_EQ(slurp(d / "x.txt"), "hello\n");
    write_atomic(d / "x.txt", "again\n");
    EXPECT_EQ(slurp(d / "x.txt"), "again\n");
    for (const auto& e : fs::directory_iterator(d)) EXPECT_EQ(e.path().filename(), "x.txt");

    MonitorTrace t;
    t.rows.push_back({0.0, 1.5, 0.0, 0.25, -1.0, 1.5, 1.5, 1e-3});
    const std::string csv = trace_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,F,momentum,speed2,entropy,min_vm,min_L,dt");
    const SphereConfig cfg(2, 33);
    const std::string st = state_csv(geometry_state(cfg, Vec(33, 0.0)));
    EXPECT_EQ(st.substr(0, st.find('\n')), "theta,u,a_rad,a_tan,vm,l_rad,l_tan,weight");
    EXPECT_EQ(std::count(st.begin(), st.end(), '\n'), 34);
}

TEST(Io, ReportJson) {
    FunctionalReport f{1.0, 2.0, 3.0, 4.0, 5.0, -1};
    const json j = to_json(f);
    for (const char* k : {"E", "F", "v", "vbar", "V", "sign"}) EXPECT_TRUE(j.contains(k)) << k;
    QuadraticFormReport q;
    q.witness = {0.1, 0.2};
    q.dense_min = std::nan("");
    const json jq = to_json(q, true);
    EXPECT_TRUE(jq.contains("min_rayleigh"));
    EXPECT_TRUE(jq.contains("witness"));
    EXPECT_FALSE(jq.contains("dense_min"));
}

TEST(Experiments, RandomProfileDeterministicAndAdmissible) {
    const SphereConfig cfg(2, 101);
    const Vec a = random_profile(cfg, 0.1, 3, 42, 7, true);
    EXPECT_EQ(a, random_profile(cfg, 0.1, 3, 42, 7, true));
    EXPECT_NE(a, random_profile(cfg, 0.1, 3, 42, 8, true));
    EXPECT_TRUE(in_cone_Cm(cfg, a));
    for (double x : a) EXPECT_LE(std::abs(x), 0.1 + 1e-15);
}

TEST(Experiments, InvarianceCommand) {
    ExperimentConfig c = parse_config("[invariance]\nN = 101\nsamples = 4\n");
    const auto r = cmd_invariance(c);
    EXPECT_EQ(r.exit_code, kExitPass);
    EXPECT_EQ(r.summary["schema"], 1);
    EXPECT_GE(r.summary["order"].get<double>(), 1.9);
}

TEST(Cli, DefaultsEchoedAndDeterministic) {
    const fs::path d = scratch("cli");
    { std::ofstream(d / "quick.cfg") << kQuick; }
    const std::string base = "inequalities --config " + (d / "quick.cfg").string();
    ASSERT_EQ(run_cli(base + " --out " + (d / "a").string()), 0);
    ASSERT_EQ(run_cli(base + " --out " + (d / "b").string()), 0);
    for (const char* f : {"summary.json", "trace.csv", "state_final.csv", "witness.csv", "qform.json"}) {
        ASSERT_TRUE(fs::exists(d / "a" / f)) << f;
        EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
    }
    const json s = json::parse(slurp(d / "a" / "summary.json"));
    EXPECT_EQ(s["schema"], 1);
    EXPECT_EQ(s["config"]["general.N"], "65");
    EXPECT_EQ(s["config"]["flow.T"], "4");
    EXPECT_EQ(slurp(d / "a" / "trace.csv"), "t,F,momentum,speed2,entropy,min_vm,min_L,dt\n");
}

TEST(Cli, FuzzWithOverrides) {
    const fs::path d = scratch("fuzz");
    { std::ofstream(d / "quick.cfg") << kQuick; }
    ASSERT_EQ(run_cli("fuzz --config " + (d / "quick.cfg").string() + " --out " + (d / "o").string() + " --seed 9"), 0);
    const json s = json::parse(slurp(d / "o" / "summary.json"));
    EXPECT_EQ(s["seed"], 9);
    EXPECT_EQ(s["dims"][0]["equality"]["lhs"], 4.5);
}

TEST(Cli, ConfigErrorsExitFour) {
    const fs::path d = scratch("bad");
    { std::ofstream(d / "bad.cfg") << "[general]\nunknown_key = 3\n"; }
    { std::ofstream(d / "ok.cfg") << kQuick; }
    EXPECT_EQ(run_cli("fuzz --config " + (d / "bad.cfg").string() + " --out " + (d / "o").string()), 4);
    EXPECT_EQ(run_cli("fuzz --config " + (d / "missing.cfg").string() + " --out " + (d / "o").string()), 4);
    EXPECT_EQ(run_cli("fuzz --config " + (d / "ok.cfg").string() + " --out " + (d / "o").string() + " --n 5"), 4);
    EXPECT_EQ(run_cli("fuzz --config " + (d / "ok.cfg").string() + " --out " + (d / "o").string() + " --grid 64"), 4);
    EXPECT_EQ(run_cli("nonsense --config " + (d / "ok.cfg").string() + " --out " + (d / "o").string()), 4);
    EXPECT_EQ(run_cli("fuzz --out " + (d / "o").string()), 4);
}

TEST(Cli, GeodesicConeExitCode) {
    const fs::path d = scratch("cone");
    {
        std::ofstream(d / "c.cfg") << "[general]\nN = 65\n[geodesic]\namplitude = 2\ndt = 0.01\nladder_levels = 0\nbvp_count = 0\n";
    }
    EXPECT_EQ(run_cli("geodesic --config " + (d / "c.cfg").string() + " --out " + (d / "o").string()), 2);
    const json s = json::parse(slurp(d / "o" / "summary.json"));
    EXPECT_EQ(s["status"], "cone_exit");
}
