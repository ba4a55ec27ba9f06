#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "besovflow/dump.hpp"
#include "besovflow/initial_data.hpp"
#include "besovflow/run.hpp"

using namespace besovflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("besovflow_test_run_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

RunConfig oracle_config(const fs::path& out) {
    return parse_config_text("grid.dim = 2\ngrid.n = 64\ngrid.box_len = 100\nsolver.t_end = 10000\n"
                             "experiment.kind = linear_oracle\nexperiment.nodes = 512\nexperiment.samples = 40\n"
                             "experiment.fit_t_min = 100\noutput.directory = " +
                             out.string() + "\n");
}

RunConfig small_nonlinear(const std::string& extra = "") {
    return parse_config_text("grid.dim = 2\ngrid.n = 32\ngrid.box_len = 20\nsolver.t_end = 0.5\n"
                             "experiment.amplitude = 0.01\n" +
                             extra);
}

} // namespace

TEST(RunOracle, WritesArtifactsAndPasses) {
    const fs::path dir = scratch("oracle");
    const RunConfig cfg = oracle_config(dir);
    const RunSummary sum = run(cfg);
    EXPECT_EQ(exit_status(sum), 0);
    for (const char* f : {"norms.csv", "decay.csv", "verdicts.json", "resolved.cfg", "decay_P.svg", "decay_u.svg"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(first_line(dir / "norms.csv"), "t,P_low,u_low,c_low,high,int_P,int_u,int_high,mass_drift,gas_drift,c_maxnorm");
    EXPECT_EQ(first_line(dir / "decay.csv"), "t,quantity,sigma,lp_norm");
    EXPECT_TRUE(parse_config(dir / "resolved.cfg") == cfg);

    const auto j = nlohmann::json::parse(slurp(dir / "verdicts.json"));
    EXPECT_EQ(j["kind"], "linear_oracle");
    EXPECT_TRUE(j["all_pass"].get<bool>());
    const Verdict* v = sum.find("decay_P");
    ASSERT_NE(v, nullptr);
    EXPECT_NEAR(v->fitted, -0.5, 0.05);
    EXPECT_EQ(v->predicted, -0.5);
    EXPECT_EQ(sum.norms.size(), 40u);
}

TEST(RunOracle, TinyToleranceFailsWithExitOne) {
    const fs::path dir = scratch("oracle_tight");
    RunConfig cfg = oracle_config(dir);
    cfg.experiment.tolerance = 1e-9;
    const RunSummary sum = run(cfg);
    EXPECT_EQ(exit_status(sum), 1);
    const auto j = nlohmann::json::parse(slurp(dir / "verdicts.json"));
    EXPECT_FALSE(j["all_pass"].get<bool>());
}

TEST(RunOracle, Deterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run(oracle_config(a));
    run(oracle_config(b));
    EXPECT_EQ(slurp(a / "norms.csv"), slurp(b / "norms.csv"));
    EXPECT_EQ(slurp(a / "decay.csv"), slurp(b / "decay.csv"));
}

TEST(RunNonlinear, SmallRunWithDumps) {
    const fs::path dir = scratch("nonlinear");
    RunConfig cfg = small_nonlinear("output.dump = true\noutput.plot = false\nsolver.output_every = 5\n");
    cfg.output.directory = dir.string();
    const RunSummary sum = run(cfg);
    const Verdict* done = sum.find("solver_completed");
    ASSERT_NE(done, nullptr);
    EXPECT_TRUE(done->pass) << done->detail;
    EXPECT_FALSE(fs::exists(dir / "decay_P.svg"));
    const Dump d0 = read_dump(dir / "initial.bin");
    const Dump d1 = read_dump(dir / "final.bin");
    EXPECT_EQ(d0.grid, cfg.grid);
    EXPECT_EQ(d0.fields.size(), 4u);
    EXPECT_EQ(d0.time, 0.0);
    EXPECT_NEAR(d1.time, 0.5, 1e-12);
    const TState s0 = gen_initial(cfg);
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) EXPECT_EQ(d0.fields[0][i], s0.Pt[i]);
    for (const auto& row : sum.norms) {
        EXPECT_LT(row.mass_drift, 1e-10);
        EXPECT_LT(row.gas_drift, 1e-10);
    }
    // one sample per output_every steps plus the initial one
    const long steps = std::lround(std::ceil(cfg.solver.t_end / cfg.solver.dt));
    EXPECT_GE(sum.norms.size(), static_cast<std::size_t>(steps / 5));
}

TEST(InitialData, ZeroAmplitudeIsEquilibrium) {
    RunConfig cfg = small_nonlinear();
    cfg.experiment.amplitude = 0.0;
    EXPECT_EQ(l2_norm(gen_initial(cfg)), 0.0);
}

TEST(InitialData, NormalizedToRequestedSize) {
    for (InitialKind kind : {InitialKind::localized_bump, InitialKind::band_limited, InitialKind::besov_profile}) {
        for (double eps : {1e-3, 1e-2}) {
            RunConfig cfg = small_nonlinear();
            cfg.experiment.initial = kind;
            cfg.experiment.amplitude = eps;
            const TState s = gen_initial(cfg);
            const double X = smallness_norm(s, cfg.experiment.p, build_decomposition(cfg.grid, cfg.experiment.j0));
            EXPECT_NEAR(X / eps, 1.0, 0.01) << to_string(kind);
        }
    }
}

TEST(InitialData, SeedControlsRandomData) {
    RunConfig cfg = small_nonlinear("experiment.initial = band_limited\nexperiment.seed = 3\n");
    const TState a = gen_initial(cfg), b = gen_initial(cfg);
    EXPECT_EQ(l2_distance(a, b), 0.0);
    cfg.experiment.seed = 4;
    EXPECT_GT(l2_distance(a, gen_initial(cfg)), 0.0);
}

TEST(InitialData, LargeAmplitudeRejected) {
    RunConfig cfg = small_nonlinear();
    cfg.experiment.amplitude = 1e3;
    EXPECT_THROW(gen_initial(cfg), ConfigError);
}

#ifdef BESOVFLOW_CLI

namespace {

int shell(const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST(Cli, RunBenchAndErrors) {
    const fs::path dir = scratch("cli");
    const std::string cli = BESOVFLOW_CLI;
    write_text(dir / "oracle.cfg", "grid.dim = 2\ngrid.n = 64\ngrid.box_len = 100\nsolver.t_end = 10000\n"
                                   "experiment.kind = linear_oracle\nexperiment.nodes = 256\nexperiment.samples = 30\n"
                                   "experiment.fit_t_min = 100\n");
    EXPECT_EQ(shell(cli + " run " + (dir / "oracle.cfg").string() + " --output " + (dir / "o").string() + " > /dev/null"), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "verdicts.json"));

    write_text(dir / "bench.cfg", "grid.dim = 2\ngrid.n = 32\ngrid.box_len = 6.283185307179586\n"
                                  "experiment.corpus_size = 3\n");
    EXPECT_EQ(shell(cli + " bench-inequalities " + (dir / "bench.cfg").string() + " --output " + (dir / "b").string() +
                    " > /dev/null"),
              2);  // t_end missing for a nonlinear config
    write_text(dir / "bench.cfg", "grid.dim = 2\ngrid.n = 32\ngrid.box_len = 6.283185307179586\n"
                                  "experiment.kind = inequality_bench\nexperiment.corpus_size = 3\n");
    shell(cli + " bench-inequalities " + (dir / "bench.cfg").string() + " --output " + (dir / "b").string() +
          " > /dev/null");
    const auto rep = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
    EXPECT_EQ(rep["n"], 32);
    EXPECT_EQ(rep["n_half"], 16);

    write_text(dir / "bad.cfg", "grid.dim = 2\nbogus = 1\n");
    EXPECT_EQ(shell(cli + " run " + (dir / "bad.cfg").string() + " 2> " + (dir / "err.txt").string()), 2);
    EXPECT_NE(slurp(dir / "err.txt").find("unknown key 'bogus'"), std::string::npos);
}

TEST(Cli, SweepRunsEveryConfig) {
    const fs::path dir = scratch("sweep");
    const std::string cli = BESOVFLOW_CLI;
    for (int k = 0; k < 3; ++k) {
        write_text(dir / ("s" + std::to_string(k) + ".cfg"),
                   "grid.dim = 2\ngrid.n = 64\ngrid.box_len = 100\nsolver.t_end = 10000\n"
                   "experiment.kind = linear_oracle\nexperiment.nodes = 128\nexperiment.samples = 40\n"
                   "experiment.fit_t_min = 100\nexperiment.sigma1 = " +
                       std::to_string(0.6 + 0.1 * k) + "\noutput.plot = false\noutput.directory = " +
                       (dir / "out").string() + "\n");
    }
    EXPECT_EQ(shell("BESOVFLOW_THREADS=1 " + cli + " sweep '" + (dir / "s*.cfg").string() + "' > /dev/null"), 0);
    for (int k = 0; k < 3; ++k) {
        const fs::path out = dir / "out" / ("s" + std::to_string(k));
        EXPECT_TRUE(fs::exists(out / "norms.csv")) << out;
        EXPECT_EQ(parse_config(out / "resolved.cfg").experiment.sigma1, parse_config(dir / ("s" + std::to_string(k) + ".cfg")).experiment.sigma1);
    }
    EXPECT_EQ(shell(cli + " sweep '" + (dir / "none*.cfg").string() + "' 2> /dev/null"), 2);
}

#endif
