// besovflow command line: run, sweep and bench-inequalities.

#include <glob.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "besovflow/config.hpp"
#include "besovflow/run.hpp"

extern char** environ;

namespace {

namespace fs = std::filesystem;
using namespace besovflow;

unsigned worker_limit() {
    if (const char* env = std::getenv("BESOVFLOW_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        std::cerr << "warning: ignoring invalid BESOVFLOW_THREADS='" << env << "'\n";
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void print_summary(const RunSummary& sum, const RunConfig& cfg) {
    std::cout << to_string(sum.kind) << " -> " << cfg.output.directory << "\n";
    for (const auto& v : sum.verdicts) {
        std::cout << "  [" << (v.pass ? "PASS" : "FAIL") << "] " << v.claim << ": " << v.detail << "\n";
    }
}

int do_run(const std::string& path, const std::string& out_override, bool force_bench) {
    try {
        RunConfig cfg = parse_config(path);
        if (!out_override.empty()) cfg.output.directory = out_override;
        if (force_bench) cfg.experiment.kind = ExperimentKind::inequality_bench;
        const RunSummary sum = run(cfg);
        print_summary(sum, cfg);
        return exit_status(sum);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    std::vector<std::string> out;
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    return out;
}

/// Runs every matching config in its own worker process, at most
/// BESOVFLOW_THREADS at a time; each writes to <output.directory>/<config stem>.
int do_sweep(const std::string& pattern) {
    const auto files = expand_glob(pattern);
    if (files.empty()) {
        std::cerr << "error: no config matches '" << pattern << "'\n";
        return 2;
    }
    const std::string self = fs::read_symlink("/proc/self/exe").string();
    const unsigned limit = worker_limit();
    std::map<pid_t, std::string> active;
    int worst = 0;
    auto reap_one = [&] {
        int status = 0;
        const pid_t pid = ::wait(&status);
        if (pid <= 0) return;
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 2;
        std::cout << "[" << (code == 0 ? "ok" : "fail") << "] " << active[pid] << " (exit " << code << ")\n";
        worst = std::max(worst, code);
        active.erase(pid);
    };
    for (const auto& file : files) {
        std::string dir;
        try {
            dir = (fs::path(parse_config(file).output.directory) / fs::path(file).stem()).string();
        } catch (const std::exception& e) {
            std::cerr << "error: " << file << ": " << e.what() << "\n";
            worst = std::max(worst, 2);
            continue;
        }
        while (active.size() >= limit) reap_one();
        std::vector<std::string> args{self, "run", file, "--output", dir};
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        pid_t pid = 0;
        if (posix_spawn(&pid, self.c_str(), nullptr, nullptr, argv.data(), environ) != 0) {
            std::cerr << "error: cannot start worker for " << file << "\n";
            worst = std::max(worst, 2);
            continue;
        }
        active[pid] = file;
    }
    while (!active.empty()) reap_one();
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase flow decay experiments and Besov-norm diagnostics"};
    app.require_subcommand(1);

    std::string run_cfg, run_out;
    auto* run_cmd = app.add_subcommand("run", "Run one configured experiment");
    run_cmd->add_option("config", run_cfg, "Config file (key = value)")->required();
    run_cmd->add_option("--output", run_out, "Override output.directory");

    std::string sweep_glob;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run all configs matching a glob in parallel worker processes");
    sweep_cmd->add_option("config-glob", sweep_glob, "Glob pattern, quoted")->required();

    std::string bench_cfg, bench_out;
    auto* bench_cmd = app.add_subcommand("bench-inequalities", "Bernstein and product-law bench on the config grid");
    bench_cmd->add_option("config", bench_cfg, "Config file")->required();
    bench_cmd->add_option("--output", bench_out, "Override output.directory");

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd) return do_run(run_cfg, run_out, false);
    if (*sweep_cmd) return do_sweep(sweep_glob);
    return do_run(bench_cfg, bench_out, true);
}
