#pragma once

// Run configuration: a flat `section.key = value` text format with `#` comments.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "besovflow/analysis.hpp"
#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"
#include "besovflow/littlewood_paley.hpp"
#include "besovflow/model.hpp"
#include "besovflow/solver.hpp"

namespace besovflow {

enum class ExperimentKind { nonlinear, linear_oracle, crosscheck, inequality_bench };
enum class InitialKind { localized_bump, band_limited, besov_profile };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::nonlinear: return "nonlinear";
        case ExperimentKind::linear_oracle: return "linear_oracle";
        case ExperimentKind::crosscheck: return "crosscheck";
        default: return "inequality_bench";
    }
}

inline const char* to_string(InitialKind k) {
    switch (k) {
        case InitialKind::localized_bump: return "localized_bump";
        case InitialKind::band_limited: return "band_limited";
        default: return "besov_profile";
    }
}

/// Nonlinear and linear-oracle runs measure decay rates and need a valid data class.
inline bool is_decay_kind(ExperimentKind k) {
    return k == ExperimentKind::nonlinear || k == ExperimentKind::linear_oracle;
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::nonlinear;
    InitialKind initial = InitialKind::besov_profile;
    double p = 2.0;
    double sigma = 0.0;
    double sigma1 = 1.0;      // default d/p
    double amplitude = 1e-3;  // requested X_{p,0}
    std::uint64_t seed = 1;
    int j0 = 0;
    double c_ratio = 0.5;
    double width = 0.0;      // bump width; default box_len / 40
    double tolerance = 0.0;  // decay exponent tolerance; default 0.05 oracle, 0.2 nonlinear
    double fit_t_min = 0.0;  // 0: automatic window
    double fit_t_max = 0.0;
    int nodes = 4096;
    double r_min = 1e-8;
    int samples = 200;
    double lyapunov_margin = 10.0;
    double negative_margin = 3.0;
    double crosscheck_tol = 1e-6;
    int corpus_size = 20;
    double lambda = 0.0;

    bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    bool plot = true;
    bool dump = false;

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    ModelConstants model;
    Grid grid;
    SolverConfig solver;
    ExperimentConfig experiment;
    OutputConfig output;

    bool operator==(const RunConfig& o) const {
        const auto& a = model;
        const auto& b = o.model;
        return a.C0 == b.C0 && a.k0 == b.k0 && a.a0 == b.a0 && a.alpha == b.alpha && a.m_inf == b.m_inf &&
               a.n_inf == b.n_inf && grid.dim == o.grid.dim && grid.n == o.grid.n &&
               grid.box_len == o.grid.box_len && solver.dt == o.solver.dt && solver.t_end == o.solver.t_end &&
               solver.dealias == o.solver.dealias && solver.output_every == o.solver.output_every &&
               solver.cfl == o.solver.cfl && experiment == o.experiment && output == o.output;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

struct KeySlot {
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<std::pair<std::string, KeySlot>>& key_table() {
    static const std::vector<std::pair<std::string, KeySlot>> table = [] {
        std::vector<std::pair<std::string, KeySlot>> t;
        auto real = [&t](const char* name, auto member) {
            t.push_back({name,
                         {[member](RunConfig& c, const std::string& k, const std::string& v) {
                              member(c) = parse_double(k, v);
                          },
                          [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); }}});
        };
        auto integer = [&t](const char* name, auto member) {
            t.push_back({name,
                         {[member](RunConfig& c, const std::string& k, const std::string& v) {
                              using T = std::remove_reference_t<decltype(member(c))>;
                              const long long x = parse_int(k, v);
                              if (std::is_unsigned_v<T> && x < 0) throw ConfigError(k + ": must be >= 0");
                              member(c) = static_cast<T>(x);
                          },
                          [member](const RunConfig& c) {
                              return std::to_string(member(const_cast<RunConfig&>(c)));
                          }}});
        };
        auto boolean = [&t](const char* name, auto member) {
            t.push_back({name,
                         {[member](RunConfig& c, const std::string& k, const std::string& v) {
                              member(c) = parse_bool(k, v);
                          },
                          [member](const RunConfig& c) {
                              return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false");
                          }}});
        };

        real("model.C0", [](RunConfig& c) -> double& { return c.model.C0; });
        real("model.k0", [](RunConfig& c) -> double& { return c.model.k0; });
        real("model.a0", [](RunConfig& c) -> double& { return c.model.a0; });
        real("model.alpha", [](RunConfig& c) -> double& { return c.model.alpha; });
        real("model.m_inf", [](RunConfig& c) -> double& { return c.model.m_inf; });
        real("model.n_inf", [](RunConfig& c) -> double& { return c.model.n_inf; });

        integer("grid.dim", [](RunConfig& c) -> int& { return c.grid.dim; });
        integer("grid.n", [](RunConfig& c) -> int& { return c.grid.n; });
        real("grid.box_len", [](RunConfig& c) -> double& { return c.grid.box_len; });

        real("solver.dt", [](RunConfig& c) -> double& { return c.solver.dt; });
        real("solver.t_end", [](RunConfig& c) -> double& { return c.solver.t_end; });
        boolean("solver.dealias", [](RunConfig& c) -> bool& { return c.solver.dealias; });
        integer("solver.output_every", [](RunConfig& c) -> int& { return c.solver.output_every; });
        real("solver.cfl", [](RunConfig& c) -> double& { return c.solver.cfl; });

        t.push_back({"experiment.kind",
                     {[](RunConfig& c, const std::string& k, const std::string& v) {
                          if (v == "nonlinear") c.experiment.kind = ExperimentKind::nonlinear;
                          else if (v == "linear_oracle") c.experiment.kind = ExperimentKind::linear_oracle;
                          else if (v == "crosscheck") c.experiment.kind = ExperimentKind::crosscheck;
                          else if (v == "inequality_bench") c.experiment.kind = ExperimentKind::inequality_bench;
                          else
                              throw ConfigError(k + ": unknown kind '" + v +
                                                "' (nonlinear, linear_oracle, crosscheck, inequality_bench)");
                      },
                      [](const RunConfig& c) { return std::string(to_string(c.experiment.kind)); }}});
        t.push_back({"experiment.initial",
                     {[](RunConfig& c, const std::string& k, const std::string& v) {
                          if (v == "localized_bump") c.experiment.initial = InitialKind::localized_bump;
                          else if (v == "band_limited") c.experiment.initial = InitialKind::band_limited;
                          else if (v == "besov_profile") c.experiment.initial = InitialKind::besov_profile;
                          else
                              throw ConfigError(k + ": unknown initial data '" + v +
                                                "' (localized_bump, band_limited, besov_profile)");
                      },
                      [](const RunConfig& c) { return std::string(to_string(c.experiment.initial)); }}});
        real("experiment.p", [](RunConfig& c) -> double& { return c.experiment.p; });
        real("experiment.sigma", [](RunConfig& c) -> double& { return c.experiment.sigma; });
        real("experiment.sigma1", [](RunConfig& c) -> double& { return c.experiment.sigma1; });
        real("experiment.amplitude", [](RunConfig& c) -> double& { return c.experiment.amplitude; });
        integer("experiment.seed", [](RunConfig& c) -> std::uint64_t& { return c.experiment.seed; });
        integer("experiment.j0", [](RunConfig& c) -> int& { return c.experiment.j0; });
        real("experiment.c_ratio", [](RunConfig& c) -> double& { return c.experiment.c_ratio; });
        real("experiment.width", [](RunConfig& c) -> double& { return c.experiment.width; });
        real("experiment.tolerance", [](RunConfig& c) -> double& { return c.experiment.tolerance; });
        real("experiment.fit_t_min", [](RunConfig& c) -> double& { return c.experiment.fit_t_min; });
        real("experiment.fit_t_max", [](RunConfig& c) -> double& { return c.experiment.fit_t_max; });
        integer("experiment.nodes", [](RunConfig& c) -> int& { return c.experiment.nodes; });
        real("experiment.r_min", [](RunConfig& c) -> double& { return c.experiment.r_min; });
        integer("experiment.samples", [](RunConfig& c) -> int& { return c.experiment.samples; });
        real("experiment.lyapunov_margin", [](RunConfig& c) -> double& { return c.experiment.lyapunov_margin; });
        real("experiment.negative_margin", [](RunConfig& c) -> double& { return c.experiment.negative_margin; });
        real("experiment.crosscheck_tol", [](RunConfig& c) -> double& { return c.experiment.crosscheck_tol; });
        integer("experiment.corpus_size", [](RunConfig& c) -> int& { return c.experiment.corpus_size; });
        real("experiment.lambda", [](RunConfig& c) -> double& { return c.experiment.lambda; });

        t.push_back({"output.directory",
                     {[](RunConfig& c, const std::string& k, const std::string& v) {
                          if (v.empty()) throw ConfigError(k + ": must not be empty");
                          c.output.directory = v;
                      },
                      [](const RunConfig& c) { return c.output.directory; }}});
        boolean("output.plot", [](RunConfig& c) -> bool& { return c.output.plot; });
        boolean("output.dump", [](RunConfig& c) -> bool& { return c.output.dump; });
        return t;
    }();
    return table;
}

inline const KeySlot* find_key(const std::string& key) {
    for (const auto& [name, slot] : key_table()) {
        if (name == key) return &slot;
    }
    return nullptr;
}

/// Prefixes a ValidationError/ConfigError message with the offending key path.
template <class Fn>
void with_key(const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        throw ValidationError(key + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

} // namespace detail

/// Applies defaults that depend on other keys and checks every constraint.
/// `explicit_keys` lists the keys present in the source text.
inline void resolve_and_validate(RunConfig& cfg, const std::set<std::string>& explicit_keys) {
    auto has = [&](const char* k) { return explicit_keys.count(k) > 0; };
    auto& ex = cfg.experiment;
    const bool timed = ex.kind != ExperimentKind::inequality_bench;

    for (const char* k : {"grid.dim", "grid.n", "grid.box_len"}) {
        if (!has(k)) throw ConfigError(std::string(k) + ": required key missing");
    }
    if (timed && !has("solver.t_end")) throw ConfigError("solver.t_end: required key missing");

    std::optional<ModelParams> params;
    detail::with_key("model", [&] { params.emplace(cfg.model); });
    if (cfg.grid.dim < 1 || cfg.grid.dim > 3) throw ConfigError("grid.dim: must be 1, 2 or 3");
    detail::with_key("grid", [&] { cfg.grid.validate(); });
    detail::with_key("experiment.p", [&] { validate_hybrid_p(ex.p, cfg.grid.dim); });

    if (!has("experiment.sigma1")) ex.sigma1 = cfg.grid.dim / ex.p;
    if (is_decay_kind(ex.kind)) {
        detail::with_key("experiment.sigma1", [&] { validate_decay_class(ex.sigma1, cfg.grid.dim, ex.p); });
        detail::with_key("experiment.sigma",
                         [&] { predicted_exponent(ex.sigma, ex.sigma1, cfg.grid.dim, ex.p, Quantity::P); });
    }
    if (ex.kind == ExperimentKind::linear_oracle && ex.p != 2.0) {
        throw ConfigError("experiment.p: the linear oracle evaluates L2-based norms only (p = 2)");
    }
    if (!(ex.amplitude >= 0.0) || !std::isfinite(ex.amplitude)) {
        throw ConfigError("experiment.amplitude: must be finite and >= 0");
    }
    if (!has("experiment.width")) ex.width = cfg.grid.box_len / 40.0;
    if (!(ex.width > 0.0)) throw ConfigError("experiment.width: must be > 0");
    if (!has("experiment.tolerance")) ex.tolerance = ex.kind == ExperimentKind::linear_oracle ? 0.05 : 0.2;
    if (!(ex.tolerance > 0.0)) throw ConfigError("experiment.tolerance: must be > 0");
    if (ex.fit_t_min < 0.0 || ex.fit_t_max < 0.0 || (ex.fit_t_max > 0.0 && ex.fit_t_max <= ex.fit_t_min)) {
        throw ConfigError("experiment.fit_t_min/fit_t_max: need 0 <= fit_t_min < fit_t_max (0 = automatic)");
    }
    if (ex.nodes < 16) throw ConfigError("experiment.nodes: must be >= 16");
    if (!(ex.r_min > 0.0 && ex.r_min < 1.0)) throw ConfigError("experiment.r_min: must lie in (0, 1)");
    if (ex.samples < 10) throw ConfigError("experiment.samples: must be >= 10");
    if (!(ex.lyapunov_margin >= 1.0)) throw ConfigError("experiment.lyapunov_margin: must be >= 1");
    if (!(ex.negative_margin >= 1.0)) throw ConfigError("experiment.negative_margin: must be >= 1");
    if (!(ex.crosscheck_tol > 0.0)) throw ConfigError("experiment.crosscheck_tol: must be > 0");
    if (ex.corpus_size < 1) throw ConfigError("experiment.corpus_size: must be >= 1");
    if (ex.lambda < 0.0) throw ConfigError("experiment.lambda: must be >= 0 (0 = automatic)");
    if (ex.c_ratio < 0.0) throw ConfigError("experiment.c_ratio: must be >= 0");
    detail::with_key("experiment.j0", [&] { build_decomposition(cfg.grid, ex.j0); });

    if (ex.kind == ExperimentKind::nonlinear) {
        const double t_box = box_artifact_time(cfg.grid.box_len, *params);
        if (!(cfg.solver.t_end < t_box)) {
            std::ostringstream msg;
            msg << "solver.t_end: " << cfg.solver.t_end << " is not below the box-artifact bound "
                << "0.1 alpha L^2 / (4 pi^2 kappa2^2) = " << t_box << "; enlarge grid.box_len or model.alpha";
            throw ConfigError(msg.str());
        }
    }
    if (timed && ex.kind != ExperimentKind::linear_oracle) {
        if (!has("solver.dt")) cfg.solver.dt = 0.5 * cfg.solver.cfl * cfg.grid.dx() / params->kappa2();
        // The initial speed is not known before data generation; the limit is re-checked at run time.
        detail::with_key("solver", [&] { cfg.solver.validate(cfg.grid, params->kappa2(), 0.0); });
    } else if (timed) {
        if (!(cfg.solver.t_end > 0.0)) throw ConfigError("solver.t_end: must be > 0");
    }
}

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<text>") {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto* slot = detail::find_key(key);
        if (!slot) throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        slot->set(cfg, key, value);
    }
    resolve_and_validate(cfg, seen);
    return cfg;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

/// Every key with its resolved value; parsing the result reproduces `cfg`.
inline std::string resolved_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# resolved configuration\n";
    std::string section;
    for (const auto& [name, slot] : detail::key_table()) {
        const std::string sec = name.substr(0, name.find('.'));
        if (sec != section) {
            if (!section.empty()) os << "\n";
            section = sec;
        }
        os << name << " = " << slot.get(cfg) << "\n";
    }
    return os.str();
}

inline void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << resolved_config_text(cfg);
}

} // namespace besovflow
