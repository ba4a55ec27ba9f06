#pragma once

// Initial perturbations of the far-field equilibrium, normalized so that the
// hybrid size X_{p,0} equals the requested amplitude.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "besovflow/analysis.hpp"
#include "besovflow/config.hpp"
#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"
#include "besovflow/littlewood_paley.hpp"
#include "besovflow/state.hpp"

namespace besovflow {

namespace detail {

/// Real field with unit-modulus random Fourier phases shaped by |amp(|ξ|)|.
/// The mean and Nyquist modes are zero.
template <class Amp>
Field random_phase_field(const Grid& g, std::mt19937_64& rng, Amp&& amp) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(g.size());
    for (auto& v : noise) v = normal(rng);
    const Field white(g, std::move(noise));
    const auto& spec = white.spectrum();
    const auto table = wave_table(g);
    std::vector<cplx> out(spec.size(), cplx(0.0));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double k = table->kmag[i];
        if (k == 0.0 || table->nyquist[i]) continue;
        const double mod = std::abs(spec[i]);
        if (mod == 0.0) continue;
        out[i] = spec[i] / mod * amp(k);
    }
    return Field::from_spectrum(g, out);
}

inline Field minus_mean(Field f) {
    const double mu = f.mean();
    for (auto& v : f.mutable_values()) v -= mu;
    return f;
}

inline TState scaled(const TState& s, double a) {
    TState out = s;
    out.Pt = besovflow::scaled(s.Pt, a);
    out.ct = besovflow::scaled(s.ct, a);
    for (auto& f : out.ut) f = besovflow::scaled(f, a);
    return out;
}

} // namespace detail

/// Unit-size shape of the requested kind (before normalization).
inline TState initial_shape(const RunConfig& cfg) {
    const Grid& g = cfg.grid;
    const auto& ex = cfg.experiment;
    TState s = TState::zero(g);
    std::mt19937_64 rng(ex.seed);
    switch (ex.initial) {
        case InitialKind::localized_bump: {
            const double c = 0.5 * g.box_len;
            const double w = ex.width;
            auto bump = [&](std::span<const double> x) {
                double r2 = 0.0;
                for (double xi : x) r2 += (xi - c) * (xi - c);
                return std::exp(-0.5 * r2 / (w * w));
            };
            const Field b = sample(g, bump);
            s.Pt = detail::minus_mean(b);
            s.ut[0] = sample(g, [&](std::span<const double> x) { return 0.5 * bump(x) * (x[0] - c) / w; });
            s.ct = scaled(s.Pt, ex.c_ratio);
            break;
        }
        case InitialKind::band_limited: {
            const int j0 = ex.j0;
            auto amp = [j0](double k) { return profile::chi_j(k, j0); };
            s.Pt = detail::random_phase_field(g, rng, amp);
            for (auto& f : s.ut) f = detail::random_phase_field(g, rng, amp);
            s.ct = scaled(detail::random_phase_field(g, rng, amp), ex.c_ratio);
            break;
        }
        case InitialKind::besov_profile: {
            const double expo = ex.sigma1 - 0.5 * g.dim;
            auto amp = [expo](double k) { return k <= 1.0 ? std::pow(k, expo) : 0.0; };
            s.Pt = detail::random_phase_field(g, rng, amp);
            s.ct = scaled(detail::random_phase_field(g, rng, amp), ex.c_ratio);
            break;
        }
    }
    return s;
}

/// Initial perturbation with X_{p,0} = ε (within 1%); ε = 0 gives the equilibrium.
inline TState gen_initial(const RunConfig& cfg) {
    const Grid& g = cfg.grid;
    const auto& ex = cfg.experiment;
    if (ex.amplitude == 0.0) return TState::zero(g);
    const auto dec = build_decomposition(g, ex.j0);
    TState s = initial_shape(cfg);
    for (int iter = 0; iter < 4; ++iter) {
        const double X = smallness_norm(s, ex.p, dec);
        if (!(X > 0.0) || !std::isfinite(X)) {
            throw ConfigError("initial data: requested amplitude unreachable, the datum has no resolved modes");
        }
        if (std::abs(X - ex.amplitude) <= 1e-3 * ex.amplitude) break;
        s = detail::scaled(s, ex.amplitude / X);
    }
    const double X = smallness_norm(s, ex.p, dec);
    if (std::abs(X - ex.amplitude) > 0.01 * ex.amplitude) {
        std::ostringstream msg;
        msg << "initial data: normalization reached X_p0=" << X << " for requested " << ex.amplitude;
        throw ConfigError(msg.str());
    }
    const ModelParams params(cfg.model);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double Pt = s.Pt[i];
        const double ct = s.ct[i];
        double m = 0.0;
        try {
            m = mass_from_pressure(Pt + params.P_inf(), ct, params);
        } catch (const DomainError&) {
            m = -1.0;
        }
        if (!params.admissible(m, ct)) {
            std::ostringstream msg;
            msg << "initial data: amplitude " << ex.amplitude << " leaves the admissible state region at "
                << describe_location(g, i);
            throw ConfigError(msg.str());
        }
    }
    return s;
}

} // namespace besovflow
