#pragma once

// Hybrid-norm bookkeeping, decay-exponent prediction and fitting, and the
// boundedness trackers for the negative Besov norm and the functional X_p(t).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/linear_oracle.hpp"
#include "besovflow/littlewood_paley.hpp"
#include "besovflow/state.hpp"

namespace besovflow {

enum class Quantity { P, u };

inline const char* to_string(Quantity q) { return q == Quantity::P ? "P" : "u"; }

/// Data class −d/p <= −σ₁ < d/p − 1 for the initial datum's low-frequency
/// Ḃ^{−σ₁}_{p,∞} norm. In d = 1 the window is empty for every p >= 2.
inline void validate_decay_class(double sigma1, int d, double p) {
    const double dp = d / p;
    if (d == 1) {
        std::ostringstream msg;
        msg << "decay data class window -d/p <= -sigma1 < d/p - 1 is empty for d=1 (requires 1 - 1/p < sigma1 <= "
               "1/p, impossible for p >= 2); decay experiments need d >= 2";
        throw ValidationError(msg.str());
    }
    if (!(-dp <= -sigma1)) {
        std::ostringstream msg;
        msg << "sigma1=" << sigma1 << " violates -d/p <= -sigma1 (d/p=" << dp << ")";
        throw ValidationError(msg.str());
    }
    if (!(-sigma1 < dp - 1.0)) {
        std::ostringstream msg;
        msg << "sigma1=" << sigma1 << " violates -sigma1 < d/p - 1 (d/p - 1=" << dp - 1.0 << ")";
        throw ValidationError(msg.str());
    }
}

/// Algebraic decay exponent of ‖Λ^σ ·‖_{L^p} for P̃ or ũ.
///   P:  −(σ₁+σ)/2          for −σ₁ < σ <= d/p − 1
///   u:  −(σ+σ₁+1)/2        for −σ₁ < σ <= d/p − 2
///       −(d/p − 1 + σ₁)/2  for d/p − 2 < σ <= d/p
inline double predicted_exponent(double sigma, double sigma1, int d, double p, Quantity q) {
    validate_hybrid_p(p, d);
    validate_decay_class(sigma1, d, p);
    const double dp = d / p;
    auto fail = [&](const char* cond) {
        std::ostringstream msg;
        msg << "sigma=" << sigma << " outside admissible range for " << to_string(q) << ": " << cond
            << " (sigma1=" << sigma1 << ", d/p=" << dp << ")";
        throw ValidationError(msg.str());
    };
    if (q == Quantity::P) {
        if (!(-sigma1 < sigma && sigma <= dp - 1.0)) fail("-sigma1 < sigma <= d/p - 1");
        return -(sigma1 + sigma) / 2.0;
    }
    if (sigma <= dp - 2.0) {
        if (!(-sigma1 < sigma)) fail("-sigma1 < sigma <= d/p - 2");
        return -(sigma + sigma1 + 1.0) / 2.0;
    }
    if (!(sigma <= dp)) fail("d/p - 2 < sigma <= d/p");
    return -(dp - 1.0 + sigma1) / 2.0;
}

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t samples = 0;
};

/// Least-squares slope of log(norm) against log(1 + t) over t in [t_lo, t_hi].
inline DecayFit fit_decay(std::span<const double> t, std::span<const double> norm, double t_lo, double t_hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(norm[i] > 0.0)) {
            std::ostringstream msg;
            msg << "fit_decay: nonpositive norm " << norm[i] << " at t=" << t[i];
            throw ValidationError(msg.str());
        }
        x.push_back(std::log1p(t[i]));
        y.push_back(std::log(norm[i]));
    }
    if (x.size() < 10) {
        std::ostringstream msg;
        msg << "fit_decay: " << x.size() << " samples in window [" << t_lo << ", " << t_hi << "], need >= 10";
        throw ValidationError(msg.str());
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    DecayFit fit;
    fit.samples = x.size();
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += e * e;
    }
    fit.residual_rms = std::sqrt(rss / n);
    return fit;
}

/// Time series of ‖Λ^σ q‖_{L^p} with its fitted and predicted exponents.
struct DecayRecord {
    Quantity quantity = Quantity::P;
    double sigma = 0.0;
    double p = 2.0;
    double sigma1 = 0.0;
    std::vector<double> t;
    std::vector<double> norm;
    double fitted_exp = std::numeric_limits<double>::quiet_NaN();
    double predicted_exp = std::numeric_limits<double>::quiet_NaN();
    double residual_rms = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;

    void fit(double t_lo, double t_hi) {
        window_lo = t_lo;
        window_hi = t_hi;
        const auto f = fit_decay(t, norm, t_lo, t_hi);
        fitted_exp = f.slope;
        residual_rms = f.residual_rms;
    }
};

/// Upper end of the box-artifact-free window, 0.1·α L² / (4π² κ2²).
inline double box_artifact_time(double box_len, const ModelParams& params) {
    const double two_pi = 2.0 * std::numbers::pi;
    return 0.1 * params.alpha() * box_len * box_len / (two_pi * two_pi * params.kappa2_sq());
}

/// Fit window [max(10, 5/α), min(0.5·t_box, t_end)].
inline std::pair<double, double> decay_fit_window(double box_len, double t_end, const ModelParams& params) {
    return {std::max(10.0, 5.0 / params.alpha()), std::min(0.5 * box_artifact_time(box_len, params), t_end)};
}

/// ‖Λ^σ q‖_{L^p} of a grid state.
inline double decay_norm(const TState& s, Quantity q, double sigma, double p) {
    if (q == Quantity::P) return lp_norm(frac_deriv(s.Pt, sigma), p);
    std::vector<Field> parts;
    for (const auto& f : s.ut) parts.push_back(frac_deriv(f, sigma));
    return lp_norm(std::span<const Field>(parts), p);
}

/// Radial datum |P̂₀(ξ)| = |ξ|^{σ₁−d/2} on |ξ| <= 1, ũ₀ = 0: every low block
/// carries the same 2^{−jσ₁}-weighted L² norm.
inline RadialProfile besov_data_profile(double sigma1, int d, double p = 2.0, std::size_t nodes = 4096,
                                        double r_min = 1e-8) {
    validate_decay_class(sigma1, d, p);
    RadialProfile prof = radial_quadrature(d, nodes, r_min, 1.0);
    for (std::size_t i = 0; i < prof.size(); ++i) prof.P[i] = std::pow(prof.r[i], sigma1 - 0.5 * d);
    return prof;
}

/// Per-block norms backing one hybrid sample.
struct HybridBlocks {
    double t = 0.0;
    BlockNorms P_p;    // ‖Δ_j P̃‖_{L^p}
    BlockNorms u_p;    // ‖Δ_j ũ‖_{L^p}
    BlockNorms c_2;    // ‖Δ_j c̃‖_{L²}
    BlockNorms Pu_2;   // ‖Δ_j (P̃, ũ)‖_{L²}
    BlockNorms Puc_2;  // ‖Δ_j (P̃, ũ, c̃)‖_{L²}
    BlockNorms Puc_p;  // ‖Δ_j (P̃, ũ, c̃)‖_{L^p}
};

inline HybridBlocks hybrid_blocks(const TState& s, double p, const DyadicDecomposition& dec) {
    validate_hybrid_p(p, s.grid().dim);
    HybridBlocks b;
    b.t = s.t;
    std::vector<Field> Pu{s.Pt};
    Pu.insert(Pu.end(), s.ut.begin(), s.ut.end());
    const auto all = s.components();
    b.P_p = block_norms(s.Pt, p, dec);
    b.u_p = block_norms(std::span<const Field>(s.ut), p, dec);
    b.c_2 = block_norms(s.ct, 2.0, dec);
    b.Pu_2 = block_norms(std::span<const Field>(Pu), 2.0, dec);
    b.Puc_2 = block_norms(std::span<const Field>(all), 2.0, dec);
    b.Puc_p = p == 2.0 ? b.Puc_2 : block_norms(std::span<const Field>(all), p, dec);
    return b;
}

/// Radial oracle counterpart (L² only; c̃ is identically zero in the linear oracle).
inline HybridBlocks hybrid_blocks(const RadialProfile& prof, double p) {
    if (p != 2.0) throw ConfigError("radial oracle norms are available for p = 2 only");
    const auto [lo, hi] = radial_band_range(prof);
    const std::vector<double> zero(prof.size(), 0.0);
    HybridBlocks b;
    b.t = prof.t;
    b.P_p = radial_block_norms(prof, {&prof.P}, lo, hi);
    b.u_p = radial_block_norms(prof, {&prof.w, &prof.sol}, lo, hi);
    b.c_2 = radial_block_norms(prof, {&zero}, lo, hi);
    b.Pu_2 = radial_block_norms(prof, {&prof.P, &prof.w, &prof.sol}, lo, hi);
    b.Puc_2 = b.Pu_2;
    b.Puc_p = b.Pu_2;
    return b;
}

/// Instantaneous summands of X_p(t) plus the dissipative integrands and the
/// running time integrals (filled by LyapunovTracker).
struct HybridNormSample {
    double t = 0.0;
    double P_low = 0.0;       // ‖P̃‖^l in Ḃ^{d/p−1}_{p,1}
    double u_low = 0.0;       // ‖ũ‖^l in Ḃ^{d/p}_{p,1}
    double c_low = 0.0;       // ‖c̃‖^l in Ḃ^{d/2−1}_{2,1}
    double high = 0.0;        // ‖(P̃,ũ,c̃)‖^h in Ḃ^{d/2+1}_{2,1}
    double P_low_diss = 0.0;  // ‖P̃‖^l in Ḃ^{d/p+1}_{p,1}
    double u_low_diss = 0.0;  // ‖ũ‖^l in Ḃ^{d/p}_{p,1}
    double high_diss = 0.0;   // ‖(P̃,ũ)‖^h in Ḃ^{d/2+1}_{2,1}
    double int_P = 0.0;
    double int_u = 0.0;
    double int_high = 0.0;

    /// X_{p,0}-type instantaneous size.
    double instantaneous() const noexcept { return P_low + u_low + c_low + high; }
};

inline HybridNormSample hybrid_sample(const HybridBlocks& b, int d, double p, int j0) {
    const double dp = d / p;
    const double d2 = 0.5 * d;
    HybridNormSample s;
    s.t = b.t;
    s.P_low = besov_from_blocks(b.P_p, dp - 1.0, 1.0, Band::low, j0);
    s.u_low = besov_from_blocks(b.u_p, dp, 1.0, Band::low, j0);
    s.c_low = besov_from_blocks(b.c_2, d2 - 1.0, 1.0, Band::low, j0);
    s.high = besov_from_blocks(b.Puc_2, d2 + 1.0, 1.0, Band::high, j0);
    s.P_low_diss = besov_from_blocks(b.P_p, dp + 1.0, 1.0, Band::low, j0);
    s.u_low_diss = s.u_low;
    s.high_diss = besov_from_blocks(b.Pu_2, d2 + 1.0, 1.0, Band::high, j0);
    return s;
}

inline HybridNormSample hybrid_sample(const TState& s, double p, const DyadicDecomposition& dec) {
    return hybrid_sample(hybrid_blocks(s, p, dec), s.grid().dim, p, dec.j0);
}

/// X_{p,0} of a datum.
inline double smallness_norm(const TState& s, double p, const DyadicDecomposition& dec) {
    return hybrid_sample(s, p, dec).instantaneous();
}

struct TrackVerdict {
    bool pass = true;
    double initial = 0.0;
    double sup = 0.0;
    double ratio = 0.0;  // sup / initial (0 when both vanish)
    double margin = 0.0;
    std::string detail;
};

/// Accumulates X_p(t): Chemin-Lerner L̃^∞ parts as per-block running suprema
/// over the sampled times, L¹ parts as trapezoidal time integrals.
class LyapunovTracker {
public:
    LyapunovTracker(int d, double p, int j0) : d_(d), p_(p), j0_(j0) {}

    const HybridNormSample& add(const HybridBlocks& b) {
        HybridNormSample s = hybrid_sample(b, d_, p_, j0_);
        if (samples_.empty()) {
            sup_P_ = b.P_p;
            sup_u_ = b.u_p;
            sup_c_ = b.c_2;
            sup_high_ = b.Puc_2;
        } else {
            const auto& prev = samples_.back();
            const double dt = s.t - prev.t;
            s.int_P = prev.int_P + 0.5 * dt * (prev.P_low_diss + s.P_low_diss);
            s.int_u = prev.int_u + 0.5 * dt * (prev.u_low_diss + s.u_low_diss);
            s.int_high = prev.int_high + 0.5 * dt * (prev.high_diss + s.high_diss);
            running_max(sup_P_, b.P_p);
            running_max(sup_u_, b.u_p);
            running_max(sup_c_, b.c_2);
            running_max(sup_high_, b.Puc_2);
        }
        const double dp = d_ / p_;
        const double d2 = 0.5 * d_;
        const double X = besov_from_blocks(sup_P_, dp - 1.0, 1.0, Band::low, j0_) + s.int_P +
                         besov_from_blocks(sup_u_, dp, 1.0, Band::low, j0_) + s.int_u +
                         besov_from_blocks(sup_c_, d2 - 1.0, 1.0, Band::low, j0_) +
                         besov_from_blocks(sup_high_, d2 + 1.0, 1.0, Band::high, j0_) + s.int_high;
        samples_.push_back(s);
        X_.push_back(X);
        return samples_.back();
    }

    const std::vector<HybridNormSample>& samples() const noexcept { return samples_; }
    const std::vector<double>& X() const noexcept { return X_; }
    double X0() const noexcept { return samples_.empty() ? 0.0 : samples_.front().instantaneous(); }

    /// X_p(t) <= margin · X_{p,0} throughout, and for t >= 1 the instantaneous
    /// high norm never exceeds twice its earlier minimum.
    TrackVerdict verdict(double margin = 10.0) const {
        TrackVerdict v;
        v.margin = margin;
        v.initial = X0();
        for (double x : X_) v.sup = std::max(v.sup, x);
        v.ratio = v.initial > 0.0 ? v.sup / v.initial : (v.sup > 0.0 ? kInf : 0.0);
        const bool bounded = v.sup <= margin * v.initial * (1.0 + 1e-12) || v.sup == 0.0;
        double low = kInf;
        bool monotone = true;
        for (const auto& s : samples_) {
            if (s.t < 1.0) continue;
            if (s.high > 2.0 * low) monotone = false;
            low = std::min(low, s.high);
        }
        v.pass = bounded && monotone;
        std::ostringstream os;
        os << "sup X_p / X_p0 = " << v.ratio << " (margin " << margin << ")"
           << (monotone ? "" : "; high norm grew by more than 2x after t >= 1");
        v.detail = os.str();
        return v;
    }

private:
    static void running_max(BlockNorms& acc, const BlockNorms& b) {
        for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] = std::max(acc.values[i], b.values[i]);
    }

    int d_;
    double p_;
    int j0_;
    std::vector<HybridNormSample> samples_;
    std::vector<double> X_;
    BlockNorms sup_P_, sup_u_, sup_c_, sup_high_;
};

/// Tracks ‖(P̃, ũ, c̃)‖^l_{Ḃ^{−σ₁}_{p,∞}} along a trajectory.
class NegativeNormTracker {
public:
    NegativeNormTracker(double sigma1, int j0) : sigma1_(sigma1), j0_(j0) {}

    double add(const HybridBlocks& b) {
        const double v = besov_from_blocks(b.Puc_p, -sigma1_, kInf, Band::low, j0_);
        t_.push_back(b.t);
        values_.push_back(v);
        blocks_.push_back(b.Puc_p);
        return v;
    }

    const std::vector<double>& times() const noexcept { return t_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<BlockNorms>& blocks() const noexcept { return blocks_; }

    TrackVerdict verdict(double margin = 3.0) const {
        TrackVerdict v;
        v.margin = margin;
        v.initial = values_.empty() ? 0.0 : values_.front();
        for (double x : values_) v.sup = std::max(v.sup, x);
        v.ratio = v.initial > 0.0 ? v.sup / v.initial : (v.sup > 0.0 ? kInf : 0.0);
        v.pass = v.sup <= margin * v.initial * (1.0 + 1e-12) || v.sup == 0.0;
        std::ostringstream os;
        os << "sup N / N(0) = " << v.ratio << " (margin " << margin << ")";
        v.detail = os.str();
        return v;
    }

private:
    double sigma1_;
    int j0_;
    std::vector<double> t_;
    std::vector<double> values_;
    std::vector<BlockNorms> blocks_;
};

} // namespace besovflow
