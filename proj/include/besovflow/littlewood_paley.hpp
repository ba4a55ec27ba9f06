#pragma once

// Dyadic (χ, φ) partition of unity realized as Fourier multipliers on a
// periodic grid, and the homogeneous Besov norms built on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"

namespace besovflow {

namespace profile {

/// C^∞ transition: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t) noexcept {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// Radial low-pass profile: 1 on |ξ| <= 1, 0 on |ξ| >= 4/3.
inline double chi(double r) noexcept { return smooth_step(4.0 - 3.0 * r); }

/// Annulus profile φ(ξ) = χ(ξ/2) − χ(ξ), supported in 1 <= |ξ| <= 8/3.
inline double phi(double r) noexcept { return chi(0.5 * r) - chi(r); }

inline double phi_j(double r, int j) noexcept { return phi(std::ldexp(r, -j)); }
inline double chi_j(double r, int j) noexcept { return chi(std::ldexp(r, -j)); }

} // namespace profile

/// Dyadic bands resolvable on a grid together with the low/high threshold j0.
struct DyadicDecomposition {
    Grid grid;
    int j0 = 0;
    int j_min = 0;  // every block below j_min vanishes on the grid
    int j_max = 0;  // every block above j_max vanishes on the grid

    int band_count() const noexcept { return j_max - j_min + 1; }
};

inline DyadicDecomposition build_decomposition(const Grid& grid, int j0 = 0) {
    grid.validate();
    DyadicDecomposition dec;
    dec.grid = grid;
    dec.j0 = j0;
    // Σ_{j=a}^{b} φ(2^{-j}ξ) = χ(2^{-b-1}ξ) − χ(2^{-a}ξ) equals 1 on
    // [ξ_min, ξ_max] iff 2^{-a}ξ_min >= 4/3 and 2^{-b-1}ξ_max <= 1.
    dec.j_min = static_cast<int>(std::floor(std::log2(0.75 * grid.xi_min())));
    dec.j_max = static_cast<int>(std::ceil(std::log2(grid.xi_max()))) - 1;
    if (dec.band_count() < 4) {
        throw ConfigError("decomposition: grid too coarse to host 4 dyadic bands");
    }
    if (j0 < dec.j_min || j0 > dec.j_max) {
        throw ConfigError("decomposition: j0=" + std::to_string(j0) + " outside resolvable bands [" +
                          std::to_string(dec.j_min) + ", " + std::to_string(dec.j_max) + "]");
    }
    return dec;
}

/// Δ_j f = φ(2^{-j}D) f.
inline Field block(const Field& f, int j, const DyadicDecomposition& dec) {
    if (j < dec.j_min - 1 || j > dec.j_max + 1) {
        throw ConfigError("block: j=" + std::to_string(j) + " outside [j_min-1, j_max+1]");
    }
    return apply_multiplier(f, [j](std::size_t i, const WaveTable& t) {
        return profile::phi_j(t.kmag[i], j);
    });
}

/// S_j f = χ(2^{-j}D) f.
inline Field low_cut(const Field& f, int j, const DyadicDecomposition&) {
    return apply_multiplier(f, [j](std::size_t i, const WaveTable& t) {
        return profile::chi_j(t.kmag[i], j);
    });
}

/// Λ^σ f = |D|^σ f with the ξ = 0 coefficient removed. `projected_mean`
/// reports that a non-zero mean was discarded for σ < 0.
inline Field frac_deriv(const Field& f, double sigma, bool* projected_mean = nullptr) {
    if (projected_mean) {
        const double scale = std::max(f.max_abs(), std::numeric_limits<double>::min());
        *projected_mean = sigma < 0.0 && std::abs(f.mean()) > 1e-14 * scale;
    }
    return apply_multiplier(f, [sigma](std::size_t i, const WaveTable& t) {
        const double k = t.kmag[i];
        return k == 0.0 ? 0.0 : std::pow(k, sigma);
    });
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Grid quadrature of ‖f‖_{L^p}; p = ∞ gives max |f|.
inline double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
    auto v = f.values();
    if (std::isinf(p)) return f.max_abs();
    double acc = 0.0;
    if (p == 2.0) {
        for (double x : v) acc += x * x;
        return std::sqrt(acc * f.grid().cell_volume());
    }
    for (double x : v) acc += std::pow(std::abs(x), p);
    return std::pow(acc * f.grid().cell_volume(), 1.0 / p);
}

/// L^p norm of the pointwise Euclidean magnitude of a vector of fields.
inline double lp_norm(std::span<const Field> fs, double p) {
    if (fs.empty()) return 0.0;
    if (fs.size() == 1) return lp_norm(fs[0], p);
    if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
    const std::size_t n = fs[0].size();
    std::vector<double> mag(n, 0.0);
    for (const auto& f : fs) {
        auto v = f.values();
        for (std::size_t i = 0; i < n; ++i) mag[i] += v[i] * v[i];
    }
    for (double& x : mag) x = std::sqrt(x);
    return lp_norm(Field(fs[0].grid(), std::move(mag)), p);
}

enum class Band { full, low, high };

inline const char* to_string(Band b) {
    switch (b) {
        case Band::low: return "low";
        case Band::high: return "high";
        default: return "full";
    }
}

/// Norm request for Ḃ^s_{p,r}, optionally restricted to the low or high band.
struct BesovSpec {
    double s = 0.0;
    double p = 2.0;
    double r = 1.0;
    Band band = Band::full;

    void validate() const {
        if (!(p >= 1.0)) throw ConfigError("BesovSpec: p must be in [1, inf]");
        if (!(r >= 1.0)) throw ConfigError("BesovSpec: r must be in [1, inf]");
        if (!std::isfinite(s)) throw ConfigError("BesovSpec: s must be finite");
    }
};

/// Lebesgue range of the hybrid framework: 2 <= p <= min(4, 2d/(d-2)).
inline void validate_hybrid_p(double p, int d) {
    double upper = 4.0;
    if (d >= 3) upper = std::min(upper, 2.0 * d / (d - 2.0));
    if (!(p >= 2.0 && p <= upper)) {
        throw ValidationError("p=" + std::to_string(p) + " violates 2 <= p <= min{4, 2d/(d-2)} for d=" +
                              std::to_string(d));
    }
}

/// Per-block L^p norms ‖Δ_j f‖ for j in [j_lo, j_lo + values.size()).
struct BlockNorms {
    int j_lo = 0;
    std::vector<double> values;

    int j_hi() const noexcept { return j_lo + static_cast<int>(values.size()) - 1; }
    double at(int j) const noexcept {
        if (j < j_lo || j > j_hi()) return 0.0;
        return values[static_cast<std::size_t>(j - j_lo)];
    }
};

/// Band [lo, hi] selected by `band` relative to j0 (low: j <= j0, high: j >= j0-1).
inline std::pair<int, int> band_range(Band band, int j0, int j_lo, int j_hi) {
    switch (band) {
        case Band::low: return {j_lo, std::min(j0, j_hi)};
        case Band::high: return {std::max(j0 - 1, j_lo), j_hi};
        default: return {j_lo, j_hi};
    }
}

/// ℓ^r sum over the selected band of 2^{js} · block norm.
inline double besov_from_blocks(const BlockNorms& b, double s, double r, Band band, int j0,
                                bool* empty = nullptr) {
    const auto [lo, hi] = band_range(band, j0, b.j_lo, b.j_hi());
    if (empty) *empty = lo > hi;
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) {
        const double term = std::pow(2.0, j * s) * b.at(j);
        if (std::isinf(r)) {
            acc = std::max(acc, term);
        } else if (r == 1.0) {
            acc += term;
        } else {
            acc += std::pow(term, r);
        }
    }
    if (!std::isinf(r) && r != 1.0) acc = std::pow(acc, 1.0 / r);
    return acc;
}

/// φ_j(|ξ_k|) for every DFT index k and band j of a decomposition.
struct BandTable {
    int j_lo = 0;
    std::vector<std::vector<double>> weights;  // [j - j_lo][flat index]
};

inline std::shared_ptr<const BandTable> band_table(const DyadicDecomposition& dec) {
    static std::mutex m;
    static std::map<std::tuple<int, int, double, int, int>, std::shared_ptr<const BandTable>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[{dec.grid.dim, dec.grid.n, dec.grid.box_len, dec.j_min, dec.j_max}];
    if (!slot) {
        auto t = std::make_shared<BandTable>();
        t->j_lo = dec.j_min;
        const auto waves = wave_table(dec.grid);
        for (int j = dec.j_min; j <= dec.j_max; ++j) {
            std::vector<double> w(waves->kmag.size());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = profile::phi_j(waves->kmag[i], j);
            t->weights.push_back(std::move(w));
        }
        slot = std::move(t);
    }
    return slot;
}

/// Block norms of the vector (fs[0], fs[1], ...) measured with the pointwise
/// Euclidean magnitude, for every band j_min..j_max of `dec`.
inline BlockNorms block_norms(std::span<const Field> fs, double p, const DyadicDecomposition& dec) {
    BlockNorms out;
    out.j_lo = dec.j_min;
    out.values.assign(static_cast<std::size_t>(dec.band_count()), 0.0);
    if (fs.empty()) return out;
    const Grid& g = fs[0].grid();
    const auto bands = band_table(dec);

    if (p == 2.0) {
        // Parseval: ‖Δ_j f‖²_{L²} = ΔV / N Σ_k |φ_j(ξ_k) f̂_k|².
        std::vector<double> energy(g.size(), 0.0);
        for (const auto& f : fs) {
            const auto& spec = f.spectrum();
            for (std::size_t i = 0; i < spec.size(); ++i) energy[i] += std::norm(spec[i]);
        }
        const double scale = g.cell_volume() / static_cast<double>(g.size());
        for (std::size_t b = 0; b < out.values.size(); ++b) {
            const auto& w = bands->weights[b];
            double acc = 0.0;
            for (std::size_t i = 0; i < energy.size(); ++i) {
                if (w[i] != 0.0) acc += w[i] * w[i] * energy[i];
            }
            out.values[b] = std::sqrt(acc * scale);
        }
        return out;
    }

    for (std::size_t b = 0; b < out.values.size(); ++b) {
        const auto& w = bands->weights[b];
        std::vector<Field> blocks;
        blocks.reserve(fs.size());
        for (const auto& f : fs) {
            const auto& spec = f.spectrum();
            std::vector<cplx> filtered(spec.size());
            for (std::size_t i = 0; i < spec.size(); ++i) filtered[i] = spec[i] * w[i];
            blocks.push_back(Field::from_spectrum(g, filtered));
        }
        out.values[b] = lp_norm(std::span<const Field>(blocks), p);
    }
    return out;
}

inline BlockNorms block_norms(const Field& f, double p, const DyadicDecomposition& dec) {
    return block_norms(std::span<const Field>(&f, 1), p, dec);
}

struct BesovResult {
    double value = 0.0;
    bool empty_band = false;
    /// Dyadic indices below j_min are not represented on a finite box.
    bool truncated_low = false;
};

inline BesovResult besov_norm_detail(std::span<const Field> fs, const BesovSpec& spec,
                                     const DyadicDecomposition& dec) {
    spec.validate();
    BesovResult res;
    const BlockNorms b = block_norms(fs, spec.p, dec);
    res.value = besov_from_blocks(b, spec.s, spec.r, spec.band, dec.j0, &res.empty_band);
    res.truncated_low = spec.band != Band::high;
    return res;
}

inline double besov_norm(const Field& f, const BesovSpec& spec, const DyadicDecomposition& dec) {
    return besov_norm_detail(std::span<const Field>(&f, 1), spec, dec).value;
}

inline double besov_norm(std::span<const Field> fs, const BesovSpec& spec, const DyadicDecomposition& dec) {
    return besov_norm_detail(fs, spec, dec).value;
}

/// All k-th order partial derivatives ∂^{i_1}…∂^{i_k} f (d^k fields).
inline std::vector<Field> derivative_tensor(const Field& f, int k) {
    std::vector<Field> current{f};
    for (int order = 0; order < k; ++order) {
        std::vector<Field> next;
        next.reserve(current.size() * static_cast<std::size_t>(f.grid().dim));
        for (const auto& g : current) {
            for (int a = 0; a < f.grid().dim; ++a) next.push_back(derivative(g, a));
        }
        current = std::move(next);
    }
    return current;
}

} // namespace besovflow
