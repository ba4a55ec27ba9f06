#pragma once

// Empirical constants of the Bernstein inequalities and the Besov product law
// over random corpora of band-limited fields.
//
// Corpus fields are drawn as lists of lattice modes with random coefficients,
// independently of the grid resolution, so that the same continuous functions
// are sampled on every grid of a given box.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "besovflow/field.hpp"
#include "besovflow/littlewood_paley.hpp"

namespace besovflow {

struct LatticeMode {
    std::vector<int> k;
    cplx coeff;
};

/// Random real trigonometric polynomial with lattice wavevectors ξ = 2πk/L,
/// r_lo <= |ξ| <= r_hi. Coefficients are i.i.d. complex normal, drawn once per
/// ± pair in a resolution-independent order.
inline std::vector<LatticeMode> random_modes(int dim, double box_len, double r_lo, double r_hi, std::mt19937_64& rng,
                                             double mean = 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double k0 = 2.0 * std::numbers::pi / box_len;
    const int K = static_cast<int>(std::ceil(r_hi / k0));
    std::vector<LatticeMode> modes;
    if (mean != 0.0) modes.push_back({std::vector<int>(static_cast<std::size_t>(dim), 0), cplx(mean, 0.0)});
    std::vector<int> k(static_cast<std::size_t>(dim), -K);
    while (true) {
        // keep one representative of each ± pair: first non-zero component positive
        int first = 0;
        for (int v : k) {
            if (v != 0) {
                first = v;
                break;
            }
        }
        if (first > 0) {
            double mag2 = 0.0;
            for (int v : k) mag2 += (k0 * v) * (k0 * v);
            const double mag = std::sqrt(mag2);
            if (mag >= r_lo && mag <= r_hi) {
                const double re = normal(rng);
                const double im = normal(rng);
                modes.push_back({k, cplx(re, im)});
            }
        }
        int a = dim - 1;
        while (a >= 0 && ++k[static_cast<std::size_t>(a)] > K) {
            k[static_cast<std::size_t>(a)] = -K;
            --a;
        }
        if (a < 0) break;
    }
    return modes;
}

/// f(x) = Σ c_k e^{iξ·x} + conj, sampled on `g` through its DFT.
inline Field synthesize(const Grid& g, const std::vector<LatticeMode>& modes) {
    std::vector<cplx> spec(g.size(), cplx(0.0));
    const double total = static_cast<double>(g.size());
    auto index_of = [&](const std::vector<int>& k, int sign) -> std::ptrdiff_t {
        std::size_t flat = 0;
        for (int a = 0; a < g.dim; ++a) {
            const int v = sign * k[static_cast<std::size_t>(a)];
            if (std::abs(v) >= g.n / 2) return -1;
            flat = flat * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(v >= 0 ? v : v + g.n);
        }
        return static_cast<std::ptrdiff_t>(flat);
    };
    for (const auto& m : modes) {
        const auto ip = index_of(m.k, 1);
        const auto im = index_of(m.k, -1);
        if (ip < 0 || im < 0) throw ConfigError("synthesize: mode not resolvable on grid");
        if (ip == im) {
            spec[static_cast<std::size_t>(ip)] += total * m.coeff.real();
        } else {
            spec[static_cast<std::size_t>(ip)] += total * m.coeff;
            spec[static_cast<std::size_t>(im)] += total * std::conj(m.coeff);
        }
    }
    return Field::from_spectrum(g, spec);
}

enum class Support { ball, ring };
enum class BoundKind { upper, lower };

struct BernsteinEntry {
    std::string name;
    Support support = Support::ring;
    BoundKind kind = BoundKind::upper;
    double p = 2.0;
    double q = 2.0;
    int k = 1;
    /// sup of the ratio for upper bounds, inf for lower bounds.
    double ratio = 0.0;
    std::size_t samples = 0;
};

struct BernsteinReport {
    double lambda = 0.0;
    std::vector<BernsteinEntry> entries;
};

struct BenchOptions {
    double lambda = 0.0;  // 0: 2^{floor((j_min + j_max)/2)}
    std::uint64_t seed = 12345;
};

inline double bench_lambda(const DyadicDecomposition& dec, const BenchOptions& opts) {
    if (opts.lambda > 0.0) return opts.lambda;
    return std::ldexp(1.0, static_cast<int>(std::floor(0.5 * (dec.j_min + dec.j_max))));
}

/// Fixed schedule of (support, bound, p, q, k) inequalities.
inline std::vector<BernsteinEntry> bernstein_schedule() {
    auto e = [](const char* n, Support s, BoundKind b, double p, double q, int k) {
        BernsteinEntry x;
        x.name = n;
        x.support = s;
        x.kind = b;
        x.p = p;
        x.q = q;
        x.k = k;
        return x;
    };
    return {
        e("ring_upper_p2_q2_k1", Support::ring, BoundKind::upper, 2.0, 2.0, 1),
        e("ring_upper_p2_q4_k1", Support::ring, BoundKind::upper, 2.0, 4.0, 1),
        e("ring_upper_p2_qinf_k0", Support::ring, BoundKind::upper, 2.0, kInf, 0),
        e("ring_upper_p4_q4_k2", Support::ring, BoundKind::upper, 4.0, 4.0, 2),
        e("ring_lower_p2_k1", Support::ring, BoundKind::lower, 2.0, 2.0, 1),
        e("ring_lower_p4_k1", Support::ring, BoundKind::lower, 4.0, 4.0, 1),
        e("ball_upper_p2_qinf_k1", Support::ball, BoundKind::upper, 2.0, kInf, 1),
    };
}

/// Ratio ‖∇^k f‖_{L^q} / (λ^{k + d(1/p − 1/q)} ‖f‖_{L^p}) (upper) or
/// ‖∇^k f‖_{L^p} / (λ^k ‖f‖_{L^p}) (lower).
inline double bernstein_ratio(const Field& f, const BernsteinEntry& e, double lambda) {
    const int d = f.grid().dim;
    const auto grads = derivative_tensor(f, e.k);
    const double base = lp_norm(f, e.p);
    if (base == 0.0) return 0.0;
    if (e.kind == BoundKind::lower) {
        return lp_norm(std::span<const Field>(grads), e.p) / (std::pow(lambda, e.k) * base);
    }
    const double inv_q = std::isinf(e.q) ? 0.0 : 1.0 / e.q;
    const double expo = e.k + d * (1.0 / e.p - inv_q);
    return lp_norm(std::span<const Field>(grads), e.q) / (std::pow(lambda, expo) * base);
}

/// Max (upper) or min (lower) ratio per scheduled inequality over a corpus of
/// `corpus_size` random fields supported in λ·ring = {3λ/4 <= |ξ| <= 8λ/3} or
/// λ·ball = {|ξ| <= λ}.
inline BernsteinReport check_bernstein(std::size_t corpus_size, const Grid& grid, const DyadicDecomposition& dec,
                                       const BenchOptions& opts = {}) {
    BernsteinReport rep;
    rep.lambda = bench_lambda(dec, opts);
    rep.entries = bernstein_schedule();
    if (8.0 / 3.0 * rep.lambda >= std::numbers::pi * grid.n / grid.box_len) {
        throw ConfigError("check_bernstein: annulus 8λ/3 not resolvable on grid");
    }
    for (auto& e : rep.entries) e.ratio = e.kind == BoundKind::upper ? 0.0 : kInf;
    std::mt19937_64 rng(opts.seed);
    for (std::size_t n = 0; n < corpus_size; ++n) {
        const Field ring = synthesize(grid, random_modes(grid.dim, grid.box_len, 0.75 * rep.lambda,
                                                         8.0 / 3.0 * rep.lambda, rng));
        const Field ball = synthesize(grid, random_modes(grid.dim, grid.box_len, 0.0, rep.lambda, rng));
        for (auto& e : rep.entries) {
            const double r = bernstein_ratio(e.support == Support::ring ? ring : ball, e, rep.lambda);
            e.ratio = e.kind == BoundKind::upper ? std::max(e.ratio, r) : std::min(e.ratio, r);
            ++e.samples;
        }
    }
    return rep;
}

struct ProductLawEntry {
    std::string name;
    double s = 0.5;
    double p = 2.0;
    double constant = 0.0;  // sup of the ratio
    std::size_t samples = 0;
};

struct ProductLawReport {
    double mode_radius = 0.0;
    std::vector<ProductLawEntry> entries;
};

/// ‖ab‖_{Ḃ^s_{p,1}} / (‖a‖_∞ ‖b‖_{Ḃ^s_{p,1}} + ‖b‖_∞ ‖a‖_{Ḃ^s_{p,1}}).
inline double product_law_ratio(const Field& a, const Field& b, double s, double p, const DyadicDecomposition& dec) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a[i] * b[i];
    const BesovSpec spec{s, p, 1.0, Band::full};
    const double lhs = besov_norm(Field(a.grid(), std::move(prod)), spec, dec);
    const double rhs = a.max_abs() * besov_norm(b, spec, dec) + b.max_abs() * besov_norm(a, spec, dec);
    if (rhs == 0.0) return 0.0;
    return lhs / rhs;
}

/// Empirical constant for s in {0.5, 1}, p in {2, 4} over random pairs whose
/// modes satisfy |ξ| <= λ, so products stay resolved (λ <= ξ_grid_max / 4).
inline ProductLawReport check_product_law(std::size_t corpus_size, const Grid& grid, const DyadicDecomposition& dec,
                                          const BenchOptions& opts = {}) {
    ProductLawReport rep;
    rep.mode_radius = bench_lambda(dec, opts);
    if (2.0 * rep.mode_radius >= std::numbers::pi * grid.n / grid.box_len) {
        throw ConfigError("check_product_law: products of the corpus are not resolvable on grid");
    }
    for (double s : {0.5, 1.0}) {
        for (double p : {2.0, 4.0}) {
            ProductLawEntry e;
            e.s = s;
            e.p = p;
            e.name = "s" + std::string(s == 0.5 ? "0.5" : "1") + "_p" + std::string(p == 2.0 ? "2" : "4");
            rep.entries.push_back(e);
        }
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n = 0; n < corpus_size; ++n) {
        const double mean_a = normal(rng);
        const double mean_b = normal(rng);
        const Field a = synthesize(grid, random_modes(grid.dim, grid.box_len, 0.0, rep.mode_radius, rng, mean_a));
        const Field b = synthesize(grid, random_modes(grid.dim, grid.box_len, 0.0, rep.mode_radius, rng, mean_b));
        for (auto& e : rep.entries) {
            e.constant = std::max(e.constant, product_law_ratio(a, b, e.s, e.p, dec));
            ++e.samples;
        }
    }
    return rep;
}

/// Largest relative change of matching entries between two reports.
inline double max_relative_drift(const BernsteinReport& a, const BernsteinReport& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min(a.entries.size(), b.entries.size()); ++i) {
        const double x = a.entries[i].ratio;
        const double y = b.entries[i].ratio;
        const double scale = std::max(std::abs(x), std::abs(y));
        if (scale > 0.0) worst = std::max(worst, std::abs(x - y) / scale);
    }
    return worst;
}

inline double max_relative_drift(const ProductLawReport& a, const ProductLawReport& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min(a.entries.size(), b.entries.size()); ++i) {
        const double x = a.entries[i].constant;
        const double y = b.entries[i].constant;
        const double scale = std::max(std::abs(x), std::abs(y));
        if (scale > 0.0) worst = std::max(worst, std::abs(x - y) / scale);
    }
    return worst;
}

} // namespace besovflow
