#pragma once

// Exact Fourier-multiplier evolution of the linearized reformulated system
//   P̃_t + κ2 ∇·ũ = 0,   ũ_t + κ2 ∇P̃ + αũ = 0
// for isotropic data on ℝ^d, sampled on a radial quadrature in |ξ|.
//
// With ũ = −i(ξ/|ξ|) w + (solenoidal part), each shell |ξ| = r evolves by
//   d/dt (P̂, ŵ) = [[0, −κ2 r], [κ2 r, −α]] (P̂, ŵ),   solenoidal: e^{−αt}.

#include <cmath>
#include <numbers>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/littlewood_paley.hpp"
#include "besovflow/model.hpp"
#include "besovflow/state.hpp"

namespace besovflow {

/// |S^{d−1}|.
inline double sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
        default: throw ConfigError("sphere_area: d must be 1, 2 or 3");
    }
}

/// Isotropic spectral data on a radial quadrature. `weight[i]` is the
/// ℝ^d volume element |S^{d−1}| r^{d−1} dr at node r[i].
struct RadialProfile {
    int dim = 2;
    double t = 0.0;
    std::vector<double> r;
    std::vector<double> weight;
    std::vector<double> P;    // P̂(r)
    std::vector<double> w;    // potential velocity amplitude
    std::vector<double> sol;  // solenoidal velocity amplitude

    std::size_t size() const noexcept { return r.size(); }
};

/// Log-spaced midpoint quadrature of (r_min, r_max] with `nodes` points.
inline RadialProfile radial_quadrature(int dim, std::size_t nodes, double r_min = 1e-8, double r_max = 1.0) {
    if (nodes < 2 || !(r_min > 0.0) || !(r_max > r_min)) {
        throw ConfigError("radial_quadrature: need nodes >= 2 and 0 < r_min < r_max");
    }
    RadialProfile prof;
    prof.dim = dim;
    const double area = sphere_area(dim);
    const double lo = std::log(r_min);
    const double h = (std::log(r_max) - lo) / static_cast<double>(nodes);
    prof.r.resize(nodes);
    prof.weight.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double r = std::exp(lo + (static_cast<double>(i) + 0.5) * h);
        prof.r[i] = r;
        prof.weight[i] = area * std::pow(r, dim) * h;  // r^{d−1} dr = r^d d(ln r)
    }
    prof.P.assign(nodes, 0.0);
    prof.w.assign(nodes, 0.0);
    prof.sol.assign(nodes, 0.0);
    return prof;
}

/// exp(t A) for A = [[0, −b], [b, −α]], returned row-major.
struct Mat2 {
    double a00, a01, a10, a11;
};

inline Mat2 damped_wave_propagator(double b, double alpha, double t) {
    if (t == 0.0) return {1.0, 0.0, 0.0, 1.0};
    const double half = 0.5 * alpha;
    const double disc = half * half - b * b;
    double C = 0.0;  // e^{−αt/2} cosh(μt)   (or cos)
    double S = 0.0;  // e^{−αt/2} sinh(μt)/μ (or sin/ω)
    if (disc > 0.0) {
        const double mu = std::sqrt(disc);
        const double lam_plus = -b * b / (half + mu);  // = −α/2 + μ without cancellation
        const double lam_minus = -half - mu;
        const double ep = std::exp(lam_plus * t);
        const double em = std::exp(lam_minus * t);
        C = 0.5 * (ep + em);
        if (mu * t < 1e-4) {
            S = std::exp(-half * t) * t * (1.0 + (mu * t) * (mu * t) / 6.0);
        } else {
            S = (ep - em) / (2.0 * mu);
        }
    } else {
        const double omega = std::sqrt(-disc);
        const double damp = std::exp(-half * t);
        C = damp * std::cos(omega * t);
        S = omega * t < 1e-4 ? damp * t * (1.0 - (omega * t) * (omega * t) / 6.0)
                             : damp * std::sin(omega * t) / omega;
    }
    // C·I + S·(A + α/2 I)
    return {C + half * S, -b * S, b * S, C - half * S};
}

/// Closed-form eigenvalues λ± = (−α ± √(α² − 4κ2²r²))/2 (real parts when complex).
inline std::pair<double, double> damped_wave_eigenvalues(double kappa2, double alpha, double r) {
    const double disc = alpha * alpha - 4.0 * kappa2 * kappa2 * r * r;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        return {-2.0 * kappa2 * kappa2 * r * r / (alpha + root), 0.5 * (-alpha - root)};
    }
    return {-0.5 * alpha, -0.5 * alpha};
}

/// Evolves isotropic data from profile.t by `t` under the exact linear solution operator.
inline RadialProfile linear_multiplier_evolve(const RadialProfile& profile, double t, const ModelParams& params) {
    RadialProfile out = profile;
    out.t = profile.t + t;
    const double decay_sol = std::exp(-params.alpha() * t);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const Mat2 E = damped_wave_propagator(params.kappa2() * profile.r[i], params.alpha(), t);
        out.P[i] = E.a00 * profile.P[i] + E.a01 * profile.w[i];
        out.w[i] = E.a10 * profile.P[i] + E.a11 * profile.w[i];
        out.sol[i] = decay_sol * profile.sol[i];
    }
    return out;
}

/// Same solution operator applied mode by mode to a periodic grid state. The
/// Nyquist modes follow the solver's convention of a vanishing derivative;
/// c̃ has no linear dynamics and is returned unchanged.
inline TState linear_grid_evolve(const TState& s, double t, const ModelParams& params) {
    const Grid& g = s.grid();
    const auto table = wave_table(g);
    const std::size_t N = g.size();
    const int d = g.dim;
    std::vector<cplx> P = s.Pt.spectrum();
    std::vector<std::vector<cplx>> u;
    for (const auto& f : s.ut) u.push_back(f.spectrum());
    const double decay = std::exp(-params.alpha() * t);
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
        const double r = table->nyquist[i] ? 0.0 : table->kmag[i];
        if (r == 0.0) {
            for (auto& c : u) c[i] *= decay;
            continue;
        }
        cplx w(0.0);
        for (int a = 0; a < d; ++a) w += I * (table->xi[a][i] / r) * u[a][i];
        const Mat2 E = damped_wave_propagator(params.kappa2() * r, params.alpha(), t);
        const cplx P1 = E.a00 * P[i] + E.a01 * w;
        const cplx w1 = E.a10 * P[i] + E.a11 * w;
        for (int a = 0; a < d; ++a) {
            const double xh = table->xi[a][i] / r;
            const cplx pot = -I * xh * w;
            u[a][i] = decay * (u[a][i] - pot) - I * xh * w1;
        }
        P[i] = P1;
    }
    TState out;
    out.t = s.t + t;
    out.Pt = Field::from_spectrum(g, P);
    for (const auto& c : u) out.ut.push_back(Field::from_spectrum(g, c));
    out.ct = s.ct;
    return out;
}

/// ‖Λ^σ f‖_{L²} by Plancherel for radial amplitude `amp`.
inline double radial_l2_norm(const RadialProfile& prof, const std::vector<double>& amp, double sigma = 0.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        acc += prof.weight[i] * std::pow(prof.r[i], 2.0 * sigma) * amp[i] * amp[i];
    }
    return std::sqrt(acc / std::pow(2.0 * std::numbers::pi, prof.dim));
}

/// ‖Λ^σ ũ‖_{L²} combining potential and solenoidal parts.
inline double radial_velocity_l2_norm(const RadialProfile& prof, double sigma = 0.0) {
    const double a = radial_l2_norm(prof, prof.w, sigma);
    const double b = radial_l2_norm(prof, prof.sol, sigma);
    return std::sqrt(a * a + b * b);
}

/// ‖Z‖_{L²} with Z = κ2 ∇P̃ + α ũ; its potential amplitude is κ2 r P̂ − α ŵ.
inline double radial_z_l2_norm(const RadialProfile& prof, const ModelParams& params) {
    std::vector<double> zp(prof.size());
    for (std::size_t i = 0; i < prof.size(); ++i) {
        zp[i] = params.kappa2() * prof.r[i] * prof.P[i] - params.alpha() * prof.w[i];
    }
    const double a = radial_l2_norm(prof, zp);
    const double b = params.alpha() * radial_l2_norm(prof, prof.sol);
    return std::sqrt(a * a + b * b);
}

/// Dyadic block L² norms of the listed radial amplitudes combined as a vector.
inline BlockNorms radial_block_norms(const RadialProfile& prof, const std::vector<const std::vector<double>*>& amps,
                                     int j_lo, int j_hi) {
    BlockNorms out;
    out.j_lo = j_lo;
    out.values.assign(static_cast<std::size_t>(j_hi - j_lo + 1), 0.0);
    const double norm = 1.0 / std::pow(2.0 * std::numbers::pi, prof.dim);
    for (int j = j_lo; j <= j_hi; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < prof.size(); ++i) {
            const double phi = profile::phi_j(prof.r[i], j);
            if (phi == 0.0) continue;
            double a2 = 0.0;
            for (const auto* amp : amps) a2 += (*amp)[i] * (*amp)[i];
            acc += prof.weight[i] * phi * phi * a2;
        }
        out.values[static_cast<std::size_t>(j - j_lo)] = std::sqrt(acc * norm);
    }
    return out;
}

/// Dyadic range covering the support of a radial quadrature.
inline std::pair<int, int> radial_band_range(const RadialProfile& prof) {
    const double rmin = prof.r.front();
    const double rmax = prof.r.back();
    return {static_cast<int>(std::floor(std::log2(0.75 * rmin))),
            static_cast<int>(std::ceil(std::log2(rmax)))};
}

} // namespace besovflow
