#pragma once

// Pressure law of the no-slip liquid-gas mixture, its equilibrium constants,
// and the change of variables (m, n, u) <-> (P̃, ũ, c̃).

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "besovflow/errors.hpp"

namespace besovflow {

struct ModelConstants {
    double C0 = 0.5;
    double k0 = 1.0;
    double a0 = 0.25;
    double alpha = 1.0;
    double m_inf = 2.0;
    double n_inf = 1.0;
};

namespace detail {

inline double pressure_raw(double C0, double k0, double a0, double m, double n) {
    const double b1 = k0 - m - a0 * n;
    const double b2 = 4.0 * k0 * a0 * n;
    const double root = std::sqrt(b1 * b1 + b2);
    // -b1 + root loses everything to cancellation when b1 >> 0; use the
    // conjugate form b2 / (b1 + root) there.
    if (b1 > 0.0) {
        return C0 * (b2 / (b1 + root));
    }
    return C0 * (-b1 + root);
}

inline double pressure_dm_raw(double C0, double k0, double m, double s) {
    const double a = k0 - m * (1.0 + s);
    const double disc = a * a + 4.0 * k0 * m * s;
    if (!(disc > 0.0)) {
        std::ostringstream msg;
        msg << "pressure_dm: degenerate state m=" << m << ", c~+c_inf=" << s
            << " (vanishing square-root denominator)";
        throw DomainError(msg.str());
    }
    return C0 * (1.0 + s + (-a * (1.0 + s) + 2.0 * k0 * s) / std::sqrt(disc));
}

} // namespace detail

/// Immutable model constants with the derived equilibrium quantities.
class ModelParams {
public:
    explicit ModelParams(const ModelConstants& c = {}) : c_(c) {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw ConfigError(std::string("model parameters: ") + what);
        };
        require(c.C0 > 0.0 && std::isfinite(c.C0), "C0 must be > 0");
        require(c.k0 > 0.0 && std::isfinite(c.k0), "k0 must be > 0");
        require(c.a0 > 0.0 && std::isfinite(c.a0), "a0 must be > 0");
        require(c.alpha > 0.0 && std::isfinite(c.alpha), "alpha must be > 0");
        require(c.n_inf >= 0.0 && std::isfinite(c.n_inf), "n_inf must be >= 0");
        const double sgn = c.n_inf > 0.0 ? 1.0 : 0.0;
        require(c.m_inf > (1.0 - sgn) * c.k0 && std::isfinite(c.m_inf),
                "far-field condition m_inf > (1 - sgn n_inf) k0 violated");

        c_inf_ = c.a0 * c.n_inf / c.m_inf;
        P_inf_ = detail::pressure_raw(c.C0, c.k0, c.a0, c.m_inf, c.n_inf);
        kappa2_sq_ = detail::pressure_dm_raw(c.C0, c.k0, c.m_inf, c_inf_);
        require(kappa2_sq_ > 0.0, "P_m(m_inf, 0) must be > 0");
        kappa2_ = std::sqrt(kappa2_sq_);
        kappa1_ = 1.0 / (kappa2_ * c.m_inf);
    }

    const ModelConstants& constants() const noexcept { return c_; }
    double C0() const noexcept { return c_.C0; }
    double k0() const noexcept { return c_.k0; }
    double a0() const noexcept { return c_.a0; }
    double alpha() const noexcept { return c_.alpha; }
    double m_inf() const noexcept { return c_.m_inf; }
    double n_inf() const noexcept { return c_.n_inf; }

    double c_inf() const noexcept { return c_inf_; }
    double P_inf() const noexcept { return P_inf_; }
    double kappa1() const noexcept { return kappa1_; }
    double kappa2() const noexcept { return kappa2_; }
    /// P_m(m_inf, 0), stored as computed so equilibrium cancellations are exact.
    double kappa2_sq() const noexcept { return kappa2_sq_; }

    /// n_inf = 0: the closed-form inverse of the pressure law is bypassed.
    bool degenerate_branch() const noexcept { return c_.n_inf == 0.0; }

    double m_min() const noexcept { return 0.25 * c_.m_inf; }
    double m_max() const noexcept { return 4.0 * c_.m_inf; }
    double ct_min() const noexcept { return -0.5 * c_inf_ - 0.1; }
    double ct_max() const noexcept { return 0.5 * c_inf_ + 0.1; }

    bool admissible(double m, double ct) const noexcept {
        return m >= m_min() && m <= m_max() && ct >= ct_min() && ct <= ct_max();
    }

    void require_admissible(double m, double ct, const char* where) const {
        if (!admissible(m, ct)) {
            std::ostringstream msg;
            msg << where << ": state (m=" << m << ", c~=" << ct
                << ") outside admissible box m in [" << m_min() << ", " << m_max()
                << "], c~ in [" << ct_min() << ", " << ct_max() << "]";
            throw DomainError(msg.str());
        }
    }

private:
    ModelConstants c_;
    double c_inf_ = 0.0;
    double P_inf_ = 0.0;
    double kappa1_ = 0.0;
    double kappa2_ = 0.0;
    double kappa2_sq_ = 0.0;
};

/// Mixture pressure P(m, n).
inline double pressure(double m, double n, const ModelParams& params) {
    if (!(m > 0.0) || !(n >= 0.0)) {
        std::ostringstream msg;
        msg << "pressure: requires m > 0 and n >= 0, got m=" << m << ", n=" << n;
        throw DomainError(msg.str());
    }
    const double P = detail::pressure_raw(params.C0(), params.k0(), params.a0(), m, n);
    if (!std::isfinite(P)) {
        std::ostringstream msg;
        msg << "pressure: non-finite result at m=" << m << ", n=" << n;
        throw DomainError(msg.str());
    }
    return P;
}

/// Gas mass carried by liquid mass m at gas-fraction perturbation c̃.
inline double gas_mass(double m, double ct, const ModelParams& params) {
    return m * (ct + params.c_inf()) / params.a0();
}

/// ∂P/∂m at fixed c̃, closed form.
inline double pressure_dm(double m, double ct, const ModelParams& params) {
    return detail::pressure_dm_raw(params.C0(), params.k0(), m, ct + params.c_inf());
}

/// Inverse of the pressure law along fixed c̃: returns m with P(m, c̃) = P.
inline double mass_from_pressure(double P, double ct, const ModelParams& params) {
    if (P == params.P_inf() && ct == 0.0) return params.m_inf();

    if (params.degenerate_branch()) {
        // c_inf = 0: bisection on pressure(m, n(m, c̃)) = P.
        auto f = [&](double m) { return pressure(m, gas_mass(m, ct, params), params) - P; };
        if (ct < 0.0) {
            throw DomainError("mass_from_pressure: c~ < 0 gives negative gas mass when n_inf = 0");
        }
        double lo = params.m_min();
        double hi = params.m_max();
        for (int i = 0; i < 60 && f(lo) > 0.0; ++i) lo *= 0.5;
        for (int i = 0; i < 60 && f(hi) < 0.0; ++i) hi *= 2.0;
        if (f(lo) > 0.0 || f(hi) < 0.0) {
            std::ostringstream msg;
            msg << "mass_from_pressure: no bracket for P=" << P << ", c~=" << ct;
            throw DomainError(msg.str());
        }
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    const double s = ct + params.c_inf();
    const double C0 = params.C0();
    const double k0 = params.k0();
    const double den = 2.0 * C0 * (1.0 + s) * P + 4.0 * k0 * C0 * C0 * s;
    if (den == 0.0 || !std::isfinite(den)) {
        std::ostringstream msg;
        msg << "mass_from_pressure: zero denominator at P=" << P << ", c~=" << ct;
        throw DomainError(msg.str());
    }
    return (P * P + 2.0 * k0 * C0 * P) / den;
}

/// h(P̃, c̃) = P_m(m, c̃) m − P_m(m_∞, 0) m_∞, the coefficient of div ũ in G̃₁.
inline double h_coeff(double Pt, double ct, const ModelParams& params) {
    const double m = mass_from_pressure(Pt + params.P_inf(), ct, params);
    params.require_admissible(m, ct, "h_coeff");
    return pressure_dm(m, ct, params) * m - params.kappa2_sq() * params.m_inf();
}

/// 1/m − 1/m_∞ as a function of (P̃, c̃).
inline double m_reciprocal_dev(double Pt, double ct, const ModelParams& params) {
    const double m = mass_from_pressure(Pt + params.P_inf(), ct, params);
    params.require_admissible(m, ct, "m_reciprocal_dev");
    return 1.0 / m - 1.0 / params.m_inf();
}

/// Point value of the original unknowns.
struct PrimitivePoint {
    double m = 0.0;
    double n = 0.0;
    std::vector<double> u;
};

/// Point value of the reformulated unknowns.
struct TransformedPoint {
    double Pt = 0.0;
    std::vector<double> ut;
    double ct = 0.0;
};

inline TransformedPoint to_transformed(const PrimitivePoint& s, const ModelParams& params) {
    if (!(s.m > 0.0)) {
        std::ostringstream msg;
        msg << "to_transformed: nonpositive liquid mass m=" << s.m;
        throw DomainError(msg.str());
    }
    TransformedPoint out;
    out.Pt = pressure(s.m, s.n, params) - params.P_inf();
    out.ut.reserve(s.u.size());
    for (double v : s.u) out.ut.push_back(v / params.kappa1());
    out.ct = params.a0() * (s.n / s.m - params.n_inf() / params.m_inf());
    return out;
}

inline PrimitivePoint to_primitive(const TransformedPoint& s, const ModelParams& params,
                                   double n_tol = 1e-12) {
    PrimitivePoint out;
    out.m = mass_from_pressure(s.Pt + params.P_inf(), s.ct, params);
    if (!(out.m > 0.0)) {
        std::ostringstream msg;
        msg << "to_primitive: reconstructed m=" << out.m << " is not positive";
        throw DomainError(msg.str());
    }
    out.n = out.m * (s.ct / params.a0() + params.n_inf() / params.m_inf());
    if (out.n < -n_tol) {
        std::ostringstream msg;
        msg << "to_primitive: reconstructed gas mass n=" << out.n << " is negative";
        throw DomainError(msg.str());
    }
    if (out.n < 0.0) out.n = 0.0;
    out.u.reserve(s.ut.size());
    for (double v : s.ut) out.u.push_back(params.kappa1() * v);
    return out;
}

} // namespace besovflow
