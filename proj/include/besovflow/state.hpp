#pragma once

// Grid states in the original (m, n, u) and reformulated (P̃, ũ, c̃) variables.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"
#include "besovflow/model.hpp"

namespace besovflow {

struct TState {
    double t = 0.0;
    Field Pt;
    std::vector<Field> ut;
    Field ct;

    static TState zero(const Grid& g) {
        TState s;
        s.Pt = Field(g);
        s.ut.assign(static_cast<std::size_t>(g.dim), Field(g));
        s.ct = Field(g);
        return s;
    }
    const Grid& grid() const noexcept { return Pt.grid(); }

    /// Fields in the fixed order P̃, ũ_1..ũ_d, c̃.
    std::vector<Field> components() const {
        std::vector<Field> out{Pt};
        out.insert(out.end(), ut.begin(), ut.end());
        out.push_back(ct);
        return out;
    }
};

struct PState {
    double t = 0.0;
    Field m;
    Field n;
    std::vector<Field> u;

    const Grid& grid() const noexcept { return m.grid(); }

    std::vector<Field> components() const {
        std::vector<Field> out{m, n};
        out.insert(out.end(), u.begin(), u.end());
        return out;
    }
};

inline TState axpy(const TState& y, double a, const TState& k) {
    TState out;
    out.t = y.t;
    out.Pt = axpy(y.Pt, a, k.Pt);
    out.ct = axpy(y.ct, a, k.ct);
    out.ut.reserve(y.ut.size());
    for (std::size_t i = 0; i < y.ut.size(); ++i) out.ut.push_back(axpy(y.ut[i], a, k.ut[i]));
    return out;
}

inline PState axpy(const PState& y, double a, const PState& k) {
    PState out;
    out.t = y.t;
    out.m = axpy(y.m, a, k.m);
    out.n = axpy(y.n, a, k.n);
    out.u.reserve(y.u.size());
    for (std::size_t i = 0; i < y.u.size(); ++i) out.u.push_back(axpy(y.u[i], a, k.u[i]));
    return out;
}

template <class State>
bool all_finite(const State& s) {
    for (const auto& f : s.components()) {
        if (!f.all_finite()) return false;
    }
    return true;
}

/// Largest physical flow speed |u| on the grid.
inline double max_speed(const TState& s, const ModelParams& params) {
    double best = 0.0;
    for (std::size_t i = 0; i < s.Pt.size(); ++i) {
        double v2 = 0.0;
        for (const auto& f : s.ut) v2 += f[i] * f[i];
        best = std::max(best, std::sqrt(v2));
    }
    return params.kappa1() * best;
}

inline double max_speed(const PState& s, const ModelParams&) {
    double best = 0.0;
    for (std::size_t i = 0; i < s.m.size(); ++i) {
        double v2 = 0.0;
        for (const auto& f : s.u) v2 += f[i] * f[i];
        best = std::max(best, std::sqrt(v2));
    }
    return best;
}

/// Grid coordinates of flat index `flat`, formatted for error messages.
inline std::string describe_location(const Grid& g, std::size_t flat) {
    std::ostringstream os;
    std::vector<std::size_t> idx(static_cast<std::size_t>(g.dim));
    std::size_t rem = flat;
    for (int a = g.dim - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] = rem % static_cast<std::size_t>(g.n);
        rem /= static_cast<std::size_t>(g.n);
    }
    os << "grid index (";
    for (std::size_t a = 0; a < idx.size(); ++a) os << (a ? "," : "") << idx[a];
    os << ")";
    return os.str();
}

inline TState to_transformed(const PState& s, const ModelParams& params) {
    const Grid& g = s.grid();
    TState out = TState::zero(g);
    out.t = s.t;
    auto P = out.Pt.mutable_values();
    auto c = out.ct.mutable_values();
    std::vector<std::span<double>> u;
    for (auto& f : out.ut) u.push_back(f.mutable_values());
    PrimitivePoint pt;
    pt.u.resize(static_cast<std::size_t>(g.dim));
    for (std::size_t i = 0; i < g.size(); ++i) {
        pt.m = s.m[i];
        pt.n = s.n[i];
        for (int a = 0; a < g.dim; ++a) pt.u[static_cast<std::size_t>(a)] = s.u[static_cast<std::size_t>(a)][i];
        try {
            const auto tp = to_transformed(pt, params);
            P[i] = tp.Pt;
            c[i] = tp.ct;
            for (int a = 0; a < g.dim; ++a) u[static_cast<std::size_t>(a)][i] = tp.ut[static_cast<std::size_t>(a)];
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " at " + describe_location(g, i));
        }
    }
    return out;
}

inline PState to_primitive(const TState& s, const ModelParams& params) {
    const Grid& g = s.grid();
    PState out;
    out.t = s.t;
    out.m = Field(g);
    out.n = Field(g);
    out.u.assign(static_cast<std::size_t>(g.dim), Field(g));
    auto m = out.m.mutable_values();
    auto n = out.n.mutable_values();
    std::vector<std::span<double>> u;
    for (auto& f : out.u) u.push_back(f.mutable_values());
    TransformedPoint tp;
    tp.ut.resize(static_cast<std::size_t>(g.dim));
    for (std::size_t i = 0; i < g.size(); ++i) {
        tp.Pt = s.Pt[i];
        tp.ct = s.ct[i];
        for (int a = 0; a < g.dim; ++a) tp.ut[static_cast<std::size_t>(a)] = s.ut[static_cast<std::size_t>(a)][i];
        try {
            const auto pp = to_primitive(tp, params);
            m[i] = pp.m;
            n[i] = pp.n;
            for (int a = 0; a < g.dim; ++a) u[static_cast<std::size_t>(a)][i] = pp.u[static_cast<std::size_t>(a)];
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " at " + describe_location(g, i));
        }
    }
    return out;
}

/// L² distance between two transformed states, summed over all components.
inline double l2_distance(const TState& a, const TState& b) {
    const auto ca = a.components();
    const auto cb = b.components();
    double acc = 0.0;
    for (std::size_t k = 0; k < ca.size(); ++k) {
        auto va = ca[k].values();
        auto vb = cb[k].values();
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d = va[i] - vb[i];
            acc += d * d;
        }
    }
    return std::sqrt(acc * a.grid().cell_volume());
}

inline double l2_norm(const TState& a) {
    double acc = 0.0;
    for (const auto& f : a.components()) {
        for (double v : f.values()) acc += v * v;
    }
    return std::sqrt(acc * a.grid().cell_volume());
}

} // namespace besovflow
