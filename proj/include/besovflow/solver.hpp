#pragma once

// Pseudo-spectral method of lines for the original and reformulated systems.

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"
#include "besovflow/model.hpp"
#include "besovflow/state.hpp"

namespace besovflow {

struct SolverConfig {
    double dt = 0.01;
    double t_end = 1.0;
    bool dealias = true;
    int output_every = 1;
    double cfl = 0.4;

    /// dt <= cfl · Δx / (κ2 + max|u|).
    void validate(const Grid& g, double kappa2, double max_u) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be > 0");
        if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("solver: t_end must be >= 0");
        if (output_every < 1) throw ConfigError("solver: output_every must be >= 1");
        const double limit = cfl * g.dx() / (kappa2 + max_u);
        if (dt > limit) {
            std::ostringstream msg;
            msg << "solver: dt=" << dt << " exceeds CFL limit " << limit << " (C_cfl=" << cfl << ")";
            throw ConfigError(msg.str());
        }
    }

    int step_count() const noexcept {
        if (t_end <= 0.0) return 0;
        return static_cast<int>(std::ceil(t_end / dt - 1e-9));
    }
};

/// Moves native-grid spectra to the physical compute grid and back. With
/// dealiasing the compute grid is the 3/2 zero-padded grid.
class SpectralWorkspace {
public:
    SpectralWorkspace(const Grid& g, bool dealias)
        : grid_(g), m_(dealias ? 3 * g.n / 2 : g.n), table_(wave_table(g)) {
        msize_ = 1;
        for (int i = 0; i < g.dim; ++i) msize_ *= static_cast<std::size_t>(m_);
    }

    const WaveTable& table() const noexcept { return *table_; }
    std::size_t compute_size() const noexcept { return msize_; }
    int compute_n() const noexcept { return m_; }

    std::vector<double> to_physical(std::span<const cplx> spec) const {
        std::vector<double> out(msize_);
        if (m_ == grid_.n) {
            fft_inverse(grid_.dim, m_, spec, out);
        } else {
            const auto padded = pad_spectrum(spec, grid_.dim, grid_.n, m_);
            fft_inverse(grid_.dim, m_, padded, out);
        }
        return out;
    }

    std::vector<cplx> to_spectral(std::span<const double> phys) const {
        std::vector<cplx> full(msize_);
        fft_forward(grid_.dim, m_, phys, full);
        if (m_ == grid_.n) return full;
        return truncate_spectrum(full, grid_.dim, m_, grid_.n);
    }

    std::vector<cplx> derivative(std::span<const cplx> spec, int axis) const {
        return spectral_derivative(spec, *table_, axis);
    }

    /// Compute-grid flat index -> message naming the coordinates.
    std::string location(std::size_t flat) const {
        Grid cg = grid_;
        cg.n = m_;
        std::ostringstream os;
        os << describe_location(cg, flat) << " on " << (m_ == grid_.n ? "native" : "padded") << " grid";
        return os.str();
    }

private:
    Grid grid_;
    int m_;
    std::size_t msize_ = 0;
    std::shared_ptr<const WaveTable> table_;
};

/// Time derivative of the reformulated system:
///   P̃_t = −κ2 ∇·ũ + G̃1,  ũ_t = −κ2 ∇P̃ − αũ + G̃2,  c̃_t = −κ1 ũ·∇c̃.
inline TState rhs_transformed(const TState& s, const ModelParams& params, bool dealias = true) {
    const Grid& g = s.grid();
    const int d = g.dim;
    const SpectralWorkspace ws(g, dealias);
    const auto& tab = ws.table();
    const double k1 = params.kappa1();
    const double k2 = params.kappa2();
    const double alpha = params.alpha();

    const auto& Ph = s.Pt.spectrum();
    const auto& ch = s.ct.spectrum();
    std::vector<const std::vector<cplx>*> uh;
    for (const auto& f : s.ut) uh.push_back(&f.spectrum());

    const auto P = ws.to_physical(Ph);
    const auto c = ws.to_physical(ch);
    std::vector<std::vector<double>> u, dP, dc;
    std::vector<std::vector<std::vector<double>>> du(static_cast<std::size_t>(d));  // du[k][i] = ∂_i u_k
    for (int a = 0; a < d; ++a) {
        u.push_back(ws.to_physical(*uh[static_cast<std::size_t>(a)]));
        dP.push_back(ws.to_physical(ws.derivative(Ph, a)));
        dc.push_back(ws.to_physical(ws.derivative(ch, a)));
    }
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            du[static_cast<std::size_t>(k)].push_back(ws.to_physical(ws.derivative(*uh[static_cast<std::size_t>(k)], i)));
        }
    }

    const std::size_t M = ws.compute_size();
    std::vector<double> G1(M), C(M);
    std::vector<std::vector<double>> G2(static_cast<std::size_t>(d), std::vector<double>(M));
    for (std::size_t q = 0; q < M; ++q) {
        double h = 0.0;
        double Mdev = 0.0;
        try {
            const double m = mass_from_pressure(P[q] + params.P_inf(), c[q], params);
            params.require_admissible(m, c[q], "rhs_transformed");
            h = pressure_dm(m, c[q], params) * m - params.kappa2_sq() * params.m_inf();
            Mdev = 1.0 / m - 1.0 / params.m_inf();
        } catch (const DomainError& e) {
            std::ostringstream msg;
            msg << "admissibility violation at t=" << s.t << ", " << ws.location(q) << ": " << e.what();
            throw SolverError(msg.str(), s.t);
        }
        double div = 0.0, adv_P = 0.0, adv_c = 0.0;
        for (std::size_t a = 0; a < static_cast<std::size_t>(d); ++a) {
            div += du[a][a][q];
            adv_P += u[a][q] * dP[a][q];
            adv_c += u[a][q] * dc[a][q];
        }
        G1[q] = -k1 * h * div - k1 * adv_P;
        C[q] = -k1 * adv_c;
        for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k) {
            double adv_u = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) adv_u += u[i][q] * du[k][i][q];
            G2[k][q] = -k1 * adv_u - (1.0 / k1) * Mdev * dP[k][q];
        }
    }

    auto G1h = ws.to_spectral(G1);
    auto Ch = ws.to_spectral(C);
    const std::size_t N = g.size();
    for (std::size_t i = 0; i < N; ++i) {
        if (tab.nyquist[i]) continue;
        cplx div(0.0);
        for (int a = 0; a < d; ++a) div += cplx(0.0, tab.xi[a][i]) * (*uh[static_cast<std::size_t>(a)])[i];
        G1h[i] += -k2 * div;
    }

    TState out;
    out.t = s.t;
    out.Pt = Field::from_spectrum(g, G1h);
    out.ct = Field::from_spectrum(g, Ch);
    for (int k = 0; k < d; ++k) {
        auto G2h = ws.to_spectral(G2[static_cast<std::size_t>(k)]);
        const auto& ukh = *uh[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < N; ++i) {
            const cplx grad = tab.nyquist[i] ? cplx(0.0) : cplx(0.0, tab.xi[k][i]) * Ph[i];
            G2h[i] += -k2 * grad - alpha * ukh[i];
        }
        out.ut.push_back(Field::from_spectrum(g, G2h));
    }
    return out;
}

/// Time derivative of the original system in velocity form:
///   m_t = −∇·(mu),  n_t = −∇·(nu),  u_t = −(u·∇)u − ∇P(m,n)/m − αu.
inline PState rhs_primitive(const PState& s, const ModelParams& params, bool dealias = true) {
    const Grid& g = s.grid();
    const int d = g.dim;
    const SpectralWorkspace ws(g, dealias);
    const auto& tab = ws.table();
    const double floor_m = params.m_min();

    const auto& mh = s.m.spectrum();
    const auto& nh = s.n.spectrum();
    std::vector<const std::vector<cplx>*> uh;
    for (const auto& f : s.u) uh.push_back(&f.spectrum());

    const auto m = ws.to_physical(mh);
    const auto n = ws.to_physical(nh);
    std::vector<std::vector<double>> u;
    std::vector<std::vector<std::vector<double>>> du(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) u.push_back(ws.to_physical(*uh[static_cast<std::size_t>(a)]));
    for (int k = 0; k < d; ++k) {
        for (int i = 0; i < d; ++i) {
            du[static_cast<std::size_t>(k)].push_back(ws.to_physical(ws.derivative(*uh[static_cast<std::size_t>(k)], i)));
        }
    }

    const std::size_t M = ws.compute_size();
    std::vector<double> P(M);
    for (std::size_t q = 0; q < M; ++q) {
        if (!(m[q] >= floor_m)) {
            std::ostringstream msg;
            msg << "liquid mass m=" << m[q] << " below floor " << floor_m << " at t=" << s.t << ", "
                << ws.location(q);
            throw SolverError(msg.str(), s.t);
        }
        try {
            P[q] = pressure(m[q], std::max(n[q], 0.0), params);
        } catch (const DomainError& e) {
            std::ostringstream msg;
            msg << "pressure evaluation failed at t=" << s.t << ", " << ws.location(q) << ": " << e.what();
            throw SolverError(msg.str(), s.t);
        }
    }
    const auto Ph = ws.to_spectral(P);

    std::vector<std::vector<double>> dP;
    for (int a = 0; a < d; ++a) dP.push_back(ws.to_physical(ws.derivative(Ph, a)));

    const std::size_t N = g.size();
    std::vector<cplx> mt(N, cplx(0.0)), nt(N, cplx(0.0));
    std::vector<double> flux(M);
    for (int a = 0; a < d; ++a) {
        const auto& ua = u[static_cast<std::size_t>(a)];
        for (std::size_t q = 0; q < M; ++q) flux[q] = m[q] * ua[q];
        const auto fm = ws.to_spectral(flux);
        for (std::size_t q = 0; q < M; ++q) flux[q] = n[q] * ua[q];
        const auto fn = ws.to_spectral(flux);
        for (std::size_t i = 0; i < N; ++i) {
            if (tab.nyquist[i]) continue;
            const cplx ik(0.0, tab.xi[a][i]);
            mt[i] -= ik * fm[i];
            nt[i] -= ik * fn[i];
        }
    }

    PState out;
    out.t = s.t;
    out.m = Field::from_spectrum(g, mt);
    out.n = Field::from_spectrum(g, nt);
    std::vector<double> acc(M);
    for (std::size_t k = 0; k < static_cast<std::size_t>(d); ++k) {
        for (std::size_t q = 0; q < M; ++q) {
            double adv = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) adv += u[i][q] * du[k][i][q];
            acc[q] = -adv - dP[k][q] / m[q];
        }
        auto ah = ws.to_spectral(acc);
        const auto& ukh = *uh[k];
        for (std::size_t i = 0; i < N; ++i) ah[i] -= params.alpha() * ukh[i];
        out.u.push_back(Field::from_spectrum(g, ah));
    }
    return out;
}

/// Z = κ2 ∇P̃ + α ũ.
inline std::vector<Field> z_variable(const TState& s, const ModelParams& params) {
    std::vector<Field> out;
    for (int a = 0; a < s.grid().dim; ++a) {
        const Field dP = derivative(s.Pt, a);
        out.push_back(axpy(scaled(dP, params.kappa2()), params.alpha(), s.ut[static_cast<std::size_t>(a)]));
    }
    return out;
}

/// One classical fourth-order Runge-Kutta step of y' = rhs(y).
template <class State, class Rhs>
State step_rk4(const State& y, Rhs&& rhs, double dt) {
    const State k1 = rhs(y);
    State y2 = axpy(y, 0.5 * dt, k1);
    y2.t = y.t + 0.5 * dt;
    const State k2 = rhs(y2);
    State y3 = axpy(y, 0.5 * dt, k2);
    y3.t = y.t + 0.5 * dt;
    const State k3 = rhs(y3);
    State y4 = axpy(y, dt, k3);
    y4.t = y.t + dt;
    const State k4 = rhs(y4);

    State out = axpy(y, dt / 6.0, k1);
    out = axpy(out, dt / 3.0, k2);
    out = axpy(out, dt / 3.0, k3);
    out = axpy(out, dt / 6.0, k4);
    out.t = y.t + dt;
    if (!all_finite(out)) {
        std::ostringstream msg;
        msg << "non-finite state after step from t=" << y.t;
        throw SolverError(msg.str(), y.t);
    }
    return out;
}

inline std::vector<double> conserved_integrals(const PState& s) { return {s.m.integral(), s.n.integral()}; }
inline std::vector<double> conserved_integrals(const TState&) { return {}; }

template <class State>
struct EvolveResult {
    State final_state;
    double t_final = 0.0;
    long steps = 0;
    bool aborted = false;
    std::string abort_reason;
    double last_good_time = 0.0;
    double wall_seconds = 0.0;
    double final_l2 = 0.0;
    /// Relative drift of each conserved integral (empty for transformed runs).
    std::vector<double> conservation_drift;
};

template <class State>
using Sink = std::function<void(const State&, long step)>;

/// Advances `initial` to cfg.t_end with RK4 at uniform dt' = t_end / ceil(t_end / dt),
/// calling `sink` at step 0, every cfg.output_every steps and at the final step.
/// Failures stop the run and are reported in the result; snapshots already
/// handed to the sink remain valid.
template <class State, class Rhs>
EvolveResult<State> evolve(const State& initial, const SolverConfig& cfg, const ModelParams& params, Rhs&& rhs,
                           const Sink<State>& sink = {}) {
    cfg.validate(initial.grid(), params.kappa2(), max_speed(initial, params));
    const auto start = std::chrono::steady_clock::now();
    const int nsteps = cfg.step_count();
    const double dt = nsteps > 0 ? cfg.t_end / nsteps : 0.0;
    const auto c0 = conserved_integrals(initial);

    EvolveResult<State> res;
    State y = initial;
    if (sink) sink(y, 0);
    res.last_good_time = y.t;
    try {
        for (int step = 1; step <= nsteps; ++step) {
            y = step_rk4(y, rhs, dt);
            res.steps = step;
            res.last_good_time = y.t;
            if (sink && (step % cfg.output_every == 0 || step == nsteps)) sink(y, step);
        }
    } catch (const SolverError& e) {
        res.aborted = true;
        res.abort_reason = e.what();
        res.last_good_time = e.last_good_time();
    }
    res.t_final = y.t;
    const auto c1 = conserved_integrals(y);
    for (std::size_t i = 0; i < c0.size(); ++i) {
        const double scale = std::abs(c0[i]) > 0.0 ? std::abs(c0[i]) : 1.0;
        res.conservation_drift.push_back(std::abs(c1[i] - c0[i]) / scale);
    }
    double acc = 0.0;
    for (const auto& f : y.components()) {
        for (double v : f.values()) acc += v * v;
    }
    res.final_l2 = std::sqrt(acc * y.grid().cell_volume());
    res.final_state = std::move(y);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace besovflow
