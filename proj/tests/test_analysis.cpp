#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "besovflow/analysis.hpp"
#include "besovflow/solver.hpp"

using namespace besovflow;
using std::numbers::pi;

namespace {

const ModelParams kP{};

// strict/non-strict inequalities of the data class and the exponent branches
bool class_ok(double s1, int d, double p) { return d >= 2 && -d / p <= -s1 && -s1 < d / p - 1.0; }
bool p_range_ok(double sig, double s1, double dp) { return -s1 < sig && sig <= dp - 1.0; }
bool u_range_ok(double sig, double s1, double dp) {
    return (sig <= dp - 2.0) ? (-s1 < sig) : (sig <= dp);
}

std::vector<double> log_times(double lo, double hi, int n) {
    std::vector<double> t;
    for (int k = 0; k < n; ++k) t.push_back(lo * std::pow(hi / lo, k / (n - 1.0)));
    return t;
}

TState smooth_state(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    auto field = [&]() {
        const double a = ud(rng), b = ud(rng), c = ud(rng);
        const double k0 = 2 * pi / g.box_len;
        return sample(g, [=](std::span<const double> x) {
            return a * std::cos(k0 * x[0]) + b * std::sin(k0 * (x[0] + x[1])) + c * std::cos(2 * k0 * x[1]);
        });
    };
    TState s;
    s.Pt = field();
    for (int a = 0; a < g.dim; ++a) s.ut.push_back(field());
    s.ct = field();
    return s;
}

TState scale_state(const TState& s, double a) { return axpy(TState::zero(s.grid()), a, s); }

} // namespace

TEST(PredictedExponent, WorkedExamples) {
    EXPECT_DOUBLE_EQ(predicted_exponent(0.0, 1.5, 3, 2.0, Quantity::P), -0.75);
    EXPECT_DOUBLE_EQ(predicted_exponent(0.0, 1.0, 2, 2.0, Quantity::P), -0.5);
    EXPECT_DOUBLE_EQ(predicted_exponent(0.0, 1.0, 2, 2.0, Quantity::u), -0.5);
    // d=3, σ=−0.5 sits in the first velocity branch: σ <= d/p − 2 = −0.5
    EXPECT_DOUBLE_EQ(predicted_exponent(-0.5, 1.5, 3, 2.0, Quantity::u), -1.0);
    EXPECT_THROW(predicted_exponent(0.0, 0.5, 1, 2.0, Quantity::P), ValidationError);
    try {
        validate_decay_class(0.5, 1, 2.0);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("empty"), std::string::npos);
    }
}

TEST(PredictedExponent, BoundaryLattice) {
    const double eps = 1e-9;
    for (int d : {2, 3}) {
        for (double p : {2.0, 3.0, 4.0}) {
            const double dp = d / p;
            for (double s1 : {dp, dp + eps, 1.0 - dp, 1.0 - dp + eps, 0.5 * (1.0 - dp + dp), 1.0}) {
                bool class_fail = false;
                try {
                    validate_decay_class(s1, d, p);
                } catch (const ValidationError&) {
                    class_fail = true;
                }
                EXPECT_EQ(!class_fail, class_ok(s1, d, p)) << d << " " << p << " " << s1;
                if (class_fail) continue;
                for (double base : {-s1, dp - 1.0, dp - 2.0, dp}) {
                    for (double sig : {base - eps, base, base + eps}) {
                        for (Quantity q : {Quantity::P, Quantity::u}) {
                            const bool want = q == Quantity::P ? p_range_ok(sig, s1, dp) : u_range_ok(sig, s1, dp);
                            bool got = true;
                            try {
                                predicted_exponent(sig, s1, d, p, q);
                            } catch (const ValidationError&) {
                                got = false;
                            }
                            EXPECT_EQ(got, want) << "d=" << d << " p=" << p << " s1=" << s1 << " sig=" << sig
                                                 << " q=" << to_string(q);
                        }
                    }
                }
            }
        }
    }
}

TEST(PredictedExponent, RejectsLebesgueExponentOutsideRange) {
    EXPECT_THROW(predicted_exponent(0.0, 1.0, 2, 5.0, Quantity::P), ValidationError);
    EXPECT_THROW(predicted_exponent(0.0, 1.0, 3, 4.5, Quantity::P), ValidationError);
}

TEST(FitDecay, ExactPowerLaw) {
    const auto t = log_times(10.0, 1e4, 100);
    std::vector<double> n;
    for (double x : t) n.push_back(3.0 * std::pow(1.0 + x, -0.75));
    const auto f = fit_decay(t, n, 10.0, 1e4);
    EXPECT_NEAR(f.slope, -0.75, 1e-6);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-6);
    EXPECT_LT(f.residual_rms, 1e-10);
    EXPECT_EQ(f.samples, 100u);
}

TEST(FitDecay, NoisyPowerLaw) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd(0.0, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = log_times(10.0, 1e4, 100);
        std::vector<double> n;
        for (double x : t) n.push_back(std::pow(1.0 + x, -0.75) * (1.0 + nd(rng)));
        EXPECT_NEAR(fit_decay(t, n, 10.0, 1e4).slope, -0.75, 0.02);
    }
}

TEST(FitDecay, ConstantAndErrors) {
    const auto t = log_times(1.0, 100.0, 20);
    const std::vector<double> c(t.size(), 2.0);
    EXPECT_NEAR(fit_decay(t, c, 0.0, 1e9).slope, 0.0, 1e-14);
    EXPECT_THROW(fit_decay(t, c, 50.0, 100.0), ValidationError);  // fewer than 10 samples
    std::vector<double> bad = c;
    bad[5] = 0.0;
    EXPECT_THROW(fit_decay(t, bad, 0.0, 1e9), ValidationError);
    // a bad value outside the window is ignored
    EXPECT_NO_THROW(fit_decay(t, bad, t[6], 1e9));
}

TEST(FitWindow, BoxArtifactBound) {
    const double t_box = box_artifact_time(100.0, kP);
    EXPECT_NEAR(t_box, 0.1 * 1.0 * 1e4 / (4 * pi * pi * 1.079825586256007592), 1e-9);
    const auto [lo, hi] = decay_fit_window(100.0, 40.0, kP);
    EXPECT_EQ(lo, 10.0);
    EXPECT_EQ(hi, 0.5 * t_box);
    const ModelParams slow({0.5, 1, 0.25, 0.25, 2, 1});
    EXPECT_EQ(decay_fit_window(100.0, 1.0, slow).first, 20.0);
    EXPECT_EQ(decay_fit_window(1e4, 30.0, kP).second, 30.0);
}

TEST(BesovDataProfile, FlatWeightedBlocks) {
    for (auto [s1, d] : {std::pair{1.0, 2}, std::pair{0.5, 2}, std::pair{1.5, 3}, std::pair{0.8, 3}}) {
        const RadialProfile prof = besov_data_profile(s1, d);
        const auto b = radial_block_norms(prof, {&prof.P}, -20, -2);
        double lo = kInf, hi = 0.0;
        for (int j = -20; j <= -2; ++j) {
            const double v = std::pow(2.0, -j * s1) * b.at(j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_LT(hi / lo - 1.0, 0.1) << s1 << " " << d;
        EXPECT_EQ(prof.size(), 4096u);
        EXPECT_LE(prof.r.back(), 1.0);
        for (double w : prof.w) EXPECT_EQ(w, 0.0);
    }
}

TEST(BesovDataProfile, WhiteSpectrumAtTopOfClass) {
    const RadialProfile prof = besov_data_profile(1.0, 2);
    for (double v : prof.P) EXPECT_DOUBLE_EQ(v, 1.0);
    // nothing above the cutoff: the |ξ| <= 1 indicator norm
    EXPECT_NEAR(radial_l2_norm(prof, prof.P) / std::sqrt(1.0 / (4 * pi)), 1.0, 1e-5);
    EXPECT_THROW(besov_data_profile(2.0, 2), ValidationError);
}

TEST(HybridSample, ZeroState) {
    const auto dec = build_decomposition(Grid{2, 16, 10.0});
    const auto s = hybrid_sample(TState::zero(dec.grid), 2.0, dec);
    EXPECT_EQ(s.instantaneous(), 0.0);
    EXPECT_EQ(s.P_low_diss + s.u_low_diss + s.high_diss + s.int_P + s.int_u + s.int_high, 0.0);
}

TEST(HybridSample, SingleLowBandDatum) {
    // L = 16π, k = 3: |ξ| = 0.375 = 1.5·2^{−2}, inside band −2 only
    const Grid g{2, 32, 16 * pi};
    const auto dec = build_decomposition(g, 0);
    TState s = TState::zero(g);
    auto mode = [](std::span<const double> x) { return 1e-3 * std::cos(0.375 * x[0]); };
    s.Pt = sample(g, mode);
    s.ut[1] = sample(g, mode);
    s.ct = sample(g, mode);
    for (double p : {2.0, 4.0}) {
        const auto h = hybrid_sample(s, p, dec);
        EXPECT_GT(h.P_low, 0.0);
        EXPECT_GT(h.u_low, 0.0);
        EXPECT_GT(h.c_low, 0.0);
        EXPECT_LT(h.high, 1e-10 * h.P_low);
        // Ḃ^{d/p−1} weight 2^{−2(d/p−1)} times the L^p norm of the mode
        const double Lp = lp_norm(s.Pt, p);
        EXPECT_NEAR(h.P_low, std::pow(2.0, -2.0 * (2.0 / p - 1.0)) * Lp, 1e-12 * Lp);
    }
}

TEST(Trackers, ZeroDataStaysZero) {
    const auto dec = build_decomposition(Grid{2, 16, 10.0});
    LyapunovTracker lt(2, 2.0, 0);
    NegativeNormTracker nt(1.0, 0);
    for (int k = 0; k < 5; ++k) {
        TState z = TState::zero(dec.grid);
        z.t = k;
        const auto b = hybrid_blocks(z, 2.0, dec);
        lt.add(b);
        nt.add(b);
    }
    for (double x : lt.X()) EXPECT_EQ(x, 0.0);
    EXPECT_TRUE(lt.verdict().pass);
    EXPECT_TRUE(nt.verdict().pass);
    EXPECT_EQ(nt.verdict().ratio, 0.0);
}

TEST(Trackers, OracleIsNonAmplifying) {
    const RadialProfile prof = besov_data_profile(1.0, 2);
    LyapunovTracker lt(2, 2.0, 0);
    NegativeNormTracker nt(1.0, 0);
    std::vector<BlockNorms> blocks;
    for (double t : log_times(1e-2, 1e4, 80)) {
        const auto b = hybrid_blocks(linear_multiplier_evolve(prof, t, kP), 2.0);
        lt.add(b);
        nt.add(b);
        blocks.push_back(b.Puc_p);
    }
    const auto nv = nt.verdict();
    EXPECT_TRUE(nv.pass);
    EXPECT_LE(nv.ratio, 1.0 + 1e-6);
    for (std::size_t k = 1; k < blocks.size(); ++k) {
        for (std::size_t j = 0; j < blocks[k].values.size(); ++j) {
            EXPECT_LE(blocks[k].values[j], blocks[k - 1].values[j] * (1.0 + 1e-12));
        }
    }
    EXPECT_TRUE(lt.verdict().pass);
    // entries nonnegative, integrals non-decreasing
    const auto& s = lt.samples();
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (double v : {s[k].P_low, s[k].u_low, s[k].c_low, s[k].high, s[k].P_low_diss, s[k].u_low_diss,
                         s[k].high_diss}) {
            EXPECT_GE(v, 0.0);
        }
        if (k > 0) {
            EXPECT_GE(s[k].int_P, s[k - 1].int_P);
            EXPECT_GE(s[k].int_u, s[k - 1].int_u);
            EXPECT_GE(s[k].int_high, s[k - 1].int_high);
            EXPECT_GE(lt.X()[k], lt.X()[k - 1]);
        }
    }
    EXPECT_THROW(hybrid_blocks(prof, 4.0), ConfigError);
}

TEST(Trackers, VerdictMargins) {
    LyapunovTracker lt(2, 2.0, 0);
    BlockNorms one{-1, {1.0, 1.0}};
    BlockNorms big{-1, {50.0, 50.0}};
    HybridBlocks b{0.0, one, one, one, one, one, one};
    lt.add(b);
    b.t = 0.5;
    b.Puc_2 = big;
    b.Pu_2 = big;
    lt.add(b);
    EXPECT_FALSE(lt.verdict(10.0).pass);
    EXPECT_TRUE(lt.verdict(1e6).pass);

    NegativeNormTracker nt(1.0, 0);
    HybridBlocks c{0.0, one, one, one, one, one, one};
    nt.add(c);
    c.Puc_p = BlockNorms{-1, {3.5, 3.5}};
    nt.add(c);
    EXPECT_FALSE(nt.verdict(3.0).pass);
    EXPECT_NEAR(nt.verdict(3.0).ratio, 3.5, 1e-14);
    EXPECT_TRUE(nt.verdict(4.0).pass);
}

TEST(Trackers, SmallAmplitudeRatioIsStable) {
    const Grid g{2, 32, 20.0};
    const auto dec = build_decomposition(g);
    const TState shape = smooth_state(g, 5);
    const double X1 = smallness_norm(shape, 2.0, dec);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 5.0;
    cfg.output_every = 5;
    std::vector<double> ratio;
    for (double eps : {1e-3, 1e-2}) {
        const TState s0 = scale_state(shape, eps / X1);
        EXPECT_NEAR(smallness_norm(s0, 2.0, dec), eps, 1e-12);
        LyapunovTracker lt(2, 2.0, 0);
        const auto res = evolve(s0, cfg, kP, [](const TState& s) { return rhs_transformed(s, kP); },
                                Sink<TState>([&](const TState& s, long) { lt.add(hybrid_blocks(s, 2.0, dec)); }));
        ASSERT_FALSE(res.aborted);
        ratio.push_back(lt.X().back() / lt.X0());
        EXPECT_TRUE(lt.verdict().pass) << lt.verdict().detail;
    }
    EXPECT_NEAR(ratio[1] / ratio[0], 1.0, 0.5);
}

TEST(DecayNorm, GridQuantities) {
    const Grid g{2, 32, 2 * pi};
    TState s = TState::zero(g);
    s.Pt = sample(g, [](std::span<const double> x) { return std::sin(2 * x[0]); });
    s.ut[0] = sample(g, [](std::span<const double> x) { return std::cos(x[1]); });
    s.ut[1] = sample(g, [](std::span<const double> x) { return std::sin(x[1]); });
    EXPECT_NEAR(decay_norm(s, Quantity::P, 0.0, 2.0), std::sqrt(2 * pi * pi), 1e-12);
    EXPECT_NEAR(decay_norm(s, Quantity::P, 1.0, 2.0), 2.0 * std::sqrt(2 * pi * pi), 1e-12);
    // |u| ≡ 1
    EXPECT_NEAR(decay_norm(s, Quantity::u, 0.0, 4.0), std::pow(4 * pi * pi, 0.25), 1e-12);
}
