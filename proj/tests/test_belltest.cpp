// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qsdc/belltest.hpp"
#include "test_helpers.hpp"

namespace qsdc {
namespace {

using namespace qsdc::literals;

const ChshCounts kReferenceCounts{{
    {420, 378, 101, 139},
    {433, 390, 89, 122},
    {460, 421, 58, 101},
    {112, 75, 403, 449},
}};

// Independent projector arithmetic: |pol(φ)> built from cos/sin, the
// two-photon amplitude <a, b|ψ> summed by hand.
double brute_pair_prob(const TwoPhotonPure& psi, double phi_a_deg, double phi_b_deg) {
    const double ra = phi_a_deg * std::numbers::pi / 180.0, rb = phi_b_deg * std::numbers::pi / 180.0;
    const double a[2] = {std::cos(ra), std::sin(ra)};
    const double b[2] = {std::cos(rb), std::sin(rb)};
    cplx amp = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) amp += a[i] * b[j] * psi[2 * i + j];
    return std::norm(amp);
}

TEST(CoincidenceProb, PortConventionExamples) {
    const TwoPhotonDensity psi_plus(bell_state(BellLabel::PsiPlus));
    EXPECT_NEAR(coincidence_prob(psi_plus, 0_deg, 0_deg, PortA::I, PortB::K), 0.5, 1e-12);
    EXPECT_NEAR(coincidence_prob(psi_plus, 0_deg, 0_deg, PortA::I, PortB::L), 0.0, 1e-12);
    EXPECT_NEAR(coincidence_prob(psi_plus, 0_deg, 11.25_deg, PortA::I, PortB::K), 0.42678, 1e-5);
    EXPECT_NEAR(coincidence_prob(psi_plus, 0_deg, 11.25_deg, PortA::I, PortB::K),
                (1.0 + std::cos(std::numbers::pi / 4.0)) / 4.0, 1e-12);
}

TEST(CoincidenceProb, MatchesBruteForceProjectors) {
    // Port i ↔ polarizer at 2θ1, j at 2θ1+90; k ↔ −2θ2+90, l ↔ −2θ2.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ang(-90.0, 90.0);
    for (int n = 0; n < 200; ++n) {
        const TwoPhotonPure psi = testing::random_pure(rng);
        const double t1 = ang(rng), t2 = ang(rng);
        const TwoPhotonDensity rho(psi);
        EXPECT_NEAR(coincidence_prob(rho, Degrees{t1}, Degrees{t2}, PortA::I, PortB::K),
                    brute_pair_prob(psi, 2 * t1, -2 * t2 + 90), 1e-12);
        EXPECT_NEAR(coincidence_prob(rho, Degrees{t1}, Degrees{t2}, PortA::J, PortB::L),
                    brute_pair_prob(psi, 2 * t1 + 90, -2 * t2), 1e-12);
    }
}

TEST(CoincidenceProb, MaximallyMixedIsUniform) {
    const auto rho = TwoPhotonDensity::maximally_mixed();
    for (auto a : {PortA::I, PortA::J})
        for (auto b : {PortB::K, PortB::L}) EXPECT_NEAR(coincidence_prob(rho, 13_deg, 71_deg, a, b), 0.25, 1e-12);
}

TEST(CoincidenceProb, PortPairsFormDistribution) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> ang(-180.0, 180.0);
    for (int n = 0; n < 1000; ++n) {
        const auto p = port_pair_probs(testing::random_density(rng), {Degrees{ang(rng)}, Degrees{ang(rng)}});
        double s = 0.0;
        for (double x : p) {
            EXPECT_GE(x, -1e-12);
            EXPECT_LE(x, 1.0 + 1e-12);
            s += x;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(CoincidenceProb, PsiPlusCorrelationFollowsAngleDifference) {
    const TwoPhotonDensity psi_plus(bell_state(BellLabel::PsiPlus));
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> ang(-90.0, 90.0);
    for (int n = 0; n < 200; ++n) {
        const Degrees t1{ang(rng)}, t2{ang(rng)};
        EXPECT_NEAR(ideal_E(psi_plus, {t1, t2}), std::cos(4.0 * (t1 - t2).radians()), 1e-12);
    }
}

TEST(ExpectationE, ReferenceRows) {
    EXPECT_NEAR(expectation_E(kReferenceCounts[0]), 0.53757, 5e-6);
    EXPECT_NEAR(expectation_E(kReferenceCounts[3]), -0.64004, 5e-6);
    EXPECT_EQ(expectation_E({10, 10, 10, 10}), 0.0);
}

TEST(ExpectationE, RejectsZeroTotal) { EXPECT_THROW((void)expectation_E({0, 0, 0, 0}), std::domain_error); }

TEST(ExpectationE, InvariantUnderUniformScaling) {
    std::mt19937_64 rng(34);
    std::uniform_int_distribution<std::uint64_t> n(0, 5000), k(1, 1000);
    for (int t = 0; t < 500; ++t) {
        CountsQuad c{n(rng), n(rng), n(rng), n(rng) + 1};
        const std::uint64_t s = k(rng);
        EXPECT_NEAR(expectation_E(c), expectation_E({c.n_ik * s, c.n_jl * s, c.n_il * s, c.n_jk * s}), 1e-12);
    }
}

// Bootstrap oracle: resample every count as Poisson(observed) and take the
// spread of S.
double bootstrap_sigma(const ChshCounts& rows, int replicates, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < replicates; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto draw = [&](std::uint64_t mean) {
                return static_cast<double>(std::poisson_distribution<long long>(static_cast<double>(mean))(rng));
            };
            const double a = draw(rows[k].n_ik) + draw(rows[k].n_jl);
            const double b = draw(rows[k].n_il) + draw(rows[k].n_jk);
            s += ChshSettings::kSigns[k] * (a - b) / (a + b);
        }
        sum += s;
        sum2 += s * s;
    }
    const double mean = sum / replicates;
    return std::sqrt(sum2 / replicates - mean * mean);
}

TEST(ChshS, ReferenceCountsValue) {
    const ChshResult r = chsh_S(kReferenceCounts);
    EXPECT_NEAR(r.s_value, 2.4637, 5e-5);
    EXPECT_NEAR(r.s_value, 2.46, 0.005);
    EXPECT_NEAR(r.per_setting_E[1], 612.0 / 1034.0, 1e-12);
    EXPECT_NEAR(r.per_setting_E[2], 722.0 / 1040.0, 1e-12);
}

TEST(ChshS, SigmaMatchesBootstrap) {
    const ChshResult r = chsh_S(kReferenceCounts);
    EXPECT_GE(r.sigma, 0.04);
    EXPECT_LE(r.sigma, 0.07);
    const double boot = bootstrap_sigma(kReferenceCounts, 100000, 2024);
    EXPECT_NEAR(r.sigma / boot, 1.0, 0.10) << "propagated " << r.sigma << " bootstrap " << boot;
}

TEST(ChshS, TsirelsonPointRows) {
    // Integer rows approximating E = ±1/√2 to ~1e-12.
    const double e = std::numbers::sqrt2 / 2.0;
    const double big = 1e12;
    const auto row = [&](double sign) {
        const auto plus = static_cast<std::uint64_t>(std::llround(big * (1.0 + sign * e) / 2.0));
        const auto minus = static_cast<std::uint64_t>(std::llround(big * (1.0 - sign * e) / 2.0));
        return CountsQuad{plus, 0, minus, 0};
    };
    const ChshResult r = chsh_S({row(1), row(1), row(1), row(-1)});
    EXPECT_NEAR(r.s_value, 2.82843, 1e-5);
}

TEST(ChshS, PropagatesZeroTotal) {
    ChshCounts rows = kReferenceCounts;
    rows[2] = {};
    EXPECT_THROW((void)chsh_S(rows), std::domain_error);
}

TEST(IdealS, Examples) {
    EXPECT_NEAR(ideal_S(bell_state(BellLabel::PsiPlus)), 2.0 * std::numbers::sqrt2, 1e-9);

    const Matrix4 werner =
        0.93 * TwoPhotonDensity(bell_state(BellLabel::PsiPlus)).matrix() + 0.07 * Matrix4::Identity() / 4.0;
    EXPECT_NEAR(ideal_S(TwoPhotonDensity(werner)), 2.63044, 1e-5);

    const TwoPhotonDensity dephased = TwoPhotonDensity::mixture(
        std::array{product_state(Pol::H, Pol::V), product_state(Pol::V, Pol::H)}, std::array{0.5, 0.5});
    EXPECT_NEAR(std::abs(ideal_S(dephased)), std::numbers::sqrt2, 1e-9);
}

TEST(IdealS, LinearInWernerWeight) {
    for (double w = 0.0; w <= 1.0; w += 0.05) {
        const Matrix4 m =
            w * TwoPhotonDensity(bell_state(BellLabel::PsiPlus)).matrix() + (1.0 - w) * Matrix4::Identity() / 4.0;
        EXPECT_NEAR(ideal_S(TwoPhotonDensity(m)), w * 2.0 * std::numbers::sqrt2, 1e-9);
    }
}

TEST(IdealS, TsirelsonBound) {
    std::mt19937_64 rng(35);
    for (int n = 0; n < 10000; ++n) {
        EXPECT_LE(std::abs(ideal_S(testing::random_density(rng))), 2.0 * std::numbers::sqrt2 + 1e-9);
    }
}

TEST(SimulateBellCounts, CalibratedSourceLandsInEnvelope) {
    const TwoPhotonDensity rho = source_state(calibrate_source(0.96, 0.90));
    const ChshResult r = chsh_S(simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, 7));
    EXPECT_GE(r.s_value, 2.3);
    EXPECT_LE(r.s_value, 2.7);
}

TEST(SimulateBellCounts, ReplicationEnvelope) {
    // 10³ seeded replications: the bulk of S sits inside [2.3, 2.7].
    const TwoPhotonDensity rho = source_state(calibrate_source(0.96, 0.90));
    int inside = 0;
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const double s = chsh_S(simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, seed)).s_value;
        inside += (s >= 2.3 && s <= 2.7);
        mean += s / 1000.0;
    }
    // Expected mean: ideal S diluted by the accidental floor.
    EXPECT_NEAR(mean, ideal_S(rho) / (1.0 + 1.0 / 50.0), 0.01);
    EXPECT_GE(inside, 980);
}

TEST(SimulateBellCounts, LargeSampleLimit) {
    const TwoPhotonDensity psi_plus(bell_state(BellLabel::PsiPlus));
    const double car = 50.0;
    const ChshResult r = chsh_S(simulate_bell_counts(psi_plus, {}, 1e7, 1.0, car, 3));
    EXPECT_NEAR(r.s_value, 2.0 * std::numbers::sqrt2 / (1.0 + 1.0 / car), 0.01);
}

TEST(SimulateBellCounts, WhiteNoiseViolatesNothing) {
    const ChshResult r = chsh_S(simulate_bell_counts(TwoPhotonDensity::maximally_mixed(), {}, 100.0, 60.0, 50.0, 1));
    EXPECT_LT(std::abs(r.s_value), 0.3);
}

TEST(SimulateBellCounts, DeterministicUnderSeed) {
    const TwoPhotonDensity rho = source_state(calibrate_source(0.96, 0.90));
    EXPECT_EQ(simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, 99), simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, 99));
    EXPECT_NE(simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, 99), simulate_bell_counts(rho, {}, 17.3, 60.0, 50.0, 98));
}

TEST(SimulateBellCounts, RejectsBadRates) {
    const auto rho = TwoPhotonDensity::maximally_mixed();
    EXPECT_THROW((void)simulate_bell_counts(rho, {}, 0.0, 60.0, 50.0, 1), std::invalid_argument);
    EXPECT_THROW((void)simulate_bell_counts(rho, {}, 10.0, -1.0, 50.0, 1), std::invalid_argument);
}

} // namespace
} // namespace qsdc
