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

#ifndef QSDC_BELLTEST_HPP
#define QSDC_BELLTEST_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "qsdc/photonics.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

// PBS output ports of the two analyzers: i/j on photon A, k/l on photon B.
enum class PortA { I, J };
enum class PortB { K, L };

struct AnalyzerSetting {
    Degrees theta1;
    Degrees theta2;
};

/// Four HWP angle pairs combined with signs (+, +, +, −).
struct ChshSettings {
    std::array<AnalyzerSetting, 4> pairs{{
        {Degrees{0.0}, Degrees{11.25}},
        {Degrees{22.5}, Degrees{11.25}},
        {Degrees{22.5}, Degrees{33.75}},
        {Degrees{0.0}, Degrees{33.75}},
    }};

    static constexpr std::array<double, 4> kSigns{1.0, 1.0, 1.0, -1.0};
};

/// Coincidence counts for one angle setting.
struct CountsQuad {
    std::uint64_t n_ik = 0;
    std::uint64_t n_jl = 0;
    std::uint64_t n_il = 0;
    std::uint64_t n_jk = 0;

    [[nodiscard]] std::uint64_t total() const noexcept { return n_ik + n_jl + n_il + n_jk; }
    bool operator==(const CountsQuad&) const = default;
};

using ChshCounts = std::array<CountsQuad, 4>;

struct ChshResult {
    double s_value = 0.0;
    double sigma = 0.0;
    std::array<double, 4> per_setting_E{};
};

// Port convention. The HWP maps the analyzer direction to twice its angle.
// Photon A: port i is the PBS transmitted output behind HWP(θ1), so it
// projects onto linear polarization 2θ1. Photon B: the HWP angle is taken
// with opposite handedness and port k is the reflected output, projecting
// onto −2θ2 + 90°. With this labeling ψ+ gives E(θ1, θ2) = cos(4(θ1 − θ2)).
[[nodiscard]] inline Jones analyzer_projector(PortA port, Degrees theta1) {
    return linear_projector(Degrees{2.0 * theta1.value + (port == PortA::I ? 0.0 : 90.0)});
}

[[nodiscard]] inline Jones analyzer_projector(PortB port, Degrees theta2) {
    return linear_projector(Degrees{-2.0 * theta2.value + (port == PortB::K ? 90.0 : 0.0)});
}

/// Tr[(Π_A ⊗ Π_B) ρ].
[[nodiscard]] inline double coincidence_prob(const TwoPhotonDensity& rho, Degrees theta1, Degrees theta2, PortA a,
                                             PortB b) {
    return joint_probability(rho, analyzer_projector(a, theta1), analyzer_projector(b, theta2));
}

/// Port-pair probabilities ordered like CountsQuad: (ik, jl, il, jk).
[[nodiscard]] inline std::array<double, 4> port_pair_probs(const TwoPhotonDensity& rho, const AnalyzerSetting& s) {
    return {coincidence_prob(rho, s.theta1, s.theta2, PortA::I, PortB::K),
            coincidence_prob(rho, s.theta1, s.theta2, PortA::J, PortB::L),
            coincidence_prob(rho, s.theta1, s.theta2, PortA::I, PortB::L),
            coincidence_prob(rho, s.theta1, s.theta2, PortA::J, PortB::K)};
}

[[nodiscard]] inline double expectation_E(const CountsQuad& c) {
    const std::uint64_t total = c.total();
    if (total == 0) throw std::domain_error("expectation_E: zero total counts");
    const double plus = static_cast<double>(c.n_ik + c.n_jl);
    const double minus = static_cast<double>(c.n_il + c.n_jk);
    return (plus - minus) / static_cast<double>(total);
}

/// S from four rows of counts. The uncertainty treats each count as an
/// independent Poisson variate: Var(E) = (1 − E²)/N per row.
[[nodiscard]] inline ChshResult chsh_S(const ChshCounts& rows, const ChshSettings& settings = {}) {
    (void)settings; // rows are consumed in settings order; signs are fixed
    ChshResult r;
    double variance = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double e = expectation_E(rows[k]);
        r.per_setting_E[k] = e;
        r.s_value += ChshSettings::kSigns[k] * e;
        variance += (1.0 - e * e) / static_cast<double>(rows[k].total());
    }
    r.sigma = std::sqrt(variance);
    return r;
}

[[nodiscard]] inline double ideal_E(const TwoPhotonDensity& rho, const AnalyzerSetting& s) {
    const auto p = port_pair_probs(rho, s);
    return (p[0] + p[1] - p[2] - p[3]) / (p[0] + p[1] + p[2] + p[3]);
}

[[nodiscard]] inline double ideal_S(const TwoPhotonDensity& rho, const ChshSettings& settings = {}) {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += ChshSettings::kSigns[k] * ideal_E(rho, settings.pairs[k]);
    return s;
}

/// Poisson coincidence counts for each setting: mean = rate·duration·P(port
/// pair) plus an accidental floor rate·duration/(4·car) spread evenly over the
/// four port pairs. Each draw has its own stream keyed by (seed, setting,
/// port pair).
[[nodiscard]] inline ChshCounts simulate_bell_counts(const TwoPhotonDensity& rho, const ChshSettings& settings,
                                                     double pair_rate_hz, double duration_s, double car,
                                                     std::uint64_t seed) {
    if (!(pair_rate_hz > 0.0)) throw std::invalid_argument("simulate_bell_counts: pair rate must be positive");
    if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_bell_counts: duration must be positive");
    if (!(car > 0.0)) throw std::invalid_argument("simulate_bell_counts: CAR must be positive");
    const StreamKey root = StreamKey(seed).child(stream::kBellCounts);
    const double pairs = pair_rate_hz * duration_s;
    const double accidental = pairs / car / 4.0;
    ChshCounts out{};
    for (std::size_t k = 0; k < 4; ++k) {
        const auto probs = port_pair_probs(rho, settings.pairs[k]);
        std::array<std::uint64_t, 4> n{};
        for (std::size_t q = 0; q < 4; ++q) {
            auto rng = root.child({k, q}).engine();
            n[q] = static_cast<std::uint64_t>(poisson_draw(rng, pairs * probs[q] + accidental));
        }
        out[k] = CountsQuad{n[0], n[1], n[2], n[3]};
    }
    return out;
}

} // namespace qsdc

#endif // QSDC_BELLTEST_HPP
