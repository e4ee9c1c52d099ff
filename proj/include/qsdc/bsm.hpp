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

#ifndef QSDC_BSM_HPP
#define QSDC_BSM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsdc/gaussian_fit.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/photonics.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

enum class BsmSetting { M1, M2 };

[[nodiscard]] inline std::string to_string(BsmSetting s) { return s == BsmSetting::M1 ? "M1" : "M2"; }

/// Mode-overlap intensity as a function of relative delay:
/// I(τ) = max_overlap · exp(−(τ − τ0)² / (2σ²)).
struct OverlapModel {
    double center_delay_ps = 466.0;
    double coherence_sigma_ps = 15.0;
    double max_overlap = 1.0;

    void validate() const {
        if (!(coherence_sigma_ps > 0.0)) throw std::invalid_argument("OverlapModel: sigma must be positive");
        if (!(max_overlap >= 0.0 && max_overlap <= 1.0)) {
            throw std::invalid_argument("OverlapModel: max_overlap must lie in [0, 1]");
        }
    }

    [[nodiscard]] double operator()(double delay_ps) const {
        const double z = (delay_ps - center_delay_ps) / coherence_sigma_ps;
        return max_overlap * std::exp(-0.5 * z * z);
    }
};

/// Two-photon click classes behind the coupler. Port a/b are the H/V outputs
/// of coupler port 3 (PBS-5), c/d the H/V outputs of coupler port 4 (PBS-6).
enum class ClickPattern { CrossAD, CrossBC, CrossParallel, SameAB, SameCD, SameModePair, NoCoincidence };

struct ClickPatternDist {
    double cross_ad = 0.0;
    double cross_bc = 0.0;
    double cross_parallel = 0.0; // a-c or b-d
    double same_ab = 0.0;
    double same_cd = 0.0;
    double same_mode_pair = 0.0;
    double no_coincidence = 0.0;

    [[nodiscard]] double sum() const {
        return cross_ad + cross_bc + cross_parallel + same_ab + same_cd + same_mode_pair + no_coincidence;
    }
    [[nodiscard]] std::array<double, 7> as_array() const {
        return {cross_ad, cross_bc, cross_parallel, same_ab, same_cd, same_mode_pair, no_coincidence};
    }
};

inline constexpr std::array<ClickPattern, 7> kClickPatterns{
    ClickPattern::CrossAD, ClickPattern::CrossBC,      ClickPattern::CrossParallel, ClickPattern::SameAB,
    ClickPattern::SameCD,  ClickPattern::SameModePair, ClickPattern::NoCoincidence};

[[nodiscard]] inline std::string to_string(ClickPattern c) {
    switch (c) {
        case ClickPattern::CrossAD: return "cross_ad";
        case ClickPattern::CrossBC: return "cross_bc";
        case ClickPattern::CrossParallel: return "cross_parallel";
        case ClickPattern::SameAB: return "same_ab";
        case ClickPattern::SameCD: return "same_cd";
        case ClickPattern::SameModePair: return "same_mode_pair";
        case ClickPattern::NoCoincidence: return "no_coincidence";
    }
    return "?";
}

namespace fock {

/// Linear map from the two-photon polarization input (HH, HV, VH, VV) to the
/// symmetric two-photon Fock space over `modes` output modes. Each input basis
/// vector |p q⟩ means photon A with polarization p and photon B with q; the
/// single-photon transfer vectors give the output-mode amplitudes of each.
class TwoPhotonMap {
public:
    using SingleTransfer = std::function<Eigen::VectorXcd(Pol)>;

    TwoPhotonMap(int modes, const SingleTransfer& photon_a, const SingleTransfer& photon_b) : modes_(modes) {
        amps_ = Eigen::MatrixXcd::Zero(pair_count(), 4);
        for (Pol pa : {Pol::H, Pol::V}) {
            for (Pol pb : {Pol::H, Pol::V}) {
                const Eigen::VectorXcd ua = photon_a(pa);
                const Eigen::VectorXcd ub = photon_b(pb);
                const int col = basis_index(pa, pb);
                // a†_x a†_y |0⟩ = |1_x 1_y⟩ (x ≠ y) or √2 |2_x⟩ (x = y).
                for (int x = 0; x < modes_; ++x) {
                    for (int y = x; y < modes_; ++y) {
                        amps_(pair_index(x, y), col) =
                            x == y ? std::numbers::sqrt2 * ua(x) * ub(x) : ua(x) * ub(y) + ua(y) * ub(x);
                    }
                }
            }
        }
    }

    [[nodiscard]] int modes() const noexcept { return modes_; }
    [[nodiscard]] int pair_count() const noexcept { return modes_ * (modes_ + 1) / 2; }
    [[nodiscard]] int pair_index(int x, int y) const noexcept {
        // x ≤ y, row-major upper triangle
        return x * modes_ - x * (x - 1) / 2 + (y - x);
    }

    /// Probability of the Fock state |x, y⟩ (x ≤ y) for input ρ.
    [[nodiscard]] double probability(const TwoPhotonDensity& rho, int x, int y) const {
        const auto row = amps_.row(pair_index(x, y));
        return (row * rho.matrix() * row.adjoint())(0, 0).real();
    }

    /// Sum of probabilities over all output pairs accepted by `select(x, y)`.
    template <typename Select>
    [[nodiscard]] double probability_if(const TwoPhotonDensity& rho, Select&& select) const {
        double p = 0.0;
        for (int x = 0; x < modes_; ++x)
            for (int y = x; y < modes_; ++y)
                if (select(x, y)) p += probability(rho, x, y);
        return p;
    }

    /// Total output norm for input ρ; 1 for a lossless network.
    [[nodiscard]] double norm(const TwoPhotonDensity& rho) const {
        return probability_if(rho, [](int, int) { return true; });
    }

private:
    int modes_;
    Eigen::MatrixXcd amps_;
};

// Coupler output modes: port (0 → coupler port 3, 1 → port 4) × polarization
// × orthogonalized temporal mode (0 → photon A's mode, 1 → its complement).
inline constexpr int kCouplerModes = 8;

[[nodiscard]] constexpr int coupler_mode(int port, Pol pol, int time) noexcept {
    return port * 4 + static_cast<int>(pol) * 2 + time;
}
[[nodiscard]] constexpr int port_of(int mode) noexcept { return mode / 4; }
[[nodiscard]] constexpr Pol pol_of(int mode) noexcept { return static_cast<Pol>((mode / 2) % 2); }
[[nodiscard]] constexpr int time_of(int mode) noexcept { return mode % 2; }

/// Photon A enters coupler input 1 in temporal mode 0; photon B enters input 2
/// with temporal amplitude √I on mode 0 and √(1−I) on mode 1. The coupler maps
/// a†₁ → (a†₃ + i a†₄)/√2 and a†₂ → (i a†₃ + a†₄)/√2.
[[nodiscard]] inline Eigen::VectorXcd coupler_photon_a(Pol p) {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kCouplerModes);
    v(coupler_mode(0, p, 0)) = r;
    v(coupler_mode(1, p, 0)) = cplx{0.0, r};
    return v;
}

[[nodiscard]] inline Eigen::VectorXcd coupler_photon_b(Pol p, double overlap_i) {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kCouplerModes);
    const std::array<double, 2> t{std::sqrt(overlap_i), std::sqrt(1.0 - overlap_i)};
    for (int time = 0; time < 2; ++time) {
        v(coupler_mode(0, p, time)) = cplx{0.0, r * t[time]};
        v(coupler_mode(1, p, time)) = r * t[time];
    }
    return v;
}

[[nodiscard]] inline TwoPhotonMap coupler_map(double overlap_i) {
    return TwoPhotonMap(
        kCouplerModes, [](Pol p) { return coupler_photon_a(p); },
        [overlap_i](Pol p) { return coupler_photon_b(p, overlap_i); });
}

// M2 detection stage: a and c merge into detector 1, b and d into detector 2,
// through a 45° projection that keeps amplitude 1/√2 of each and discards the
// rest into loss modes L1/L2. Output modes: (D1, L1, D2, L2) × time.
inline constexpr int kM2Modes = 8;
[[nodiscard]] constexpr int m2_mode(int channel, int time) noexcept { return channel * 2 + time; }
inline constexpr int kD1 = 0, kL1 = 1, kD2 = 2, kL2 = 3;

[[nodiscard]] inline Eigen::VectorXcd erase_which_port(const Eigen::VectorXcd& coupler_out) {
    const double r = std::numbers::sqrt2 / 2.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kM2Modes);
    for (int time = 0; time < 2; ++time) {
        const cplx a = coupler_out(coupler_mode(0, Pol::H, time));
        const cplx b = coupler_out(coupler_mode(0, Pol::V, time));
        const cplx c = coupler_out(coupler_mode(1, Pol::H, time));
        const cplx d = coupler_out(coupler_mode(1, Pol::V, time));
        v(m2_mode(kD1, time)) = r * (a + c);
        v(m2_mode(kL1, time)) = r * (a - c);
        v(m2_mode(kD2, time)) = r * (b + d);
        v(m2_mode(kL2, time)) = r * (b - d);
    }
    return v;
}

[[nodiscard]] inline TwoPhotonMap m2_map(double overlap_i) {
    return TwoPhotonMap(
        kM2Modes, [](Pol p) { return erase_which_port(coupler_photon_a(p)); },
        [overlap_i](Pol p) { return erase_which_port(coupler_photon_b(p, overlap_i)); });
}

} // namespace fock

inline void check_overlap(double overlap_i) {
    if (!(overlap_i >= 0.0 && overlap_i <= 1.0)) throw std::invalid_argument("overlap intensity must lie in [0, 1]");
}

/// Lossless click-pattern distribution from the full bosonic-mode expansion.
[[nodiscard]] inline ClickPatternDist click_pattern_probs(const TwoPhotonDensity& rho, double overlap_i) {
    check_overlap(overlap_i);
    using namespace fock;
    const TwoPhotonMap map = coupler_map(overlap_i);
    ClickPatternDist d;
    for (int x = 0; x < kCouplerModes; ++x) {
        for (int y = x; y < kCouplerModes; ++y) {
            const double p = map.probability(rho, x, y);
            const int px = port_of(x), py = port_of(y);
            const Pol qx = pol_of(x), qy = pol_of(y);
            if (px != py) {
                // x is always the port-3 photon here because x ≤ y.
                if (qx == qy) d.cross_parallel += p;
                else if (qx == Pol::H) d.cross_ad += p;
                else d.cross_bc += p;
            } else if (qx != qy) {
                (px == 0 ? d.same_ab : d.same_cd) += p;
            } else {
                d.same_mode_pair += p;
            }
        }
    }
    return d;
}

/// Lossy detection: each photon is detected with probability eta_a / eta_b
/// before the click pattern is formed; a missing photon means no coincidence.
[[nodiscard]] inline ClickPatternDist with_detection_efficiency(ClickPatternDist d, double eta_a, double eta_b) {
    if (!(eta_a >= 0.0 && eta_a <= 1.0 && eta_b >= 0.0 && eta_b <= 1.0)) {
        throw std::invalid_argument("detection efficiency must lie in [0, 1]");
    }
    const double both = eta_a * eta_b;
    const double coincident = d.sum() - d.no_coincidence;
    d.cross_ad *= both;
    d.cross_bc *= both;
    d.cross_parallel *= both;
    d.same_ab *= both;
    d.same_cd *= both;
    d.same_mode_pair *= both;
    d.no_coincidence += coincident * (1.0 - both);
    return d;
}

[[nodiscard]] inline ClickPattern sample_click(const ClickPatternDist& d, double u) {
    const auto probs = d.as_array();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return kClickPatterns[k];
    }
    return ClickPattern::NoCoincidence;
}

/// Two-detector coincidence probability for one BSM setting.
///   M1: detector 1 sees {a, b}, detector 2 sees {c, d} (incoherent merge).
///   M2: detector 1 sees {a, c}, detector 2 sees {b, d} after coherent 45°
///       which-port erasure.
[[nodiscard]] inline double coincidence_prob_setting(const TwoPhotonDensity& rho, double overlap_i, BsmSetting setting) {
    check_overlap(overlap_i);
    using namespace fock;
    if (setting == BsmSetting::M1) {
        const TwoPhotonMap map = coupler_map(overlap_i);
        return map.probability_if(rho, [](int x, int y) { return port_of(x) != port_of(y); });
    }
    const TwoPhotonMap map = m2_map(overlap_i);
    return map.probability_if(rho, [](int x, int y) {
        const int cx = x / 2, cy = y / 2;
        return (cx == kD1 && cy == kD2) || (cx == kD2 && cy == kD1);
    });
}

/// Closed forms, valid for Bell-diagonal states supported on span{HV, VH}.
[[nodiscard]] inline double p_m1_closed(double w_psi_minus, double overlap_i) {
    return (1.0 - overlap_i) / 2.0 + overlap_i * w_psi_minus;
}
[[nodiscard]] inline double p_m2_closed(double w_psi_plus, double overlap_i) {
    return (1.0 - overlap_i) / 4.0 + overlap_i / 2.0 * w_psi_plus;
}

/// Which encoded state produces the coincidence peak under a setting.
[[nodiscard]] constexpr BellLabel peak_state(BsmSetting s) noexcept {
    return s == BsmSetting::M1 ? BellLabel::PsiMinus : BellLabel::PsiPlus;
}

struct ScanParams {
    double flux_hz = 2.0e4;
    double duration_s = 120.0;
    double efficiency_per_photon = 0.15;
    double car = 50.0;

    void validate() const {
        if (!(flux_hz > 0.0)) throw std::invalid_argument("hom_scan: flux must be positive");
        if (!(duration_s > 0.0)) throw std::invalid_argument("hom_scan: duration must be positive");
        if (!(efficiency_per_photon > 0.0 && efficiency_per_photon <= 1.0)) {
            throw std::invalid_argument("hom_scan: efficiency must lie in (0, 1]");
        }
        if (!(car > 0.0)) throw std::invalid_argument("hom_scan: CAR must be positive");
    }

    [[nodiscard]] double detected_pairs() const {
        return flux_hz * duration_s * efficiency_per_photon * efficiency_per_photon;
    }
};

/// Mean coincidence counts at one delay (before Poisson sampling).
[[nodiscard]] inline double hom_mean_counts(const TwoPhotonDensity& rho, BsmSetting setting, const OverlapModel& overlap,
                                            double delay_ps, const ScanParams& params) {
    const double n = params.detected_pairs();
    return n * coincidence_prob_setting(rho, overlap(delay_ps), setting) + n / params.car;
}

/// Poisson-sampled delay scan. Delay k draws from the stream (seed, k), so the
/// result does not depend on `threads`.
[[nodiscard]] inline std::vector<std::uint64_t> hom_scan(const TwoPhotonDensity& rho, BsmSetting setting,
                                                         const OverlapModel& overlap, std::span<const double> delays_ps,
                                                         const ScanParams& params, std::uint64_t seed,
                                                         unsigned threads = 1) {
    overlap.validate();
    params.validate();
    const StreamKey root = StreamKey(seed).child(stream::kHomScan);
    std::vector<std::uint64_t> counts(delays_ps.size());
    parallel_for(delays_ps.size(), threads, [&](std::size_t k) {
        auto rng = root.child(k).engine();
        counts[k] = static_cast<std::uint64_t>(
            poisson_draw(rng, hom_mean_counts(rho, setting, overlap, delays_ps[k], params)));
    });
    return counts;
}

/// (R_max − R_min) / (R_max + R_min).
[[nodiscard]] inline double visibility(double r_max, double r_min) {
    if (r_max < 0.0 || r_min < 0.0) throw std::invalid_argument("visibility: inputs must be nonnegative");
    if (r_max + r_min <= 0.0) throw std::invalid_argument("visibility: R_max + R_min must be positive");
    if (r_max < r_min) throw std::invalid_argument("visibility: need R_max >= R_min");
    return (r_max - r_min) / (r_max + r_min);
}

/// Fidelity estimate from a two-state fringe visibility, F = (1 + V)/2. This
/// is a convention of this library; hardware-reported fidelities may use a
/// different estimator.
[[nodiscard]] inline double fidelity_estimate(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("fidelity_estimate: V must lie in [0, 1]");
    return (1.0 + v) / 2.0;
}

/// Noise-free visibility between the peak and dip states at overlap I.
[[nodiscard]] inline double model_visibility(const TwoPhotonDensity& peak, const TwoPhotonDensity& dip,
                                             BsmSetting setting, double overlap_i = 1.0) {
    return visibility(coincidence_prob_setting(peak, overlap_i, setting),
                      coincidence_prob_setting(dip, overlap_i, setting));
}

struct BsmScanResult {
    BsmSetting setting = BsmSetting::M1;
    std::vector<double> delays_ps;
    std::vector<std::uint64_t> counts_psi_minus;
    std::vector<std::uint64_t> counts_psi_plus;
    FitResult fit_psi_minus = FitFailure{"not run"};
    FitResult fit_psi_plus = FitFailure{"not run"};
    std::optional<double> visibility;
    std::string diagnostic;
};

/// Scans the two encoded states (bit 1 → ψ−-like, bit 0 → ψ+-like) built from
/// `source`, fits both curves and takes the visibility between the peak-curve
/// maximum and the dip-curve minimum.
[[nodiscard]] inline BsmScanResult run_bsm_scan(const TwoPhotonDensity& source, BsmSetting setting,
                                                const OverlapModel& overlap, std::vector<double> delays_ps,
                                                const ScanParams& params, std::uint64_t seed, unsigned threads = 1) {
    BsmScanResult r;
    r.setting = setting;
    r.delays_ps = std::move(delays_ps);
    const TwoPhotonDensity minus_state = encode_bit(source, 1);
    const TwoPhotonDensity plus_state = encode_bit(source, 0);
    // Distinct sub-seeds per state keep the two curves statistically independent.
    r.counts_psi_minus = hom_scan(minus_state, setting, overlap, r.delays_ps, params, mix64(seed ^ 0x1), threads);
    r.counts_psi_plus = hom_scan(plus_state, setting, overlap, r.delays_ps, params, mix64(seed ^ 0x2), threads);

    const auto as_double = [](const std::vector<std::uint64_t>& c) { return std::vector<double>(c.begin(), c.end()); };
    r.fit_psi_minus = fit_gaussian(r.delays_ps, as_double(r.counts_psi_minus));
    r.fit_psi_plus = fit_gaussian(r.delays_ps, as_double(r.counts_psi_plus));
    if (!r.fit_psi_minus || !r.fit_psi_plus) {
        r.diagnostic = !r.fit_psi_minus ? "psi- fit failed: " + r.fit_psi_minus.failure().reason
                                        : "psi+ fit failed: " + r.fit_psi_plus.failure().reason;
        return r;
    }
    const GaussianFit& peak = setting == BsmSetting::M1 ? r.fit_psi_minus.value() : r.fit_psi_plus.value();
    const GaussianFit& dip = setting == BsmSetting::M1 ? r.fit_psi_plus.value() : r.fit_psi_minus.value();
    const double r_max = peak.extremum();
    const double r_min = std::max(0.0, dip.extremum());
    if (r_max < r_min || r_max <= 0.0) {
        r.diagnostic = "fitted peak does not exceed fitted dip";
        return r;
    }
    r.visibility = visibility(r_max, r_min);
    return r;
}

} // namespace qsdc

#endif // QSDC_BSM_HPP
