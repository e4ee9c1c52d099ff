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

#ifndef QSDC_PROTOCOL_HPP
#define QSDC_PROTOCOL_HPP

#include <cstdint>
#include <locale>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdc/belltest.hpp"
#include "qsdc/bsm.hpp"
#include "qsdc/linkbudget.hpp"
#include "qsdc/parallel.hpp"
#include "qsdc/photonics.hpp"
#include "qsdc/qcore.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

/// Invalid session configuration, including a violated storage constraint.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class EveMode { None, InterceptResend };

struct EveModel {
    EveMode mode = EveMode::None;
    Degrees basis{0.0};
};

struct SecurityPolicy {
    long long min_counts_m = 1000;
    double s_threshold = 2.0;
    /// Accept iff S − k·σ > threshold.
    double significance_k = 0.0;
};

enum class Verdict { Accepted, Aborted };

[[nodiscard]] inline std::string to_string(Verdict v) { return v == Verdict::Accepted ? "accepted" : "aborted"; }

struct SessionConfig {
    SourceParams source;
    FiberSpan transmission_b{0.5, 0.2, std::nullopt}; // photon B, Alice → Bob before the test
    FiberSpan transmission_a{0.5, 0.2, std::nullopt}; // encoded photon A, Alice → Bob
    FiberSpan memory_a{2.2, 0.2, std::nullopt};
    FiberSpan memory_b{2.2, 0.2, std::nullopt};
    OverlapModel overlap;
    /// Delay setting of the BSM delay line; defaults to the overlap center.
    std::optional<double> bsm_delay_ps;
    double eta_s = efficiency_with_loss(0.75, 4.0);
    double eta_bsm = efficiency_with_loss(0.75, 5.0);
    /// Fraction of photons each side's coupler diverts to the security test.
    /// 0.5 matches the 50:50 couplers of the setup.
    double security_fraction = 0.5;
    SecurityPolicy policy;
    EveModel eve;
    std::vector<int> message;
    std::uint64_t seed = 0;
};

enum class DecodeOutcome { Zero, One, Erasure };

[[nodiscard]] inline std::string to_string(DecodeOutcome d) {
    switch (d) {
        case DecodeOutcome::Zero: return "0";
        case DecodeOutcome::One: return "1";
        case DecodeOutcome::Erasure: return "erasure";
    }
    return "?";
}

struct BitRecord {
    int sent = 0;
    ClickPattern pattern = ClickPattern::NoCoincidence;
    DecodeOutcome decoded = DecodeOutcome::Erasure;
};

struct SessionReport {
    double s_value = 0.0;
    double sigma = 0.0;
    Verdict verdict = Verdict::Aborted;
    ChshCounts security_counts{};
    std::vector<BitRecord> bits; // empty when aborted
    std::size_t decoded_bits = 0;
    std::size_t erasures = 0;
    std::size_t bit_errors = 0;
    double ber = 0.0;
    double throughput_bps = 0.0;
    double security_time_s = 0.0;
    double required_storage_s = 0.0;
    double memory_storage_s = 0.0;
    double model_time_s = 0.0;

    [[nodiscard]] std::string to_text() const;
};

/// Measure photon B in the linear basis at `basis` and resend the outcome:
/// ρ' = Σ_b (I ⊗ Π_b) ρ (I ⊗ Π_b).
[[nodiscard]] inline TwoPhotonDensity intercept_resend(const TwoPhotonDensity& rho, Degrees basis) {
    Matrix4 out = Matrix4::Zero();
    for (double offset : {0.0, 90.0}) {
        const Jones proj = linear_projector(basis + Degrees{offset});
        Matrix4 k = Matrix4::Zero();
        k.block<2, 2>(0, 0) = proj;
        k.block<2, 2>(2, 2) = proj;
        out += k * rho.matrix() * k.adjoint();
    }
    out = 0.5 * (out + out.adjoint()).eval();
    return TwoPhotonDensity(out);
}

[[nodiscard]] inline Verdict security_decision(double s, double sigma, const SecurityPolicy& policy) {
    if (sigma < 0.0) throw std::invalid_argument("security_decision: sigma must be >= 0");
    return s - policy.significance_k * sigma > policy.s_threshold ? Verdict::Accepted : Verdict::Aborted;
}

/// Four-detector decoding: antibunched (ψ−) → 1, bunched with orthogonal
/// polarizations (ψ+) → 0, anything else is an erasure.
[[nodiscard]] inline DecodeOutcome decode_bit(ClickPattern pattern) {
    switch (pattern) {
        case ClickPattern::CrossAD:
        case ClickPattern::CrossBC: return DecodeOutcome::One;
        case ClickPattern::SameAB:
        case ClickPattern::SameCD: return DecodeOutcome::Zero;
        default: return DecodeOutcome::Erasure;
    }
}

namespace detail {

inline void validate_session(const SessionConfig& c) {
    try {
        c.source.validate();
        c.transmission_a.validate();
        c.transmission_b.validate();
        c.memory_a.validate();
        c.memory_b.validate();
        c.overlap.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(c.eta_s > 0.0 && c.eta_s <= 1.0)) throw ConfigError("eta_s must lie in (0, 1]");
    if (!(c.eta_bsm > 0.0 && c.eta_bsm <= 1.0)) throw ConfigError("eta_bsm must lie in (0, 1]");
    if (!(c.security_fraction > 0.0 && c.security_fraction < 1.0)) {
        throw ConfigError("security_fraction must lie in (0, 1)");
    }
    if (c.policy.min_counts_m < 1) throw ConfigError("security policy needs m >= 1");
    if (c.policy.significance_k < 0.0) throw ConfigError("significance multiplier must be >= 0");
    for (int b : c.message) {
        if (b != 0 && b != 1) throw ConfigError("message bits must be 0 or 1");
    }
}

} // namespace detail

/// Rate of security-test coincidences: pairs whose photons are both diverted
/// to the analyzers and both detected.
[[nodiscard]] inline double security_coincidence_rate(const SessionConfig& c) {
    const double f = c.security_fraction;
    return c.source.pair_rate_hz() * f * f * transmittance(c.transmission_b) * c.eta_s * c.eta_s;
}

/// Time to collect m security coincidences.
[[nodiscard]] inline double security_test_time(const SessionConfig& c) {
    return static_cast<double>(c.policy.min_counts_m) / security_coincidence_rate(c);
}

/// Storage the memories must provide: 2·l_t/v + t.
[[nodiscard]] inline double required_storage_time(const SessionConfig& c) {
    return 2.0 * storage_time(c.transmission_b) + security_test_time(c);
}

/// Throws ConfigError naming the violated inequality when a memory is short.
inline void check_storage_constraint(const SessionConfig& c) {
    const double need = required_storage_time(c);
    for (const auto* mem : {&c.memory_a, &c.memory_b}) {
        const double have = storage_time(*mem);
        if (have < need) {
            std::ostringstream os;
            os.precision(6);
            os << "storage constraint violated: l_m/v = " << have << " s < 2*l_t/v + t = " << need
               << " s (memory " << mem->length_km << " km, need >= "
               << need * kFiberGroupSpeedKmPerS << " km)";
            throw ConfigError(os.str());
        }
    }
}

/// Runs one session: source → photon B transmission (and Eve) → CHSH test on
/// the diverted pairs → verdict → per-bit encode, transmit, BSM decode.
[[nodiscard]] inline SessionReport run_session(const SessionConfig& c, unsigned threads = 1) {
    detail::validate_session(c);
    check_storage_constraint(c);

    SessionReport r;
    r.security_time_s = security_test_time(c);
    r.required_storage_s = required_storage_time(c);
    r.memory_storage_s = std::min(storage_time(c.memory_a), storage_time(c.memory_b));

    const StreamKey root(c.seed);
    const TwoPhotonDensity emitted = source_state(calibrate_source(c.source.vis_0deg, c.source.vis_45deg));

    // Photon B crosses the channel; this is where an eavesdropper acts.
    TwoPhotonDensity shared = apply_drift(emitted, c.transmission_b, Photon::B);
    if (c.eve.mode == EveMode::InterceptResend) shared = intercept_resend(shared, c.eve.basis);

    // Security test: m expected coincidences split evenly over four settings.
    r.security_counts = simulate_bell_counts(shared, ChshSettings{}, security_coincidence_rate(c),
                                             r.security_time_s / 4.0, c.source.car, root.child(1).value());
    try {
        const ChshResult chsh = chsh_S(r.security_counts);
        r.s_value = chsh.s_value;
        r.sigma = chsh.sigma;
        r.verdict = security_decision(chsh.s_value, chsh.sigma, c.policy);
    } catch (const std::domain_error&) {
        r.verdict = Verdict::Aborted; // no coincidences at all cannot certify anything
    }
    r.model_time_s = r.required_storage_s;
    if (r.verdict == Verdict::Aborted) return r;

    // Stored photons: A in memory A, B in memory B.
    TwoPhotonDensity stored = apply_drift(shared, c.memory_a, Photon::A);
    stored = apply_drift(stored, c.memory_b, Photon::B);

    const double eta_a = transmittance(c.memory_a) * transmittance(c.transmission_a) * c.eta_bsm;
    const double eta_b = transmittance(c.transmission_b) * transmittance(c.memory_b) * c.eta_bsm;
    const double overlap_i = c.overlap(c.bsm_delay_ps.value_or(c.overlap.center_delay_ps));
    std::array<ClickPatternDist, 2> dist;
    for (int bit = 0; bit < 2; ++bit) {
        const TwoPhotonDensity sent = apply_drift(encode_bit(stored, bit), c.transmission_a, Photon::A);
        dist[bit] = with_detection_efficiency(click_pattern_probs(sent, overlap_i), eta_a, eta_b);
    }

    r.bits.resize(c.message.size());
    const StreamKey bits_key = root.child(stream::kSessionBits);
    parallel_for(c.message.size(), threads, [&](std::size_t i) {
        auto rng = bits_key.child(i).engine();
        BitRecord& rec = r.bits[i];
        rec.sent = c.message[i];
        rec.pattern = sample_click(dist[rec.sent], uniform01(rng));
        rec.decoded = decode_bit(rec.pattern);
    });

    for (const BitRecord& rec : r.bits) {
        if (rec.decoded == DecodeOutcome::Erasure) {
            ++r.erasures;
            continue;
        }
        ++r.decoded_bits;
        if ((rec.decoded == DecodeOutcome::One) != (rec.sent == 1)) ++r.bit_errors;
    }
    r.ber = r.decoded_bits == 0 ? 0.0 : static_cast<double>(r.bit_errors) / static_cast<double>(r.decoded_bits);
    // One pair per message bit; a quarter of all pairs reach both memories.
    const double message_pair_rate = c.source.pair_rate_hz() * (1.0 - c.security_fraction) * (1.0 - c.security_fraction);
    r.model_time_s = r.required_storage_s + static_cast<double>(c.message.size()) / message_pair_rate;
    r.throughput_bps = static_cast<double>(r.decoded_bits) / r.model_time_s;
    return r;
}

inline std::string SessionReport::to_text() const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "S = " << s_value << " +/- " << sigma << "\n";
    os << "verdict = " << to_string(verdict) << "\n";
    os.unsetf(std::ios::fixed);
    os.precision(6);
    os << "security_time_s = " << security_time_s << "\n";
    os << "required_storage_s = " << required_storage_s << "\n";
    os << "memory_storage_s = " << memory_storage_s << "\n";
    if (verdict == Verdict::Accepted) {
        os << "message_bits = " << bits.size() << "\n";
        os << "decoded_bits = " << decoded_bits << "\n";
        os << "erasures = " << erasures << "\n";
        os << "bit_errors = " << bit_errors << "\n";
        os << "ber = " << ber << "\n";
        os << "throughput_bps = " << throughput_bps << "\n";
    }
    return os.str();
}

} // namespace qsdc

#endif // QSDC_PROTOCOL_HPP
