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

#ifndef QSDC_PHOTONICS_HPP
#define QSDC_PHOTONICS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "qsdc/qcore.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

/// Group velocity of light in fiber, km/s.
inline constexpr double kFiberGroupSpeedKmPerS = 200000.0;

/// Observable description of the entangled-pair source.
struct SourceParams {
    double pair_prob_p = 0.03;
    double pump_rate_hz = 10e9;
    double car = 50.0;
    double vis_0deg = 0.96;
    double vis_45deg = 0.90;

    void validate() const {
        if (!(pair_prob_p > 0.0 && pair_prob_p < 1.0)) throw std::invalid_argument("SourceParams: need 0 < p < 1");
        if (!(pump_rate_hz > 0.0)) throw std::invalid_argument("SourceParams: pump rate must be positive");
        if (!(car > 1.0)) throw std::invalid_argument("SourceParams: CAR must exceed 1");
        if (!(0.0 <= vis_45deg && vis_45deg <= vis_0deg && vis_0deg <= 1.0)) {
            throw std::invalid_argument("SourceParams: need 0 <= vis_45deg <= vis_0deg <= 1");
        }
    }

    [[nodiscard]] double pair_rate_hz() const noexcept { return pump_rate_hz * pair_prob_p; }
};

/// Two-parameter noise model: white-noise weight w and ψ+→ψ− phase-flip
/// probability d.
struct SourceCalibration {
    double werner_weight_w = 1.0;
    double dephase_d = 0.0;

    void validate() const {
        if (!(werner_weight_w >= 0.0 && werner_weight_w <= 1.0)) {
            throw std::invalid_argument("SourceCalibration: w must lie in [0, 1]");
        }
        if (!(dephase_d >= 0.0 && dephase_d <= 0.5)) {
            throw std::invalid_argument("SourceCalibration: d must lie in [0, 0.5]");
        }
    }
};

/// Inverts V0 = w and V45 = w(1 − 2d).
[[nodiscard]] inline SourceCalibration calibrate_source(double vis_0deg, double vis_45deg) {
    if (!(vis_45deg > 0.0 && vis_45deg <= vis_0deg && vis_0deg <= 1.0)) {
        throw std::invalid_argument("calibrate_source: need 0 < vis_45deg <= vis_0deg <= 1");
    }
    SourceCalibration cal{vis_0deg, (1.0 - vis_45deg / vis_0deg) / 2.0};
    cal.validate();
    return cal;
}

/// ρ = w·[(1−d)|ψ+⟩⟨ψ+| + d|ψ−⟩⟨ψ−|] + (1−w)·I/4.
///
/// Equivalently w·[(1−2d)|ψ+⟩⟨ψ+| + 2d·(|HV⟩⟨HV|+|VH⟩⟨VH|)/2] + (1−w)·I/4:
/// the HV/VH populations are untouched and only the HV-VH coherence decays.
[[nodiscard]] inline TwoPhotonDensity source_state(const SourceCalibration& cal) {
    cal.validate();
    const double w = cal.werner_weight_w;
    const double d = cal.dephase_d;
    const TwoPhotonDensity psi_plus(bell_state(BellLabel::PsiPlus));
    const TwoPhotonDensity psi_minus(bell_state(BellLabel::PsiMinus));
    Matrix4 m = w * ((1.0 - d) * psi_plus.matrix() + d * psi_minus.matrix()) + (1.0 - w) * Matrix4::Identity() / 4.0;
    return TwoPhotonDensity(m);
}

/// Linear polarizer projector along `angle` (polarization direction, not
/// wave-plate angle).
[[nodiscard]] inline Jones linear_projector(Degrees angle) {
    Eigen::Vector2cd v(std::cos(angle.radians()), std::sin(angle.radians()));
    return v * v.adjoint();
}

[[nodiscard]] inline double joint_probability(const TwoPhotonDensity& rho, const Jones& proj_a, const Jones& proj_b) {
    Matrix4 k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = proj_a(i, j) * proj_b;
    return (k * rho.matrix()).trace().real();
}

/// Two-photon fringe contrast in the linear basis at `basis`: photon A's
/// polarizer at `basis`, photon B's at the parallel or orthogonal direction,
/// contrast = |P_orthogonal − P_parallel| / (P_orthogonal + P_parallel).
[[nodiscard]] inline double fringe_visibility(const TwoPhotonDensity& rho, Degrees basis) {
    const Jones pa = linear_projector(basis);
    const double parallel = joint_probability(rho, pa, linear_projector(basis));
    const double orthogonal = joint_probability(rho, pa, linear_projector(basis + Degrees{90.0}));
    const double total = parallel + orthogonal;
    if (total <= 0.0) return 0.0;
    return std::abs(orthogonal - parallel) / total;
}

enum class Photon { A, B };

/// Message-bit encoder on photon A: two QWPs at 0° (aligned axes) for bit 1,
/// at 0° and 90° (orthogonal axes) for bit 0.
[[nodiscard]] inline JonesOperator encoder_operator(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("encode_bit: bit must be 0 or 1");
    const JonesOperator first = wave_plate(JonesKind::QWP, Degrees{0.0});
    const JonesOperator second = wave_plate(JonesKind::QWP, Degrees{bit == 1 ? 0.0 : 90.0});
    return second * first;
}

[[nodiscard]] inline TwoPhotonDensity encode_bit(const TwoPhotonDensity& rho, int bit) {
    return apply_local(encoder_operator(bit), JonesOperator::identity(), rho);
}

struct FiberSpan {
    double length_km = 0.0;
    double atten_db_per_km = 0.2;
    std::optional<JonesOperator> drift;

    void validate() const {
        if (!(length_km >= 0.0) || !std::isfinite(length_km)) throw std::invalid_argument("FiberSpan: length must be >= 0");
        if (!(atten_db_per_km >= 0.0) || !std::isfinite(atten_db_per_km)) {
            throw std::invalid_argument("FiberSpan: attenuation must be >= 0");
        }
    }
};

/// T = 10^(−atten·length/10).
[[nodiscard]] inline double transmittance(const FiberSpan& span) {
    span.validate();
    return std::pow(10.0, -span.atten_db_per_km * span.length_km / 10.0);
}

/// Time of flight through the span, seconds.
[[nodiscard]] inline double storage_time(const FiberSpan& span) {
    span.validate();
    return span.length_km / kFiberGroupSpeedKmPerS;
}

[[nodiscard]] inline TwoPhotonDensity apply_drift(const TwoPhotonDensity& rho, const FiberSpan& span, Photon side) {
    const JonesOperator op = span.drift.value_or(JonesOperator::identity());
    return side == Photon::A ? apply_local(op, JonesOperator::identity(), rho)
                             : apply_local(JonesOperator::identity(), op, rho);
}

/// Seeded small-angle drift: rotation by an angle uniform in [−max, max].
[[nodiscard]] inline JonesOperator random_drift(StreamKey key, Degrees max_angle) {
    auto rng = key.child(stream::kDrift).engine();
    const double u = 2.0 * uniform01(rng) - 1.0;
    return rotation(Degrees{u * max_angle.value});
}

} // namespace qsdc

#endif // QSDC_PHOTONICS_HPP
