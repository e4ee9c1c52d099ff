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

#ifndef QSDC_QCORE_HPP
#define QSDC_QCORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsdc {

using cplx = std::complex<double>;
using Jones = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

/// Tolerance for algebraic identities (unitarity, trace, Hermiticity).
inline constexpr double kAlgebraTol = 1e-12;
/// Tolerance for positivity of density-matrix eigenvalues.
inline constexpr double kEigenTol = 1e-10;

/// Angle in degrees. Every public interface takes angles in this form; the
/// conversion to radians happens once, in radians().
struct Degrees {
    double value = 0.0;

    [[nodiscard]] constexpr double radians() const noexcept { return value * std::numbers::pi / 180.0; }
    constexpr Degrees operator-() const noexcept { return Degrees{-value}; }
    constexpr Degrees operator+(Degrees o) const noexcept { return Degrees{value + o.value}; }
    constexpr Degrees operator-(Degrees o) const noexcept { return Degrees{value - o.value}; }
    constexpr bool operator==(const Degrees&) const = default;
};

namespace literals {
constexpr Degrees operator""_deg(long double v) { return Degrees{static_cast<double>(v)}; }
constexpr Degrees operator""_deg(unsigned long long v) { return Degrees{static_cast<double>(v)}; }
} // namespace literals

// Two-photon basis index = 2 * pol(A) + pol(B), H = 0, V = 1.
enum class Pol : int { H = 0, V = 1 };

[[nodiscard]] constexpr int basis_index(Pol a, Pol b) noexcept {
    return 2 * static_cast<int>(a) + static_cast<int>(b);
}

enum class BellLabel { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

inline constexpr std::array<BellLabel, 4> kBellLabels{
    BellLabel::PsiPlus, BellLabel::PsiMinus, BellLabel::PhiPlus, BellLabel::PhiMinus};

[[nodiscard]] inline std::string to_string(BellLabel label) {
    switch (label) {
        case BellLabel::PsiPlus: return "psi+";
        case BellLabel::PsiMinus: return "psi-";
        case BellLabel::PhiPlus: return "phi+";
        case BellLabel::PhiMinus: return "phi-";
    }
    return "?";
}

/// Normalized pure state over (HH, HV, VH, VV).
class TwoPhotonPure {
public:
    explicit TwoPhotonPure(const Vector4& amplitudes) : amps_(amplitudes) {
        if (!amps_.allFinite() || std::abs(amps_.squaredNorm() - 1.0) > kAlgebraTol) {
            throw std::invalid_argument("TwoPhotonPure: amplitudes must be normalized");
        }
    }

    [[nodiscard]] const Vector4& amplitudes() const noexcept { return amps_; }
    [[nodiscard]] cplx operator[](int i) const { return amps_(i); }

    /// |<this|other>|, the phase-insensitive overlap used for state equality.
    [[nodiscard]] double overlap(const TwoPhotonPure& other) const {
        return std::abs(amps_.dot(other.amps_));
    }

private:
    Vector4 amps_;
};

/// Mixed two-photon polarization state. Construction validates the density
/// matrix invariants (Hermitian, unit trace, positive semidefinite).
class TwoPhotonDensity {
public:
    explicit TwoPhotonDensity(const Matrix4& m) : rho_(m) { validate(); }

    TwoPhotonDensity(const TwoPhotonPure& psi) // NOLINT(google-explicit-constructor)
        : rho_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

    [[nodiscard]] static TwoPhotonDensity maximally_mixed() {
        return TwoPhotonDensity(Matrix4::Identity() / 4.0);
    }

    /// Convex combination sum_k weights[k] * states[k]; weights must be
    /// nonnegative and sum to one.
    template <typename Range, typename Weights>
    [[nodiscard]] static TwoPhotonDensity mixture(const Range& states, const Weights& weights) {
        Matrix4 m = Matrix4::Zero();
        double total = 0.0;
        auto w = std::begin(weights);
        for (const auto& s : states) {
            if (*w < 0.0) throw std::invalid_argument("mixture: negative weight");
            m += *w * TwoPhotonDensity(s).matrix();
            total += *w;
            ++w;
        }
        if (std::abs(total - 1.0) > kAlgebraTol) throw std::invalid_argument("mixture: weights must sum to 1");
        return TwoPhotonDensity(m);
    }

    [[nodiscard]] const Matrix4& matrix() const noexcept { return rho_; }
    [[nodiscard]] cplx operator()(int r, int c) const { return rho_(r, c); }
    [[nodiscard]] double trace() const { return rho_.trace().real(); }

    [[nodiscard]] double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix4> es(rho_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    [[nodiscard]] double purity() const { return (rho_ * rho_).trace().real(); }

    [[nodiscard]] bool approx_equal(const TwoPhotonDensity& other, double tol = kAlgebraTol) const {
        return (rho_ - other.rho_).cwiseAbs().maxCoeff() <= tol;
    }

private:
    void validate() const {
        if (!rho_.allFinite()) throw std::invalid_argument("TwoPhotonDensity: non-finite entries");
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kAlgebraTol) {
            throw std::invalid_argument("TwoPhotonDensity: matrix is not Hermitian");
        }
        if (std::abs(rho_.trace() - cplx{1.0, 0.0}) > kAlgebraTol) {
            throw std::invalid_argument("TwoPhotonDensity: trace must be 1");
        }
        if (min_eigenvalue() < -kEigenTol) {
            throw std::invalid_argument("TwoPhotonDensity: matrix is not positive semidefinite");
        }
    }

    Matrix4 rho_;
};

enum class JonesKind { HWP, QWP, Rotation, Custom };

/// 2x2 unitary acting on one photon's polarization.
class JonesOperator {
public:
    explicit JonesOperator(const Jones& m, JonesKind kind = JonesKind::Custom, Degrees angle = {})
        : m_(m), kind_(kind), angle_(angle) {
        if (!m_.allFinite() || (m_.adjoint() * m_ - Jones::Identity()).cwiseAbs().maxCoeff() > kAlgebraTol) {
            throw std::invalid_argument("JonesOperator: matrix is not unitary");
        }
    }

    [[nodiscard]] static JonesOperator identity() { return JonesOperator(Jones::Identity()); }

    [[nodiscard]] const Jones& matrix() const noexcept { return m_; }
    [[nodiscard]] JonesKind kind() const noexcept { return kind_; }
    [[nodiscard]] Degrees angle() const noexcept { return angle_; }

    /// Composition: (*this) applied after `first`.
    [[nodiscard]] JonesOperator operator*(const JonesOperator& first) const {
        return JonesOperator(m_ * first.m_);
    }

private:
    Jones m_;
    JonesKind kind_;
    Degrees angle_;
};

/// Real rotation of the polarization plane by theta.
[[nodiscard]] inline JonesOperator rotation(Degrees theta) {
    const double c = std::cos(theta.radians());
    const double s = std::sin(theta.radians());
    Jones m;
    m << c, -s, s, c;
    return JonesOperator(m, JonesKind::Rotation, theta);
}

/// Half- or quarter-wave plate with fast axis at theta from horizontal.
///   HWP(θ) = [[cos2θ, sin2θ], [sin2θ, −cos2θ]]
///   QWP(θ) = R(θ)·diag(1, i)·R(−θ)    (global phase dropped)
[[nodiscard]] inline JonesOperator wave_plate(JonesKind kind, Degrees theta) {
    if (!std::isfinite(theta.value)) throw std::invalid_argument("wave_plate: angle must be finite");
    switch (kind) {
        case JonesKind::HWP: {
            const double c = std::cos(2.0 * theta.radians());
            const double s = std::sin(2.0 * theta.radians());
            Jones m;
            m << c, s, s, -c;
            return JonesOperator(m, JonesKind::HWP, theta);
        }
        case JonesKind::QWP: {
            Jones retarder = Jones::Zero();
            retarder(0, 0) = 1.0;
            retarder(1, 1) = cplx{0.0, 1.0};
            return JonesOperator(rotation(theta).matrix() * retarder * rotation(-theta).matrix(),
                                 JonesKind::QWP, theta);
        }
        default: throw std::invalid_argument("wave_plate: kind must be HWP or QWP");
    }
}

/// Distance between two unitaries modulo a global phase. Zero iff a = e^{iφ}·b,
/// since |tr(a†b)| ≤ 2 with equality only in that case.
[[nodiscard]] inline double phase_insensitive_distance(const Jones& a, const Jones& b) {
    return 2.0 - std::abs((a.adjoint() * b).trace());
}

[[nodiscard]] inline TwoPhotonPure bell_state(BellLabel label) {
    const double r = std::numbers::sqrt2 / 2.0;
    Vector4 v = Vector4::Zero();
    switch (label) {
        case BellLabel::PsiPlus: v(1) = r; v(2) = r; break;
        case BellLabel::PsiMinus: v(1) = r; v(2) = -r; break;
        case BellLabel::PhiPlus: v(0) = r; v(3) = r; break;
        case BellLabel::PhiMinus: v(0) = r; v(3) = -r; break;
    }
    return TwoPhotonPure(v);
}

[[nodiscard]] inline TwoPhotonPure product_state(Pol a, Pol b) {
    Vector4 v = Vector4::Zero();
    v(basis_index(a, b)) = 1.0;
    return TwoPhotonPure(v);
}

/// (A ⊗ B) ρ (A ⊗ B)†, photon A on the high basis index.
[[nodiscard]] inline TwoPhotonDensity apply_local(const JonesOperator& op_a, const JonesOperator& op_b,
                                                  const TwoPhotonDensity& rho) {
    Matrix4 k;
    const Jones& a = op_a.matrix();
    const Jones& b = op_b.matrix();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    Matrix4 out = k * rho.matrix() * k.adjoint();
    // Re-symmetrize to remove rounding asymmetry before validation.
    out = 0.5 * (out + out.adjoint()).eval();
    return TwoPhotonDensity(out);
}

[[nodiscard]] inline double fidelity(const TwoPhotonDensity& rho, const TwoPhotonPure& target) {
    const Vector4& t = target.amplitudes();
    return std::clamp((t.adjoint() * rho.matrix() * t)(0, 0).real(), 0.0, 1.0);
}

/// Diagonal of ρ in the Bell basis, ordered (ψ+, ψ−, φ+, φ−).
[[nodiscard]] inline std::array<double, 4> bell_weights(const TwoPhotonDensity& rho) {
    std::array<double, 4> w{};
    for (std::size_t k = 0; k < 4; ++k) w[k] = fidelity(rho, bell_state(kBellLabels[k]));
    return w;
}

[[nodiscard]] inline double weight_of(const std::array<double, 4>& w, BellLabel label) {
    return w[static_cast<std::size_t>(label)];
}

} // namespace qsdc

#endif // QSDC_QCORE_HPP
