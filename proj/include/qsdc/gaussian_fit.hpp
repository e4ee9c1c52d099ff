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

#ifndef QSDC_GAUSSIAN_FIT_HPP
#define QSDC_GAUSSIAN_FIT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qsdc {

/// y(τ) = baseline + amplitude · exp(−(τ − center)² / (2 sigma²)).
struct GaussianFit {
    double baseline = 0.0;
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 1.0;
    double residual_rms = 0.0;
    int iterations = 0;

    [[nodiscard]] double operator()(double tau) const {
        const double z = (tau - center) / sigma;
        return baseline + amplitude * std::exp(-0.5 * z * z);
    }

    /// Curve value at the center: the peak (amplitude > 0) or dip height.
    [[nodiscard]] double extremum() const { return baseline + amplitude; }
};

struct FitFailure {
    std::string reason;
};

class FitResult {
public:
    FitResult(GaussianFit fit) : v_(fit) {} // NOLINT(google-explicit-constructor)
    FitResult(FitFailure failure) : v_(std::move(failure)) {} // NOLINT(google-explicit-constructor)

    [[nodiscard]] bool ok() const noexcept { return std::holds_alternative<GaussianFit>(v_); }
    explicit operator bool() const noexcept { return ok(); }

    [[nodiscard]] const GaussianFit& value() const {
        if (!ok()) throw std::logic_error("FitResult::value on failed fit: " + failure().reason);
        return std::get<GaussianFit>(v_);
    }
    [[nodiscard]] const FitFailure& failure() const { return std::get<FitFailure>(v_); }

private:
    std::variant<GaussianFit, FitFailure> v_;
};

struct FitOptions {
    int max_iterations = 500;
    double tolerance = 1e-14;
};

namespace detail {

inline double sum_sq_residuals(std::span<const double> x, std::span<const double> y, const Eigen::Vector4d& p) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x[i] - p(2)) / p(3);
        const double r = y[i] - (p(0) + p(1) * std::exp(-0.5 * z * z));
        ssr += r * r;
    }
    return ssr;
}

inline Eigen::Vector4d initial_guess(std::span<const double> x, std::span<const double> y) {
    std::vector<double> sorted(y.begin(), y.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const bool peak = (*hi - median) >= (median - *lo);
    const auto extreme = peak ? hi : lo;
    const double amplitude = *extreme - median;
    const double center = x[static_cast<std::size_t>(extreme - y.begin())];

    // Second moment of the excess over the baseline.
    double wsum = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = std::max(0.0, (y[i] - median) * (peak ? 1.0 : -1.0));
        wsum += w;
        m2 += w * (x[i] - center) * (x[i] - center);
    }
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const double span = *xmax - *xmin;
    double sigma = wsum > 0.0 ? std::sqrt(m2 / wsum) : span / 10.0;
    if (!(sigma > 0.0)) sigma = span / 10.0;
    return {median, amplitude, center, sigma};
}

} // namespace detail

/// Least-squares fit of baseline + Gaussian by Levenberg-Marquardt. Needs at
/// least five points and non-constant data; anything else, or a fit that does
/// not converge, comes back as a FitFailure.
[[nodiscard]] inline FitResult fit_gaussian(std::span<const double> delays, std::span<const double> counts,
                                            const FitOptions& opts = {}) {
    if (delays.size() != counts.size()) return FitFailure{"delays and counts differ in length"};
    if (delays.size() < 5) return FitFailure{"need at least 5 points, got " + std::to_string(delays.size())};
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (!std::isfinite(delays[i]) || !std::isfinite(counts[i])) return FitFailure{"non-finite input"};
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    if (*hi == *lo) return FitFailure{"flat data: all counts equal"};
    const auto [xlo, xhi] = std::minmax_element(delays.begin(), delays.end());
    if (*xhi == *xlo) return FitFailure{"all delays equal"};

    const std::size_t n = delays.size();
    Eigen::Vector4d p = detail::initial_guess(delays, counts);
    double cost = detail::sum_sq_residuals(delays, counts, p);
    double lambda = 1e-3;
    // Scale for the convergence test, so flat-ish noisy data still terminates.
    const double scale = std::max(1.0, std::abs(*hi) + std::abs(*lo));
    bool converged = false;
    int it = 0;

    for (; it < opts.max_iterations; ++it) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (delays[i] - p(2)) / p(3);
            const double g = std::exp(-0.5 * z * z);
            const double r = counts[i] - (p(0) + p(1) * g);
            Eigen::Vector4d j(1.0, g, p(1) * g * z / p(3), p(1) * g * z * z / p(3));
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }

        bool improved = false;
        while (lambda < 1e16) {
            Eigen::Matrix4d a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::Vector4d step = a.ldlt().solve(jtr);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            Eigen::Vector4d trial = p + step;
            if (!(trial(3) > 0.0)) trial(3) = std::abs(trial(3)) + 1e-12;
            const double trial_cost = detail::sum_sq_residuals(delays, counts, trial);
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const double drop = cost - trial_cost;
                const double rel_step = (step.array().abs() / (p.array().abs() + 1e-12)).maxCoeff();
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = true;
                if (drop <= opts.tolerance * (cost + scale * scale * 1e-12) || rel_step < 1e-13) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            // No downhill step at any damping: p is a stationary point.
            converged = true;
        }
        if (converged) break;
    }

    if (!converged) return FitFailure{"no convergence after " + std::to_string(opts.max_iterations) + " iterations"};
    if (!p.allFinite() || !(p(3) > 0.0)) return FitFailure{"fit diverged"};
    if (p(3) > 100.0 * (*xhi - *xlo)) return FitFailure{"fitted width exceeds the scanned range"};

    GaussianFit fit;
    fit.baseline = p(0);
    fit.amplitude = p(1);
    fit.center = p(2);
    fit.sigma = p(3);
    fit.residual_rms = std::sqrt(cost / static_cast<double>(n));
    fit.iterations = it + 1;
    return fit;
}

[[nodiscard]] inline FitResult fit_gaussian(const std::vector<double>& delays, const std::vector<double>& counts,
                                            const FitOptions& opts = {}) {
    return fit_gaussian(std::span<const double>(delays), std::span<const double>(counts), opts);
}

} // namespace qsdc

#endif // QSDC_GAUSSIAN_FIT_HPP
