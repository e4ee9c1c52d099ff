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

#ifndef QSDC_LINKBUDGET_HPP
#define QSDC_LINKBUDGET_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qsdc/photonics.hpp"

namespace qsdc {

/// dB → natural attenuation coefficient: α = atten_dB · ln(10) / 10.
///
/// The rate equations use e^(−α·l) while fiber datasheets quote dB per unit
/// length; every conversion goes through here.
[[nodiscard]] inline double alpha_linear(double atten_db_per_len) {
    if (!(atten_db_per_len >= 0.0)) throw std::invalid_argument("alpha_linear: attenuation must be >= 0");
    return atten_db_per_len * std::numbers::ln10 / 10.0;
}

/// Per-photon efficiency of a detector behind `extra_loss_db` of optics.
[[nodiscard]] inline double efficiency_with_loss(double detector_efficiency, double extra_loss_db) {
    return detector_efficiency * std::pow(10.0, -extra_loss_db / 10.0);
}

/// Symbol set of the rate model. Lengths and speed may use any consistent
/// unit (km and km/s by default); attenuation is per that length unit.
struct LinkParams {
    double pump_rate_hz = 10e9;
    double pair_prob_p = 0.03;
    double atten_db_per_km = 0.2;
    double lt_km = 0.0;
    double lm_km = 0.0;
    double group_speed_kmps = kFiberGroupSpeedKmPerS;
    long long security_counts_m = 1000;
    double eta_bsm = efficiency_with_loss(0.75, 5.0);
    double eta_s = efficiency_with_loss(0.75, 4.0);
    /// Polarization-modulator loss. Documentation only: it is already part of
    /// the extra losses folded into eta_s / eta_bsm and enters no formula.
    std::optional<double> modulator_loss_db;

    void validate() const {
        if (!(pump_rate_hz > 0.0)) throw std::invalid_argument("LinkParams: pump rate must be positive");
        if (!(pair_prob_p > 0.0 && pair_prob_p < 1.0)) throw std::invalid_argument("LinkParams: need 0 < p < 1");
        if (!(atten_db_per_km >= 0.0)) throw std::invalid_argument("LinkParams: attenuation must be >= 0");
        if (!(lt_km >= 0.0 && lm_km >= 0.0)) throw std::invalid_argument("LinkParams: lengths must be >= 0");
        if (!(group_speed_kmps > 0.0)) throw std::invalid_argument("LinkParams: group speed must be positive");
        if (security_counts_m < 1) throw std::invalid_argument("LinkParams: m must be >= 1");
        if (!(eta_bsm > 0.0 && eta_bsm <= 1.0 && eta_s > 0.0 && eta_s <= 1.0)) {
            throw std::invalid_argument("LinkParams: efficiencies must lie in (0, 1]");
        }
    }
};

/// Time to accumulate m security-test coincidences:
/// t = 4m / (F_p · p · e^(−α·l_t) · η_s²). Data processing time is neglected.
[[nodiscard]] inline double security_time(const LinkParams& lp) {
    lp.validate();
    const double a = alpha_linear(lp.atten_db_per_km);
    return 4.0 * static_cast<double>(lp.security_counts_m) /
           (lp.pump_rate_hz * lp.pair_prob_p * std::exp(-a * lp.lt_km) * lp.eta_s * lp.eta_s);
}

/// Shortest memory fiber meeting l_m/v ≥ 2·l_t/v + t, i.e. the equality case.
[[nodiscard]] inline double min_memory_length(double lt_km, double t_s, double v_kmps) {
    if (!(lt_km >= 0.0 && t_s >= 0.0 && v_kmps >= 0.0)) {
        throw std::invalid_argument("min_memory_length: inputs must be nonnegative");
    }
    return 2.0 * lt_km + v_kmps * t_s;
}

/// Inequality form of the storage constraint, for feasibility checks.
[[nodiscard]] inline bool memory_sufficient(double lm_km, double lt_km, double t_s, double v_kmps) {
    return lm_km / v_kmps >= 2.0 * lt_km / v_kmps + t_s;
}

/// BSM coincidence rate R = (1/4) · F_p · p · e^(−2α(l_t + l_m)) · η_BSM².
[[nodiscard]] inline double coincidence_rate(const LinkParams& lp) {
    lp.validate();
    const double a = alpha_linear(lp.atten_db_per_km);
    return 0.25 * lp.pump_rate_hz * lp.pair_prob_p * std::exp(-2.0 * a * (lp.lt_km + lp.lm_km)) * lp.eta_bsm *
           lp.eta_bsm;
}

struct RmaxPoint {
    double lt_km = 0.0;
    double pair_prob_p = 0.0;
    long long security_counts_m = 0;
    double t_seconds = 0.0;
    double lm_km = 0.0;
    double rmax_hz = 0.0;
};

/// Maximum decode rate at transmission distance lt: security time, then the
/// shortest admissible memory, then the BSM rate. `params.lm_km` is ignored.
[[nodiscard]] inline RmaxPoint rmax(double lt_km, LinkParams params) {
    params.lt_km = lt_km;
    params.lm_km = 0.0;
    RmaxPoint pt;
    pt.lt_km = lt_km;
    pt.pair_prob_p = params.pair_prob_p;
    pt.security_counts_m = params.security_counts_m;
    pt.t_seconds = security_time(params);
    pt.lm_km = min_memory_length(lt_km, pt.t_seconds, params.group_speed_kmps);
    params.lm_km = pt.lm_km;
    pt.rmax_hz = coincidence_rate(params);
    return pt;
}

/// Cartesian sweep over p × m × l_t with l_t varying fastest, so each (p, m)
/// curve is contiguous.
[[nodiscard]] inline std::vector<RmaxPoint> rmax_scan(const std::vector<double>& lt_km, const std::vector<double>& p_values,
                                                      const std::vector<long long>& m_values, const LinkParams& base) {
    if (lt_km.empty() || p_values.empty() || m_values.empty()) {
        throw std::invalid_argument("rmax_scan: ranges must be nonempty");
    }
    std::vector<RmaxPoint> out;
    out.reserve(lt_km.size() * p_values.size() * m_values.size());
    for (double p : p_values) {
        for (long long m : m_values) {
            LinkParams lp = base;
            lp.pair_prob_p = p;
            lp.security_counts_m = m;
            for (double lt : lt_km) out.push_back(rmax(lt, lp));
        }
    }
    return out;
}

} // namespace qsdc

#endif // QSDC_LINKBUDGET_HPP
