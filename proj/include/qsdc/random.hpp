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

#ifndef QSDC_RANDOM_HPP
#define QSDC_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qsdc {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream derivation: every (seed, tag...) tuple names an
/// independent generator, so draws never depend on evaluation order.
class StreamKey {
public:
    constexpr explicit StreamKey(std::uint64_t seed) noexcept : state_(mix64(seed)) {}

    [[nodiscard]] constexpr StreamKey child(std::uint64_t tag) const noexcept {
        StreamKey k(0);
        k.state_ = mix64(state_ ^ mix64(tag + 0x632be59bd9b4e019ULL));
        return k;
    }

    [[nodiscard]] constexpr StreamKey child(std::initializer_list<std::uint64_t> tags) const noexcept {
        StreamKey k = *this;
        for (auto t : tags) k = k.child(t);
        return k;
    }

    [[nodiscard]] constexpr std::uint64_t value() const noexcept { return state_; }

    [[nodiscard]] std::mt19937_64 engine() const { return std::mt19937_64(state_); }

private:
    std::uint64_t state_;
};

// Stream domains, so the same index in different subsystems never collides.
namespace stream {
inline constexpr std::uint64_t kBellCounts = 0xB311;
inline constexpr std::uint64_t kHomScan = 0x4040;
inline constexpr std::uint64_t kSessionBits = 0x5E55;
inline constexpr std::uint64_t kDrift = 0xD21F;
} // namespace stream

[[nodiscard]] inline long long poisson_draw(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long long>(mean)(rng);
}

[[nodiscard]] inline double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace qsdc

#endif // QSDC_RANDOM_HPP
