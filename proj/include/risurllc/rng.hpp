// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Counter-based random streams. A stream is addressed by (seed, domain, index),
// so any partition of the index range across threads draws the same numbers.

#include "risurllc/core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

namespace risurllc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// FNV-1a, used for domain tags and config hashes.
inline constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Philox4x32-10 block function.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Random stream for one sample: counter = (index lo, index hi, domain, block).
class SampleRng {
public:
    SampleRng(std::uint64_t seed, std::uint32_t domain, std::uint64_t index) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), domain} {}

    std::uint32_t next_u32() noexcept {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
        return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normals (Marsaglia polar method).
    std::pair<double, double> normal_pair() noexcept {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0, v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s < 1.0 && s > 0.0) {
                const double f = std::sqrt(-2.0 * std::log(s) / s);
                return {u * f, v * f};
            }
        }
    }

private:
    void refill() noexcept {
        buf_ = philox4x32({base_[0], base_[1], base_[2], block_++}, key_);
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> base_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Seed plus domain tag; the factory for per-sample streams.
struct StreamSpec {
    std::uint64_t seed = 0;
    std::uint32_t domain = 0;

    SampleRng at(std::uint64_t index) const noexcept { return SampleRng(splitmix64(seed), domain, index); }

    /// Derives an independent stream (e.g. one per sweep point) from a label.
    StreamSpec derive(std::string_view label) const noexcept {
        return {splitmix64(seed ^ fnv1a64(label)), domain};
    }
    StreamSpec with_domain(std::uint32_t d) const noexcept { return {seed, d}; }
};

/// Domain tags keep the oracle, validation and test streams disjoint.
enum class Domain : std::uint32_t {
    opt_power = 1,
    outage = 2,
    outage_fresh = 3,
    oracle = 4,
    test = 5,
};

inline StreamSpec stream(std::uint64_t seed, Domain d) { return {seed, static_cast<std::uint32_t>(d)}; }

} // namespace risurllc
