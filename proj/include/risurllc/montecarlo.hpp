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

// Monte Carlo link simulation: the empirical-quantile power oracle and outage
// estimates. Every sample owns a counter-based stream, and reductions are
// order independent, so results do not depend on the worker count.

#include "risurllc/array.hpp"
#include "risurllc/channel.hpp"
#include "risurllc/control.hpp"
#include "risurllc/core.hpp"
#include "risurllc/rng.hpp"
#include "risurllc/stats.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

namespace risurllc {

struct McConfig {
    std::uint64_t n_samples = 10'000'000;
    std::uint64_t master_seed = 0x5EED5EEDull;
    unsigned n_workers = 1;

    void validate() const {
        if (n_samples < 1000) throw ConfigError("n_samples", "must be at least 1000");
        if (n_workers < 1) throw ConfigError("n_workers", "must be at least 1");
    }
    StreamSpec stream(Domain d) const { return risurllc::stream(master_seed, d); }
    /// Same settings on an independent master seed derived from `label`.
    McConfig derive(std::string_view label) const {
        McConfig c = *this;
        c.master_seed = StreamSpec{master_seed, 0}.derive(label).seed;
        return c;
    }
};

struct OutageEstimate {
    double p_out = 0.0;
    double ci_halfwidth = 0.0;  // 95 %
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t events = 0;
    std::uint64_t n_samples = 0;
};

/// 95 % interval: normal approximation, Clopper-Pearson when events < 30.
inline OutageEstimate make_outage_estimate(std::uint64_t events, std::uint64_t n) {
    require(n > 0 && events <= n, "make_outage_estimate: bad counts");
    OutageEstimate e;
    e.events = events;
    e.n_samples = n;
    e.p_out = static_cast<double>(events) / static_cast<double>(n);
    if (events >= 30 && n - events >= 30) {
        e.ci_halfwidth = 1.959963984540054 * std::sqrt(e.p_out * (1.0 - e.p_out) / static_cast<double>(n));
        e.ci_low = std::max(0.0, e.p_out - e.ci_halfwidth);
        e.ci_high = std::min(1.0, e.p_out + e.ci_halfwidth);
    } else {
        using boost::math::binomial_distribution;
        const double trials = static_cast<double>(n), k = static_cast<double>(events);
        e.ci_low = binomial_distribution<>::find_lower_bound_on_p(trials, k, 0.025, binomial_distribution<>::clopper_pearson_exact_interval);
        e.ci_high = binomial_distribution<>::find_upper_bound_on_p(trials, k, 0.025, binomial_distribution<>::clopper_pearson_exact_interval);
        e.ci_halfwidth = std::max(e.p_out - e.ci_low, e.ci_high - e.p_out);
    }
    return e;
}

/// gamma / P for one channel realization.
class SnrKernel {
public:
    SnrKernel(const Scenario& sc, const PositionBelief& belief, const Pointing& pointing)
        : belief_(belief), h_(sc.h), K_(sc.link.K), xi_(sc.link.xi),
          m_(static_cast<double>(sc.ris.side())), c_(pi * sc.ris.spacing() / sc.ris.wavelength()),
          ux_(std::sin(pointing.theta) * std::cos(pointing.phi)), uy_(std::sin(pointing.theta) * std::sin(pointing.phi)),
          nu_(std::sqrt(K_ / (K_ + 1.0))), sf_(std::sqrt(0.5 / (K_ + 1.0))) {
        require(sc.link.noise_power > 0.0, "SnrKernel: noise power must be positive");
        const double n = static_cast<double>(sc.ris.n_elements());
        // beta0^2 G d0^(2 xi) / (|x_b|^xi sigma^2) * N^2; the UE distance enters per sample.
        scale_ = sc.link.beta0 * sc.link.beta0 * sc.link.G_bu * std::pow(sc.link.d0 * sc.link.d0 / sc.bs.norm(), xi_) /
                 sc.link.noise_power * n * n;
    }

    /// Replaces a random component by its degenerate value (for tests).
    SnrKernel& fix_fading(bool on = true) { fixed_fading_ = on; return *this; }
    SnrKernel& fix_position(bool on = true) { fixed_position_ = on; return *this; }

    double operator()(SampleRng& rng) const {
        Vec2 p = belief_.mean();
        const auto [n1, n2] = rng.normal_pair();
        if (!fixed_position_) p = position_from_normals(belief_, n1, n2);
        double fade = 1.0;
        if (!fixed_fading_) {
            const auto [a, b] = rng.normal_pair();
            const auto [c, d] = rng.normal_pair();
            const double ua = nu_ + sf_ * a, ub = sf_ * b;
            const double ba = nu_ + sf_ * c, bb = sf_ * d;
            fade = (ua * ua + ub * ub) * (ba * ba + bb * bb);
        }
        const double r2 = p.x * p.x + p.y * p.y + h_ * h_;
        const double r = std::sqrt(r2);
        const double loss = (xi_ == 2.0) ? 1.0 / r2 : std::pow(r, -xi_);
        const double dx = detail::dirichlet(c_ * (p.x / r - ux_), m_);
        const double dy = detail::dirichlet(c_ * (p.y / r - uy_), m_);
        return scale_ * loss * fade * dx * dx * dy * dy;
    }

private:
    PositionBelief belief_;
    double h_, K_, xi_, m_, c_, ux_, uy_, nu_, sf_;
    double scale_ = 0.0;
    bool fixed_fading_ = false;
    bool fixed_position_ = false;
};

/// gamma / P for the sample drawn from `rng`, pointing at the belief mean.
inline double snr_per_unit_power_sample(const Scenario& sc, const PositionBelief& belief, const Pointing& pointing,
                                        SampleRng& rng) {
    return SnrKernel(sc, belief, pointing)(rng);
}

namespace detail {

/// Runs body(begin, end, partial) over contiguous chunks on n_workers threads and
/// returns the partials in chunk order.
template <class Partial, class Body>
std::vector<Partial> parallel_chunks(std::uint64_t n, unsigned n_workers, Body body) {
    const unsigned w = std::max(1u, n_workers);
    std::vector<Partial> parts(w);
    auto run = [&](unsigned k) {
        const std::uint64_t b = n * k / w, e = n * (k + 1) / w;
        body(b, e, parts[k]);
    };
    if (w == 1) {
        run(0);
        return parts;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned k = 0; k < w; ++k) threads.emplace_back(run, k);
    for (auto& t : threads) t.join();
    return parts;
}

} // namespace detail

/// The k smallest gamma / P values over n samples of a stream, ascending.
inline std::vector<double> k_smallest(const SnrKernel& kernel, const StreamSpec& spec, std::uint64_t n, std::size_t k,
                                      unsigned n_workers) {
    using Heap = std::priority_queue<double>;
    auto parts = detail::parallel_chunks<std::vector<double>>(n, n_workers, [&](std::uint64_t b, std::uint64_t e, std::vector<double>& out) {
        Heap heap;
        for (std::uint64_t i = b; i < e; ++i) {
            SampleRng rng = spec.at(i);
            const double v = kernel(rng);
            if (heap.size() < k) heap.push(v);
            else if (v < heap.top()) {
                heap.pop();
                heap.push(v);
            }
        }
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back(heap.top());
            heap.pop();
        }
    });
    std::vector<double> all;
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    std::sort(all.begin(), all.end());
    if (all.size() > k) all.resize(k);
    return all;
}

/// Number of samples with gamma / P below each threshold, in one pass.
inline std::vector<std::uint64_t> count_below(const SnrKernel& kernel, const StreamSpec& spec, std::uint64_t n,
                                              std::span<const double> thresholds, unsigned n_workers) {
    auto parts = detail::parallel_chunks<std::vector<std::uint64_t>>(n, n_workers, [&](std::uint64_t b, std::uint64_t e, std::vector<std::uint64_t>& out) {
        out.assign(thresholds.size(), 0);
        for (std::uint64_t i = b; i < e; ++i) {
            SampleRng rng = spec.at(i);
            const double v = kernel(rng);
            for (std::size_t j = 0; j < thresholds.size(); ++j) out[j] += (v < thresholds[j]) ? 1u : 0u;
        }
    });
    std::vector<std::uint64_t> total(thresholds.size(), 0);
    for (const auto& p : parts)
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += p[j];
    return total;
}

struct OptPowerResult {
    double power = 0.0;     // P_opt [W]
    double quantile = 0.0;  // empirical (1 - p_s) quantile of gamma / P
    std::uint64_t order_index = 0;
    std::uint64_t n_samples = 0;
};

/// Power at which the empirical outage equals 1 - p_s: gamma0 / q, with q the order
/// statistic at ceil((1 - p_s) n).
inline OptPowerResult opt_power_detail(const SnrKernel& kernel, const UrllcRequirement& req, const McConfig& mc) {
    mc.validate();
    const double tail = req.outage_target() * static_cast<double>(mc.n_samples);
    if (tail < 30.0) throw DomainError("opt_power: (1 - p_s) n must be at least 30 to resolve the quantile");
    const auto m = static_cast<std::uint64_t>(std::ceil(tail - 1e-9));
    const auto k = static_cast<std::size_t>(std::ceil(2.0 * tail - 1e-9));
    const std::vector<double> low = k_smallest(kernel, mc.stream(Domain::opt_power), mc.n_samples, k, mc.n_workers);
    OptPowerResult r;
    r.order_index = m;
    r.n_samples = mc.n_samples;
    r.quantile = low.at(m - 1);
    r.power = min_snr(req) / r.quantile;
    return r;
}

inline OptPowerResult opt_power_detail(const Scenario& sc, const PositionBelief& belief, const UrllcRequirement& req,
                                       const McConfig& mc, const Pointing& pointing) {
    return opt_power_detail(SnrKernel(sc, belief, pointing), req, mc);
}

inline double opt_power(const Scenario& sc, const PositionBelief& belief, const UrllcRequirement& req, const McConfig& mc) {
    return opt_power_detail(sc, belief, req, mc, sc.pointing_at(belief.mean())).power;
}

/// Outage at each power, estimated on one shared stream of `domain`.
inline std::vector<OutageEstimate> outage_estimates(const SnrKernel& kernel, const UrllcRequirement& req,
                                                    std::span<const double> powers, const McConfig& mc,
                                                    Domain domain = Domain::outage) {
    mc.validate();
    const double g0 = min_snr(req);
    std::vector<double> thr(powers.size());
    for (std::size_t j = 0; j < powers.size(); ++j) {
        require(powers[j] >= 0.0, "outage_estimate: power must be non-negative");
        thr[j] = powers[j] > 0.0 ? g0 / powers[j] : std::numeric_limits<double>::infinity();
    }
    const auto counts = count_below(kernel, mc.stream(domain), mc.n_samples, thr, mc.n_workers);
    std::vector<OutageEstimate> out;
    out.reserve(counts.size());
    for (auto c : counts) out.push_back(make_outage_estimate(c, mc.n_samples));
    return out;
}

inline std::vector<OutageEstimate> outage_estimates(const Scenario& sc, const PositionBelief& belief,
                                                    const UrllcRequirement& req, std::span<const double> powers,
                                                    const McConfig& mc, Domain domain = Domain::outage) {
    return outage_estimates(SnrKernel(sc, belief, sc.pointing_at(belief.mean())), req, powers, mc, domain);
}

inline OutageEstimate outage_estimate(const Scenario& sc, const PositionBelief& belief, const UrllcRequirement& req,
                                      double power, const McConfig& mc, Domain domain = Domain::outage) {
    const double p[1] = {power};
    return outage_estimates(sc, belief, req, p, mc, domain).front();
}

} // namespace risurllc
