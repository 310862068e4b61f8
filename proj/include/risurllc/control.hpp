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

// URLLC requirement, reliable AF gain search and bound-based power control.

#include "risurllc/array.hpp"
#include "risurllc/channel.hpp"
#include "risurllc/core.hpp"
#include "risurllc/geometry.hpp"
#include "risurllc/stats.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <optional>

namespace risurllc {

struct UrllcRequirement {
    double payload_bits = 256.0;
    double bandwidth_hz = 360e3;
    double deadline_s = 0.5e-3;
    double p_s = 1.0 - 1e-5;
    // Fading and positioning shares of the outage budget, split [0.9, 0.1]. Written as
    // with_split computes them so both routes give identical doubles.
    double delta = 0.9 * (1.0 - p_s);
    double eps = (1.0 - p_s) - 0.9 * (1.0 - p_s);

    /// Splits the outage budget 1 - p_s as [f, 1 - f].
    static UrllcRequirement with_split(double payload_bits, double bandwidth_hz, double deadline_s, double p_s,
                                       double delta_fraction = 0.9) {
        UrllcRequirement r{payload_bits, bandwidth_hz, deadline_s, p_s, 0.0, 0.0};
        r.delta = delta_fraction * (1.0 - p_s);
        r.eps = (1.0 - p_s) - r.delta;
        r.validate();
        return r;
    }

    double outage_target() const { return 1.0 - p_s; }

    void validate() const {
        if (!(payload_bits > 0.0)) throw ConfigError("payload_bits", "must be positive");
        if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz", "must be positive");
        if (!(deadline_s > 0.0)) throw ConfigError("deadline_s", "must be positive");
        if (!(p_s > 0.0 && p_s < 1.0)) throw ConfigError("p_s", "must lie in (0, 1)");
        if (!(delta > 0.0)) throw ConfigError("delta", "must be positive");
        if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
        if (std::abs(delta + eps - outage_target()) > 1e-9 * outage_target())
            throw ConfigError("delta", "delta + eps must equal 1 - p_s");
    }
};

struct SearchConfig {
    double a_min = 0.1;
    double nu = 0.028125;  // (1 - 0.1) / 32: five halvings of [a_min, 1 - nu]

    void validate() const {
        if (!(nu > 0.0)) throw ConfigError("nu", "must be positive");
        if (!(a_min > 0.0 && a_min < 1.0 - nu)) throw ConfigError("a_min", "must lie in (0, 1 - nu)");
    }
};

/// gamma0 = 2^(L / (B T)) - 1
inline double min_snr(const UrllcRequirement& req) {
    return std::exp2(req.payload_bits / (req.bandwidth_hz * req.deadline_s)) - 1.0;
}

/// Floor footprint of the beam pointed at `pointing` with target gain a0.
inline Ellipse2D illuminated_region(double a0, const Pointing& pointing, const RisGeometry& g, double h) {
    const Beamwidths bw = beamwidths(a0, pointing.theta, g);
    return project_beam(pointing, bw.delta_theta, bw.delta_phi, h);
}

struct AfSearchResult {
    bool feasible = false;
    double a0 = 0.0;                 // reliable AF gain (when feasible)
    double probability = 0.0;        // belief mass inside G(a0), or inside G(a_min) when infeasible
    double probability_at_min = 0.0;
    int iterations = 0;              // bisection steps
};

/// Largest gain on the bisection grid whose footprint holds at least 1 - eps of the belief.
inline AfSearchResult reliable_af_gain(const PositionBelief& belief, const Pointing& pointing, const RisGeometry& g,
                                       double h, double eps, const SearchConfig& cfg = {}) {
    cfg.validate();
    require(eps > 0.0 && eps < 1.0, "reliable_af_gain: eps must lie in (0, 1)");
    auto mass = [&](double a) { return ellipse_probability(belief, illuminated_region(a, pointing, g, h)); };
    const double target = 1.0 - eps;

    AfSearchResult r;
    r.probability_at_min = mass(cfg.a_min);
    if (r.probability_at_min < target) {
        r.probability = r.probability_at_min;
        return r;
    }
    r.feasible = true;
    const double top = 1.0 - cfg.nu;
    const double p_top = mass(top);
    if (p_top >= target) {
        r.a0 = top;
        r.probability = p_top;
        return r;
    }
    double lo = cfg.a_min, hi = top, p_lo = r.probability_at_min;
    while (hi - lo > cfg.nu) {
        const double mid = 0.5 * (lo + hi);
        const double p = mass(mid);
        ++r.iterations;
        if (p >= target) {
            lo = mid;
            p_lo = p;
        } else {
            hi = mid;
        }
    }
    r.a0 = lo;
    r.probability = p_lo;
    return r;
}

/// Physical scenario shared by the decision and the simulation.
struct Scenario {
    double room_side = 15.0;
    double h = 25.0;
    Cartesian3 bs{-5.0, -5.0, 5.0};
    RisGeometry ris{100, 0.333 / 2.0, 0.333};
    double sigma_u = 0.3;
    LinkBudget link{db_to_linear(-31.53), 1.0, 2.0, db_to_linear(12.85), thermal_noise_power(360e3), db_to_linear(6.0)};
    UrllcRequirement req{};
    SearchConfig search{};

    Spherical bs_spherical() const { return cart_to_spherical(bs); }
    Pointing pointing_at(Vec2 floor_xy) const { return pointing_toward(floor_xy, h); }
    /// Belief with the scenario's sigma_u stretched along the motion angle psi.
    PositionBelief belief_at(Vec2 mean, double psi = 0.0) const {
        return {mean, covariance_from_motion(sigma_u, psi)};
    }
};

struct PowerDecision {
    bool feasible = false;
    double power = 0.0;            // P [W]
    double af_gain = 0.0;          // A0
    double fading_quantile = 0.0;  // G0
    double gamma0 = 0.0;
    double worst_beta = 0.0;       // path loss at the far footprint vertex
    double probability = 0.0;      // belief mass inside the footprint (at a_min when infeasible)
    int iterations = 0;
    Pointing pointing;
    PhaseProfile profile;
    Ellipse2D region;
    Cartesian3 worst_point;
};

/// P = sigma^2 gamma0 / (N^2 G0 A0 beta)
inline double bound_power(double sigma2, double gamma0, std::size_t n_elements, double g0, double a0, double beta) {
    const double n = static_cast<double>(n_elements);
    return sigma2 * gamma0 / (n * n * g0 * a0 * beta);
}

/// Bound-based power control with a precomputed fading quantile g0 = F^-1(delta).
inline PowerDecision power_control(const Scenario& sc, const PositionBelief& belief, const UrllcRequirement& req,
                                   const SearchConfig& cfg, double g0) {
    req.validate();
    PowerDecision d;
    d.gamma0 = min_snr(req);
    d.fading_quantile = g0;
    d.pointing = sc.pointing_at(belief.mean());
    d.profile = phase_profile(d.pointing, sc.bs_spherical(), sc.ris);
    const AfSearchResult s = reliable_af_gain(belief, d.pointing, sc.ris, sc.h, req.eps, cfg);
    d.iterations = s.iterations;
    d.probability = s.probability;
    if (!s.feasible) return d;
    d.feasible = true;
    d.af_gain = s.a0;
    d.region = illuminated_region(s.a0, d.pointing, sc.ris, sc.h);
    d.worst_point = farthest_floor_point(d.region, d.pointing.phi, sc.h);
    d.worst_beta = path_loss(d.worst_point, sc.bs, sc.link);
    d.power = bound_power(sc.link.noise_power, d.gamma0, sc.ris.n_elements(), g0, d.af_gain, d.worst_beta);
    return d;
}

inline PowerDecision power_control(const Scenario& sc, const PositionBelief& belief, const UrllcRequirement& req,
                                   const SearchConfig& cfg) {
    return power_control(sc, belief, req, cfg, fading_icdf(req.delta, sc.link.K));
}

/// Caches the fading quantile per delta so repeated decisions skip the inversion.
class PowerController {
public:
    explicit PowerController(Scenario sc) : sc_(std::move(sc)) {}
    PowerController(Scenario sc, FadingQuantileTable table) : sc_(std::move(sc)), table_(std::move(table)) {}

    const Scenario& scenario() const noexcept { return sc_; }

    double fading_quantile(double delta) const {
        if (table_ && delta >= table_->grid_min() && delta <= table_->grid_max()) return (*table_)(delta);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(delta);
        if (it != cache_.end()) return it->second;
        const double g0 = fading_icdf(delta, sc_.link.K);
        cache_.emplace(delta, g0);
        return g0;
    }

    PowerDecision decide(const PositionBelief& belief) const { return decide(belief, sc_.req, sc_.search); }
    PowerDecision decide(const PositionBelief& belief, const UrllcRequirement& req, const SearchConfig& cfg) const {
        return power_control(sc_, belief, req, cfg, fading_quantile(req.delta));
    }

private:
    Scenario sc_;
    std::optional<FadingQuantileTable> table_;
    mutable std::mutex mu_;
    mutable std::map<double, double> cache_;
};

} // namespace risurllc
