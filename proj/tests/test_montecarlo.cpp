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

#include "risurllc/montecarlo.hpp"

#include <gtest/gtest.h>

using namespace risurllc;

namespace {

const Scenario kScenario{};
const Vec2 kMean{10.0, 10.0};

McConfig small_mc(std::uint64_t n, unsigned workers = 1) {
    McConfig mc;
    mc.n_samples = n;
    mc.n_workers = workers;
    return mc;
}

UrllcRequirement loose_requirement() {
    // 1 - p_s = 1e-3 keeps the tail resolvable with 1e5 samples.
    return UrllcRequirement::with_split(256, 360e3, 0.5e-3, 1.0 - 1e-3);
}

double beta_at_mean() {
    return path_loss({kMean.x, kMean.y, kScenario.h}, kScenario.bs, kScenario.link);
}

} // namespace

TEST(Philox, KnownAnswers) {
    using A = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(SampleRng, UniformsAndNormals) {
    const StreamSpec s = stream(9, Domain::test);
    double sum = 0.0, sq = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        SampleRng r = s.at(static_cast<std::uint64_t>(i));
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        const auto [a, b] = r.normal_pair();
        sum += a + b;
        sq += a * a + b * b;
    }
    EXPECT_NEAR(sum / (2.0 * n), 0.0, 0.01);
    EXPECT_NEAR(sq / (2.0 * n), 1.0, 0.01);
    // Same (seed, domain, index) replays; another domain does not.
    SampleRng a = s.at(42), b = s.at(42), c = stream(9, Domain::oracle).at(42);
    EXPECT_EQ(a.next_u32(), b.next_u32());
    EXPECT_NE(s.at(42).next_u32(), c.next_u32());
}

TEST(SnrKernel, DegenerateChannel) {
    const PositionBelief b = kScenario.belief_at(kMean);
    SnrKernel k(kScenario, b, kScenario.pointing_at(kMean));
    k.fix_fading().fix_position();
    SampleRng rng = stream(1, Domain::test).at(0);
    const double expected = beta_at_mean() * 1e4 / kScenario.link.noise_power;
    EXPECT_NEAR(k(rng), expected, 1e-12 * expected);
}

TEST(SnrKernel, FadingHasUnitMean) {
    const PositionBelief b = kScenario.belief_at(kMean);
    SnrKernel k(kScenario, b, kScenario.pointing_at(kMean));
    k.fix_position();
    SnrKernel k0 = k;
    k0.fix_fading();
    const StreamSpec s = stream(3, Domain::test);
    SampleRng r0 = s.at(0);
    const double base = k0(r0);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        SampleRng r = s.at(static_cast<std::uint64_t>(i));
        sum += k(r) / base;
    }
    EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(SnrKernel, MatchesLibraryComposition) {
    // The fused kernel must agree with path_loss, af_gain_closed and snr evaluated separately.
    const PositionBelief b = kScenario.belief_at(kMean, 0.6);
    const Pointing p = kScenario.pointing_at(kMean);
    SnrKernel k(kScenario, b, p);
    k.fix_fading();
    const StreamSpec s = stream(4, Domain::test);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        SampleRng r1 = s.at(i), r2 = s.at(i);
        const auto [n1, n2] = r2.normal_pair();
        const Vec2 x = position_from_normals(b, n1, n2);
        const Cartesian3 xu{x.x, x.y, kScenario.h};
        const double ref = snr(1.0, path_loss(xu, kScenario.bs, kScenario.link), 1.0,
                               af_gain_closed(p, cart_to_spherical(xu), kScenario.ris), 100, kScenario.link.noise_power);
        const double v = k(r1);
        EXPECT_GE(v, 0.0);
        EXPECT_NEAR(v, ref, 1e-10 * ref + 1e-300);
    }
}

TEST(Parallel, WorkerCountDoesNotChangeResults) {
    const PositionBelief b = kScenario.belief_at(kMean, 0.3);
    const SnrKernel k(kScenario, b, kScenario.pointing_at(kMean));
    const StreamSpec s = stream(5, Domain::test);
    const std::uint64_t n = 100'003;
    const auto ref = k_smallest(k, s, n, 57, 1);
    const double thr[3] = {ref[10], ref[40], ref.back()};
    const auto cref = count_below(k, s, n, thr, 1);
    for (unsigned w : {2u, 3u, 4u, 8u}) {
        EXPECT_EQ(k_smallest(k, s, n, 57, w), ref);
        EXPECT_EQ(count_below(k, s, n, thr, w), cref);
    }
    EXPECT_EQ(cref[0], 10u);
    EXPECT_EQ(cref[1], 40u);
}

TEST(OptPower, DeterministicChannel) {
    const PositionBelief b = kScenario.belief_at(kMean);
    SnrKernel k(kScenario, b, kScenario.pointing_at(kMean));
    k.fix_fading().fix_position();
    const UrllcRequirement req = loose_requirement();
    const OptPowerResult r = opt_power_detail(k, req, small_mc(100'000));
    const double expected = min_snr(req) * kScenario.link.noise_power / (beta_at_mean() * 1e4);
    EXPECT_NEAR(r.power, expected, 1e-12 * expected);
    EXPECT_EQ(r.order_index, 100u);
}

TEST(OptPower, DoublingNoiseDoublesPower) {
    Scenario loud = kScenario;
    loud.link.noise_power *= 2.0;
    const UrllcRequirement req = loose_requirement();
    const McConfig mc = small_mc(100'000);
    const double p1 = opt_power(kScenario, kScenario.belief_at(kMean), req, mc);
    const double p2 = opt_power(loud, loud.belief_at(kMean), req, mc);
    EXPECT_EQ(p2, 2.0 * p1);
}

TEST(OptPower, RejectsUnresolvableQuantile) {
    EXPECT_THROW(opt_power(kScenario, kScenario.belief_at(kMean), UrllcRequirement{}, small_mc(1'000'000)), DomainError);
}

TEST(OptPower, OutageAtOptimumHitsTheTarget) {
    const PositionBelief b = kScenario.belief_at(kMean, 0.5);
    const UrllcRequirement req = loose_requirement();
    const McConfig mc = small_mc(200'000, 2);
    const SnrKernel k(kScenario, b, kScenario.pointing_at(kMean));
    const OptPowerResult r = opt_power_detail(k, req, mc);
    const double p[1] = {r.power};
    // Same stream: the order statistic sits exactly on the boundary.
    const OutageEstimate same = outage_estimates(k, req, p, mc, Domain::opt_power).front();
    EXPECT_GE(same.events + 1, r.order_index);
    EXPECT_LE(same.events, r.order_index);
    // Fresh stream: within three binomial sigma of 1 - p_s.
    const OutageEstimate fresh = outage_estimates(k, req, p, mc, Domain::outage_fresh).front();
    const double sigma = std::sqrt(1e-3 * (1.0 - 1e-3) / 2e5);
    EXPECT_NEAR(fresh.p_out, 1e-3, 3.0 * sigma);
}

TEST(Outage, MonotoneInPower) {
    const PositionBelief b = kScenario.belief_at(kMean, -0.5);
    const std::vector<double> powers = {0.0, dbm_to_watts(-40), dbm_to_watts(-30), dbm_to_watts(-20), dbm_to_watts(-10),
                                        dbm_to_watts(0)};
    const auto est = outage_estimates(kScenario, b, kScenario.req, powers, small_mc(50'000));
    EXPECT_EQ(est.front().p_out, 1.0);
    for (std::size_t i = 1; i < est.size(); ++i) EXPECT_LE(est[i].p_out, est[i - 1].p_out);
    for (const auto& e : est) {
        EXPECT_GE(e.p_out, 0.0);
        EXPECT_LE(e.p_out, 1.0);
        EXPECT_LE(e.ci_low, e.p_out);
        EXPECT_GE(e.ci_high, e.p_out);
    }
}

TEST(OutageEstimate, ConfidenceIntervals) {
    const OutageEstimate zero = make_outage_estimate(0, 1'000'000);
    EXPECT_EQ(zero.ci_low, 0.0);
    EXPECT_NEAR(zero.ci_high, 3.6889e-6, 1e-9);  // 1 - 0.025^(1/n)
    const OutageEstimate few = make_outage_estimate(5, 1'000'000);
    EXPECT_NEAR(few.ci_low, 1.6235e-6, 1e-9);
    EXPECT_NEAR(few.ci_high, 1.1668e-5, 1e-8);
    const OutageEstimate many = make_outage_estimate(100, 10'000'000);
    EXPECT_NEAR(many.ci_halfwidth, 1.959963984540054 * std::sqrt(1e-5 * (1 - 1e-5) / 1e7), 1e-15);
    EXPECT_THROW(make_outage_estimate(5, 4), DomainError);
}

TEST(McConfig, Validation) {
    McConfig mc;
    mc.n_samples = 10;
    EXPECT_THROW(mc.validate(), ConfigError);
    mc = McConfig{};
    mc.n_workers = 0;
    EXPECT_THROW(mc.validate(), ConfigError);
}
