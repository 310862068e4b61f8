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

#include "oracles.hpp"
#include "risurllc/rng.hpp"
#include "risurllc/stats.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace risurllc;

namespace {

Ellipse2D make_ellipse(Vec2 c, double a, double b, double o) {
    Ellipse2D e;
    e.center = c;
    e.semi_major = a;
    e.semi_minor = b;
    e.orientation = o;
    return e;
}

const PositionBelief kTilted{{1.0, -0.5}, covariance_from_motion(0.3, pi / 4.0)};

} // namespace

TEST(Covariance, FromMotion) {
    const Sym2 c0 = covariance_from_motion(0.3, 0.0);
    EXPECT_NEAR(c0.xx, 0.09, 1e-15);
    EXPECT_DOUBLE_EQ(c0.xy, 0.0);
    EXPECT_NEAR(c0.yy, 0.09, 1e-15);
    const Sym2 c1 = covariance_from_motion(0.3, pi / 4.0);
    EXPECT_NEAR(c1.xx, 0.18, 1e-12);
    EXPECT_NEAR(c1.xy, 0.063640, 1e-6);
    EXPECT_NEAR(c1.yy, 0.18, 1e-12);
    for (double psi = -1.5; psi < 1.5; psi += 0.1) EXPECT_GT(covariance_from_motion(0.7, psi).det(), 0.0);
    EXPECT_THROW(covariance_from_motion(0.3, pi / 2.0), DomainError);
    EXPECT_THROW(covariance_from_motion(0.0, 0.0), DomainError);
    EXPECT_THROW(PositionBelief({0, 0}, Sym2{1.0, 2.0, 1.0}), DomainError);
}

TEST(SamplePosition, DegenerateBelief) {
    const PositionBelief b{{3.0, 4.0}, covariance_from_motion(1e-12, 0.0)};
    SampleRng rng = stream(1, Domain::test).at(0);
    const Vec2 p = sample_position(b, rng);
    EXPECT_NEAR(p.x, 3.0, 1e-10);
    EXPECT_NEAR(p.y, 4.0, 1e-10);
}

TEST(SamplePosition, Moments) {
    const int n = 1'000'000;
    const StreamSpec s = stream(2, Domain::test);
    double mx = 0, my = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        SampleRng rng = s.at(static_cast<std::uint64_t>(i));
        const Vec2 p = sample_position(kTilted, rng);
        mx += p.x;
        my += p.y;
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
    }
    mx /= n;
    my /= n;
    const double cxx = sxx / n - mx * mx, cxy = sxy / n - mx * my, cyy = syy / n - my * my;
    const Sym2& c = kTilted.covariance();
    const double frob = std::sqrt(c.xx * c.xx + 2 * c.xy * c.xy + c.yy * c.yy);
    const double diff = std::sqrt((cxx - c.xx) * (cxx - c.xx) + 2 * (cxy - c.xy) * (cxy - c.xy) + (cyy - c.yy) * (cyy - c.yy));
    EXPECT_LT(diff / frob, 0.02);
    const double tol = 4.0 * std::sqrt(c.xx) / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(mx, 1.0, tol);
    EXPECT_NEAR(my, -0.5, tol);
}

TEST(EllipseProbability, RayleighCircle) {
    const PositionBelief b{{2.0, 1.0}, covariance_from_motion(0.3, 0.0)};
    const Ellipse2D e = make_ellipse({2.0, 1.0}, 0.3, 0.3, 0.0);
    EXPECT_NEAR(ellipse_probability(b, e), 0.3934693402873666, 1e-9);
    EXPECT_NEAR(ellipse_escape_probability(b, e), std::exp(-0.5), 1e-9);
}

TEST(EllipseProbability, ReferenceCases) {
    // Reference values from an independent double integral of the density.
    EXPECT_NEAR(ellipse_probability(kTilted, make_ellipse({1.3, -0.2}, 0.9, 0.4, 0.7)), 0.5424211769580081, 1e-9);
    EXPECT_NEAR(ellipse_probability(kTilted, make_ellipse({2.0, 0.5}, 0.9, 0.4, 0.7)), 0.07465100712194994, 1e-9);
}

TEST(EllipseProbability, Limits) {
    EXPECT_NEAR(ellipse_probability(kTilted, make_ellipse({5.0, 5.0}, 1e6, 1e6, 0.0)), 1.0, 1e-12);
    EXPECT_NEAR(ellipse_probability(kTilted, make_ellipse({50.0, 50.0}, 0.1, 0.1, 0.0)), 0.0, 1e-300);
    EXPECT_THROW(ellipse_probability(kTilted, make_ellipse({0.0, 0.0}, 1.0, 0.0, 0.0)), DomainError);
}

TEST(EllipseProbability, ContinuousAcrossTheMean) {
    // Moving the ellipse so the mean crosses its boundary switches integration branches.
    const double a = 0.5, b = 0.2, o = 0.3;
    const Vec2 dir{std::cos(o), std::sin(o)};
    for (double d : {-1e-7, 1e-7}) {
        const Vec2 c = kTilted.mean() + (a + d) * dir;
        const double p = ellipse_probability(kTilted, make_ellipse(c, a, b, o));
        const Vec2 c0 = kTilted.mean() + a * dir;
        EXPECT_NEAR(p, ellipse_probability(kTilted, make_ellipse(c0, a, b, o)), 1e-6);
    }
}

TEST(EllipseProbability, DilationIsMonotone) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0), s(0.05, 1.0);
    for (int n = 0; n < 50; ++n) {
        const Vec2 c{u(gen), u(gen)};
        const double a = s(gen), o = 3.0 * u(gen);
        const double b = a * (0.2 + 0.8 * std::abs(u(gen)));
        double prev = 0.0;
        for (double k = 0.2; k < 5.0; k *= 1.3) {
            const double p = ellipse_probability(kTilted, make_ellipse(c, k * a, k * b, o));
            EXPECT_GE(p, prev - 1e-12);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            prev = p;
        }
    }
}

TEST(EllipseProbability, AffineInvariance) {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 100; ++n) {
        const Ellipse2D e = make_ellipse({u(gen) + 1.0, u(gen) - 0.5}, 0.6 + 0.3 * u(gen), 0.25, 2.0 * u(gen));
        Mat2 m{u(gen) * 2.0, u(gen), u(gen), u(gen) * 2.0};
        if (std::abs(m.det()) < 0.2) continue;
        const Vec2 t{u(gen) * 3.0, u(gen) * 3.0};
        const PositionBelief mapped{m.apply(kTilted.mean()) + t, m.congruence(kTilted.covariance())};
        const Sym2 qinv = m.inverse().transpose().congruence(e.shape_matrix());
        // Q' = M^-T Q M^-1 describes the image of the ellipse.
        const Ellipse2D image = Ellipse2D::from_shape_matrix(m.apply(e.center) + t, qinv);
        EXPECT_NEAR(ellipse_probability(kTilted, e), ellipse_probability(mapped, image), 1e-8);
    }
}

TEST(EllipseProbability, EscapeComplements) {
    const Ellipse2D e = make_ellipse({1.1, -0.4}, 2.5, 1.9, 0.4);
    const double q = ellipse_escape_probability(kTilted, e);
    EXPECT_NEAR(ellipse_probability(kTilted, e) + q, 1.0, 1e-15);
    EXPECT_GT(q, 0.0);
    EXPECT_LT(q, 1e-4);
}

TEST(EllipseProbability, AgreesWithSampling) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 0; n < 5; ++n) {
        const Ellipse2D e = make_ellipse({1.0 + 0.5 * u(gen), -0.5 + 0.5 * u(gen)}, 0.5, 0.3, 2.0 * u(gen));
        const double p = ellipse_probability(kTilted, e);
        const auto mc = oracle::ellipse_probability_mc(kTilted, e, stream(100 + n, Domain::oracle), 1'000'000);
        const double sigma = std::sqrt(p * (1.0 - p) / 1e6);
        EXPECT_NEAR(mc, p, 3.0 * sigma + 1e-12);
    }
}
