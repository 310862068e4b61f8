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

#include "risurllc/array.hpp"
#include "risurllc/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace risurllc;

namespace {

const RisGeometry kRis{100, 0.333 / 2.0, 0.333};

Ellipse2D footprint(double a0, const Pointing& p, double h = 25.0) {
    const Beamwidths bw = beamwidths(a0, p.theta, kRis);
    return project_beam(p, bw.delta_theta, bw.delta_phi, h);
}

double angle_mod_pi_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), pi);
    return std::min(d, pi - d);
}

} // namespace

TEST(CartToSpherical, OnAxisPoint) {
    const Spherical s = cart_to_spherical({0.0, 0.0, 25.0});
    EXPECT_DOUBLE_EQ(s.r, 25.0);
    EXPECT_DOUBLE_EQ(s.theta, 0.0);
    EXPECT_DOUBLE_EQ(s.phi, 0.0);
}

TEST(CartToSpherical, EquatorialPoint) {
    const Spherical s = cart_to_spherical({1.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(s.r, 1.0);
    EXPECT_NEAR(s.theta, pi / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(s.phi, 0.0);
}

TEST(CartToSpherical, BasePosition) {
    const Spherical s = cart_to_spherical({-5.0, -5.0, 5.0});
    EXPECT_NEAR(s.r, 8.660254037844387, 1e-12);
    EXPECT_NEAR(s.theta, 0.9553166181245093, 1e-12);
    EXPECT_NEAR(s.phi, 5.0 * pi / 4.0, 1e-12);
}

TEST(CartToSpherical, ZeroNormThrows) { EXPECT_THROW(cart_to_spherical({0.0, 0.0, 0.0}), DomainError); }

TEST(CartToSpherical, RoundTrip) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 1000; ++i) {
        const Cartesian3 p{u(gen), u(gen), std::abs(u(gen)) + 0.1};
        const Cartesian3 q = spherical_to_cart(cart_to_spherical(p));
        EXPECT_NEAR(p.x, q.x, 1e-12);
        EXPECT_NEAR(p.y, q.y, 1e-12);
        EXPECT_NEAR(p.z, q.z, 1e-12);
    }
}

TEST(RotationMatrix, Nadir) {
    const Rotation3 r = rotation_matrix(0.0, 0.0);
    const double expected[3][3] = {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(r(i, j), expected[i][j], 1e-15);
}

TEST(RotationMatrix, PointingRow) {
    const Rotation3 r = rotation_matrix(pi / 6.0, pi / 4.0);
    EXPECT_NEAR(r(2, 0), 0.3535533905932738, 1e-12);
    EXPECT_NEAR(r(2, 1), 0.3535533905932738, 1e-12);
    EXPECT_NEAR(r(2, 2), 0.8660254037844387, 1e-12);
}

TEST(RotationMatrix, OrthonormalProperRotation) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> th(0.0, pi / 2.0 - 1e-3), ph(0.0, two_pi);
    for (int n = 0; n < 1000; ++n) {
        const Rotation3 r = rotation_matrix(th(gen), ph(gen));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += r(k, i) * r(k, j);
                EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
            }
        EXPECT_NEAR(r.det(), 1.0, 1e-12);
        const Cartesian3 v{0.3, -1.7, 2.2};
        const Cartesian3 w = r.apply_transpose(r.apply(v));
        EXPECT_NEAR(w.x, v.x, 1e-12);
        EXPECT_NEAR(w.y, v.y, 1e-12);
        EXPECT_NEAR(w.z, v.z, 1e-12);
    }
}

TEST(ProjectBeam, NadirCircle) {
    const double psi = 0.1;
    for (double phi : {0.0, 1.0, 4.0}) {
        const Ellipse2D e = project_beam({0.0, phi}, 2.0 * psi, 2.0 * psi, 25.0);
        EXPECT_NEAR(e.center.x, 0.0, 1e-12);
        EXPECT_NEAR(e.center.y, 0.0, 1e-12);
        EXPECT_NEAR(e.semi_major, 25.0 * std::tan(psi), 1e-12);
        EXPECT_NEAR(e.semi_minor, 25.0 * std::tan(psi), 1e-12);
        EXPECT_NEAR(e.orientation, std::fmod(phi, pi), 1e-12);  // tie breaks to the pointing azimuth
    }
}

TEST(ProjectBeam, PublishedFootprintsCenters) {
    // Published: A0 = 0.9 -> (10.2269, 10.2269); A0 = 0.1 -> (10.6034, 10.6034)
    const Pointing p{pi / 6.0, pi / 4.0};
    const Ellipse2D e9 = footprint(0.9, p), e1 = footprint(0.1, p);
    EXPECT_NEAR(e9.center.x / 10.2269, 1.0, 0.005);
    EXPECT_NEAR(e9.center.y / 10.2269, 1.0, 0.005);
    EXPECT_NEAR(e1.center.x / 10.6034, 1.0, 0.005);
    EXPECT_NEAR(e1.center.y / 10.6034, 1.0, 0.005);
}

TEST(ProjectBeam, FrozenFootprints) {
    // Regression values of this implementation (see the README on the beamwidth model).
    const Pointing p{pi / 6.0, pi / 4.0};
    const Ellipse2D e9 = footprint(0.9, p), e1 = footprint(0.1, p);
    EXPECT_NEAR(e9.center.x, 10.2293, 1e-3);
    EXPECT_NEAR(e9.semi_major, 1.3731, 1e-3);
    EXPECT_NEAR(e9.semi_minor, 1.0294, 1e-3);
    EXPECT_NEAR(e1.center.x, 10.6261, 1e-3);
    EXPECT_NEAR(e1.semi_major, 5.8854, 1e-3);
    EXPECT_NEAR(e1.semi_minor, 4.3805, 1e-3);
}

TEST(ProjectBeam, PublishedFootprintIsAConeSection) {
    // Given the beamwidth that reproduces the published major axis, the composed
    // conic reproduces the published center and minor axis as well.
    const Pointing p{pi / 6.0, pi / 4.0};
    struct Case { double center, a, b; };
    for (const Case c : {Case{10.2269, 1.2988, 0.9737}, Case{10.6034, 5.7221, 4.2606}}) {
        double lo = 1e-4, hi = 0.6;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const Ellipse2D e = project_beam(p, mid / std::cos(p.theta), mid, 25.0);
            (e.semi_major < c.a ? lo : hi) = mid;
        }
        const double dT = 0.5 * (lo + hi);
        const Ellipse2D e = project_beam(p, dT / std::cos(p.theta), dT, 25.0);
        EXPECT_NEAR(e.center.x, c.center, 2e-4);
        EXPECT_NEAR(e.center.y, c.center, 2e-4);
        EXPECT_NEAR(e.semi_minor, c.b, 2e-4);
    }
}

TEST(ProjectBeam, HorizonIsAnError) {
    EXPECT_THROW(project_beam({1.4, 0.3}, 0.4, 0.3, 25.0), HorizonError);
    try {
        project_beam({1.4, 0.3}, 0.4, 0.3, 25.0);
    } catch (const HorizonError& e) {
        EXPECT_DOUBLE_EQ(e.theta_hat(), 1.4);
        EXPECT_DOUBLE_EQ(e.delta_theta(), 0.4);
    }
    EXPECT_THROW(project_beam({0.3, 0.3}, 0.0, 0.3, 25.0), DomainError);
}

TEST(ProjectBeam, InvariantsOverRandomPointings) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> th(0.0, 0.9), ph(0.0, two_pi), a(0.1, 0.95);
    const double h = 25.0;
    for (int n = 0; n < 300; ++n) {
        const Pointing p{th(gen), ph(gen)};
        const Beamwidths bw = beamwidths(a(gen), p.theta, kRis);
        const Conic2D k = beam_cone_conic(p, bw.delta_theta, bw.delta_phi, h);
        const Ellipse2D e = project_beam(p, bw.delta_theta, bw.delta_phi, h);
        ASSERT_GE(e.semi_major, e.semi_minor);
        ASSERT_GT(e.semi_minor, 0.0);
        // orientation follows the pointing azimuth
        if (p.theta > 1e-3) {
            EXPECT_LT(angle_mod_pi_distance(e.orientation, p.phi), 1e-6);
        }
        // axis hit point strictly inside
        const Vec2 hit{h * std::tan(p.theta) * std::cos(p.phi), h * std::tan(p.theta) * std::sin(p.phi)};
        EXPECT_LT(e.shape_matrix().quad(hit - e.center), 1.0);
        // boundary points satisfy the conic
        for (int i = 0; i < 100; ++i) {
            const Vec2 q = e.boundary_point(two_pi * i / 100.0);
            EXPECT_LE(std::abs(k(q.x, q.y)), 1e-9 * k.max_abs_coefficient() * h * h);
        }
    }
}

TEST(ProjectBeam, NestedFootprints) {
    const Pointing p{0.5, 2.0};
    Ellipse2D outer = footprint(0.1, p);
    for (double a0 : {0.2, 0.4, 0.6, 0.8, 0.95}) {
        const Ellipse2D inner = footprint(a0, p);
        for (int i = 0; i < 1000; ++i) EXPECT_TRUE(outer.contains(inner.boundary_point(two_pi * i / 1000.0)));
        outer = inner;
    }
}

TEST(ProjectBeam, PrintedConicCoefficients) {
    // The composed quadratic form agrees with the closed-form A, B, C as printed,
    // and with D, E, F after correction: D = -2h ct st cp (a^-2 + 1),
    // E = -2h ct st sp (a^-2 + 1), F = h^2 (a^-2 st^2 - ct^2).
    const double th = pi / 6.0, ph = pi / 4.0, h = 25.0;
    const double dth = 0.3, dph = 0.25;
    const Conic2D k = beam_cone_conic({th, ph}, dth, dph, h);
    const double ia = 1.0 / std::pow(std::tan(dth / 2.0), 2), ib = 1.0 / std::pow(std::tan(dph / 2.0), 2);
    const double ct = std::cos(th), st = std::sin(th), cp = std::cos(ph), sp = std::sin(ph);
    const double scale = k.max_abs_coefficient();
    EXPECT_NEAR(k.A, cp * cp * (ia * ct * ct - st * st) + ib * sp * sp, 1e-12 * scale);
    EXPECT_NEAR(k.B, 2.0 * cp * sp * (ia * ct * ct - ib - st * st), 1e-12 * scale);
    EXPECT_NEAR(k.C, sp * sp * (ia * ct * ct - st * st) + ib * cp * cp, 1e-12 * scale);
    EXPECT_NEAR(k.D, -2.0 * h * ct * st * cp * (ia + 1.0), 1e-12 * scale);
    EXPECT_NEAR(k.E, -2.0 * h * ct * st * sp * (ia + 1.0), 1e-12 * scale);
    EXPECT_NEAR(k.F, h * h * (ia * st * st - ct * ct), 1e-12 * scale);

    const double printed_D = -2.0 * h * ct * st * cp * (ia * cp + 1.0);
    const double printed_F = h * h * (ia * sp * sp * cp * cp + ct * ct);
    EXPECT_GT(std::abs(k.D - printed_D), 1e-3 * scale);
    EXPECT_GT(std::abs(k.F - printed_F), 1e-3 * scale);
}

TEST(FarthestFloorPoint, Examples) {
    Ellipse2D e;
    e.center = {10.2269, 10.2269};
    e.semi_major = 1.2988;
    e.semi_minor = 0.9737;
    e.orientation = pi / 4.0;
    const Cartesian3 q = farthest_floor_point(e, pi / 4.0, 25.0);
    EXPECT_NEAR(q.x, 11.1453, 1e-4);
    EXPECT_NEAR(q.y, 11.1453, 1e-4);
    EXPECT_DOUBLE_EQ(q.z, 25.0);

    Ellipse2D c;
    c.semi_major = c.semi_minor = 2.0;
    const Cartesian3 r = farthest_floor_point(c, 0.0, 7.0);
    EXPECT_DOUBLE_EQ(r.x, 2.0);
    EXPECT_DOUBLE_EQ(r.y, 0.0);
    EXPECT_DOUBLE_EQ(r.z, 7.0);
}

TEST(FarthestFloorPoint, BeatsInteriorSamples) {
    const Pointing p{0.6, 0.9};
    const Ellipse2D e = footprint(0.5, p);
    const Cartesian3 far = farthest_floor_point(e, p.phi, 25.0);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double r = std::sqrt(u(gen)), t = two_pi * u(gen);
        const Vec2 q = e.center + (r * e.semi_major * std::cos(t)) * e.major_axis() + (r * e.semi_minor * std::sin(t)) * e.minor_axis();
        EXPECT_LE((Cartesian3{q.x, q.y, 25.0}.norm()), far.norm() + 1e-12);
    }
}
