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

// Coordinate frames, beam-cone rotation and the floor footprint of the beam.
//
// Frame convention: origin at the RIS center, x/y parallel to the RIS edges,
// z pointing down toward the floor. The floor is the plane z = h.

#include "risurllc/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace risurllc {

// ----------------------------------------------------------------------------
// Small fixed-size linear algebra
// ----------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
    double norm() const { return std::hypot(x, y); }
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
    double quad(Vec2 v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
    double bilinear(Vec2 u, Vec2 v) const {
        return xx * u.x * v.x + xy * (u.x * v.y + u.y * v.x) + yy * u.y * v.y;
    }
    Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    Sym2 inverse() const {
        const double d = det();
        return {yy / d, -xy / d, xx / d};
    }
    Sym2 scaled(double s) const { return {s * xx, s * xy, s * yy}; }

    /// Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const {
        const double m = 0.5 * (xx + yy);
        const double r = std::hypot(0.5 * (xx - yy), xy);
        return {m - r, m + r};
    }
    /// Angle of the eigenvector belonging to the larger eigenvalue, in (-pi/2, pi/2].
    double major_eigen_angle() const { return 0.5 * std::atan2(2.0 * xy, xx - yy); }
};

/// General (not necessarily symmetric) 2x2 matrix, row major.
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        const double k = det();
        return {d / k, -b / k, -c / k, a / k};
    }
    Mat2 transpose() const { return {a, c, b, d}; }
    friend Mat2 operator*(const Mat2& p, const Mat2& q) {
        return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d,
                p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
    }
    /// M S M^T for symmetric S.
    Sym2 congruence(const Sym2& s) const {
        const Mat2 full{s.xx, s.xy, s.xy, s.yy};
        const Mat2 r = (*this) * full * transpose();
        return {r.a, 0.5 * (r.b + r.c), r.d};
    }
};

// ----------------------------------------------------------------------------
// 3D frames
// ----------------------------------------------------------------------------

struct Cartesian3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    friend Cartesian3 operator-(Cartesian3 a, Cartesian3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Cartesian3 operator+(Cartesian3 a, Cartesian3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
};

/// r >= 0, theta measured from +z in [0, pi], phi wrapped to [0, 2*pi).
struct Spherical {
    double r = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

/// Beam pointing direction (elevation from +z, azimuth).
struct Pointing {
    double theta = 0.0;
    double phi = 0.0;
};

inline Spherical cart_to_spherical(const Cartesian3& p) {
    const double r = p.norm();
    if (!(r > 0.0)) throw DomainError("cart_to_spherical: zero-norm position");
    const double c = std::clamp(p.z / r, -1.0, 1.0);
    return {r, std::acos(c), wrap_two_pi(std::atan2(p.y, p.x))};
}

inline Cartesian3 spherical_to_cart(const Spherical& s) {
    const double st = std::sin(s.theta);
    return {s.r * st * std::cos(s.phi), s.r * st * std::sin(s.phi), s.r * std::cos(s.theta)};
}

/// Pointing toward a floor position (x, y, h).
inline Pointing pointing_toward(Vec2 floor_xy, double h) {
    const Spherical s = cart_to_spherical({floor_xy.x, floor_xy.y, h});
    return {s.theta, s.phi};
}

/// 3x3 rotation taking the RIS frame into the beam frame (u, v, w), w along the pointing.
class Rotation3 {
public:
    using Rows = std::array<std::array<double, 3>, 3>;

    constexpr explicit Rotation3(const Rows& rows) : m_(rows) {}

    double operator()(int i, int j) const { return m_[i][j]; }
    const std::array<double, 3>& row(int i) const { return m_[i]; }

    Cartesian3 apply(const Cartesian3& p) const {
        return {m_[0][0] * p.x + m_[0][1] * p.y + m_[0][2] * p.z,
                m_[1][0] * p.x + m_[1][1] * p.y + m_[1][2] * p.z,
                m_[2][0] * p.x + m_[2][1] * p.y + m_[2][2] * p.z};
    }
    Cartesian3 apply_transpose(const Cartesian3& p) const {
        return {m_[0][0] * p.x + m_[1][0] * p.y + m_[2][0] * p.z,
                m_[0][1] * p.x + m_[1][1] * p.y + m_[2][1] * p.z,
                m_[0][2] * p.x + m_[1][2] * p.y + m_[2][2] * p.z};
    }
    double det() const {
        return m_[0][0] * (m_[1][1] * m_[2][2] - m_[1][2] * m_[2][1]) -
               m_[0][1] * (m_[1][0] * m_[2][2] - m_[1][2] * m_[2][0]) +
               m_[0][2] * (m_[1][0] * m_[2][1] - m_[1][1] * m_[2][0]);
    }

private:
    Rows m_;
};

/// Rows: u = elevation-plane axis, v = horizontal axis, w = pointing direction.
/// Row u is v x w, so the matrix is a proper rotation (det = +1).
inline Rotation3 rotation_matrix(double theta_hat, double phi_hat) {
    const double ct = std::cos(theta_hat), st = std::sin(theta_hat);
    const double cp = std::cos(phi_hat), sp = std::sin(phi_hat);
    return Rotation3({{{-ct * cp, -ct * sp, st},
                       {sp, -cp, 0.0},
                       {st * cp, st * sp, ct}}});
}

// ----------------------------------------------------------------------------
// Floor conics and ellipses
// ----------------------------------------------------------------------------

/// A x^2 + B xy + C y^2 + D x + E y + F = 0 on the floor plane.
struct Conic2D {
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0, F = 0.0;

    double discriminant() const { return B * B - 4.0 * A * C; }
    double operator()(double x, double y) const {
        return A * x * x + B * x * y + C * y * y + D * x + E * y + F;
    }
    double max_abs_coefficient() const {
        return std::max({std::abs(A), std::abs(B), std::abs(C), std::abs(D), std::abs(E), std::abs(F)});
    }
};

/// Ellipse on the floor: center, semi-axes (major >= minor > 0) and the major-axis angle in [0, pi).
struct Ellipse2D {
    Vec2 center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double orientation = 0.0;

    Vec2 major_axis() const { return {std::cos(orientation), std::sin(orientation)}; }
    Vec2 minor_axis() const { return {-std::sin(orientation), std::cos(orientation)}; }

    /// Q such that the ellipse is {p : (p - center)^T Q (p - center) <= 1}.
    Sym2 shape_matrix() const {
        const double c = std::cos(orientation), s = std::sin(orientation);
        const double ia = 1.0 / (semi_major * semi_major), ib = 1.0 / (semi_minor * semi_minor);
        return {ia * c * c + ib * s * s, (ia - ib) * c * s, ia * s * s + ib * c * c};
    }

    bool contains(Vec2 p) const { return shape_matrix().quad(p - center) <= 1.0; }

    /// Boundary point at parameter t (t = 0 is the +major vertex).
    Vec2 boundary_point(double t) const {
        return center + (semi_major * std::cos(t)) * major_axis() + (semi_minor * std::sin(t)) * minor_axis();
    }

    /// Builds the ellipse {p : (p - center)^T Q (p - center) <= 1} from a positive-definite Q.
    /// When the two axes tie, `tie_orientation` is used.
    static Ellipse2D from_shape_matrix(Vec2 center, const Sym2& q, double tie_orientation = 0.0) {
        const auto ev = q.eigenvalues();
        if (!(ev[0] > 0.0)) throw DomainError("ellipse shape matrix is not positive definite");
        Ellipse2D e;
        e.center = center;
        e.semi_major = 1.0 / std::sqrt(ev[0]);
        e.semi_minor = 1.0 / std::sqrt(ev[1]);
        const bool tie = (ev[1] - ev[0]) <= 1e-12 * (ev[1] + ev[0]);
        e.orientation = std::fmod(wrap_two_pi(tie ? tie_orientation : q.major_eigen_angle() + 0.5 * pi), pi);
        return e;
    }
};

/// Extracts center, semi-axes and orientation from an elliptic conic.
inline Ellipse2D ellipse_from_conic(const Conic2D& k, double tie_orientation = 0.0) {
    if (!(k.discriminant() < 0.0)) throw DomainError("conic is not an ellipse");
    const Sym2 q{k.A, 0.5 * k.B, k.C};
    const Vec2 l{0.5 * k.D, 0.5 * k.E};
    const Sym2 qi = q.inverse();
    const Vec2 center = -1.0 * qi.apply(l);
    const double level = -(k.F + dot(l, center));
    if (level == 0.0 || (level > 0.0) != (k.A > 0.0)) throw DomainError("conic is an empty or degenerate ellipse");
    return Ellipse2D::from_shape_matrix(center, q.scaled(1.0 / level), tie_orientation);
}

/// Floor conic of the elliptic cone u^2/a^2 + v^2/b^2 = w^2 around the pointing direction,
/// with a = tan(delta_theta / 2) and b = tan(delta_phi / 2).
inline Conic2D beam_cone_conic(const Pointing& pointing, double delta_theta, double delta_phi, double h) {
    const Rotation3 r = rotation_matrix(pointing.theta, pointing.phi);
    const double a = std::tan(0.5 * delta_theta);
    const double b = std::tan(0.5 * delta_phi);
    const std::array<double, 3> diag{1.0 / (a * a), 1.0 / (b * b), -1.0};
    // M = R^T diag R
    double m[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += r(k, i) * diag[k] * r(k, j);
            m[i][j] = s;
        }
    return {m[0][0], 2.0 * m[0][1], m[1][1], 2.0 * h * m[0][2], 2.0 * h * m[1][2], h * h * m[2][2]};
}

/// Floor footprint of the beam cone. Throws HorizonError when the cone reaches the horizon.
inline Ellipse2D project_beam(const Pointing& pointing, double delta_theta, double delta_phi, double h) {
    if (!(delta_theta > 0.0) || !(delta_phi > 0.0)) throw DomainError("project_beam: beamwidths must be positive");
    if (!(h > 0.0)) throw DomainError("project_beam: floor distance must be positive");
    if (pointing.theta + 0.5 * delta_theta >= 0.5 * pi) throw HorizonError(pointing.theta, delta_theta);
    const Conic2D k = beam_cone_conic(pointing, delta_theta, delta_phi, h);
    if (!(k.discriminant() < 0.0)) throw HorizonError(pointing.theta, delta_theta);
    return ellipse_from_conic(k, pointing.phi);
}

/// Footprint point farthest from the RIS: the major vertex on the outward pointing azimuth.
inline Cartesian3 farthest_floor_point(const Ellipse2D& e, double phi_hat, double h) {
    return {e.center.x + e.semi_major * std::cos(phi_hat), e.center.y + e.semi_major * std::sin(phi_hat), h};
}

} // namespace risurllc
