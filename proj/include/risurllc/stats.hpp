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

// Gaussian position belief on the floor and its probability mass inside an ellipse.

#include "risurllc/core.hpp"
#include "risurllc/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace risurllc {

/// Lower-triangular Cholesky factor [[l11, 0], [l21, l22]].
struct Cholesky2 {
    double l11 = 1.0, l21 = 0.0, l22 = 1.0;

    Vec2 apply(Vec2 z) const { return {l11 * z.x, l21 * z.x + l22 * z.y}; }
    Vec2 solve(Vec2 v) const {
        const double z1 = v.x / l11;
        return {z1, (v.y - l21 * z1) / l22};
    }
    Mat2 matrix() const { return {l11, 0.0, l21, l22}; }
};

inline Cholesky2 cholesky(const Sym2& s) {
    if (!(s.xx > 0.0)) throw DomainError("cholesky: matrix is not positive definite");
    const double l11 = std::sqrt(s.xx);
    const double l21 = s.xy / l11;
    const double r = s.yy - l21 * l21;
    if (!(r > 0.0)) throw DomainError("cholesky: matrix is not positive definite");
    return {l11, l21, std::sqrt(r)};
}

/// Bivariate Gaussian belief over the UE floor position.
class PositionBelief {
public:
    PositionBelief(Vec2 mean, const Sym2& covariance) : mean_(mean), cov_(covariance), chol_(cholesky(covariance)) {}

    Vec2 mean() const noexcept { return mean_; }
    const Sym2& covariance() const noexcept { return cov_; }
    const Cholesky2& factor() const noexcept { return chol_; }

    double pdf(Vec2 p) const {
        const Vec2 z = chol_.solve(p - mean_);
        return std::exp(-0.5 * dot(z, z)) / (two_pi * chol_.l11 * chol_.l22);
    }

private:
    Vec2 mean_;
    Sym2 cov_;
    Cholesky2 chol_;
};

/// sigma_u^2 [[1/cos^2 psi, sin psi], [sin psi, 1/cos^2 psi]]
inline Sym2 covariance_from_motion(double sigma_u, double psi) {
    if (!(sigma_u > 0.0)) throw DomainError("covariance_from_motion: sigma_u must be positive");
    if (!(std::abs(psi) < 0.5 * pi)) throw DomainError("covariance_from_motion: |psi| must be below pi/2");
    const double s2 = sigma_u * sigma_u;
    const double c = std::cos(psi);
    return {s2 / (c * c), s2 * std::sin(psi), s2 / (c * c)};
}

/// Position from two standard normals.
inline Vec2 position_from_normals(const PositionBelief& b, double n1, double n2) {
    return b.mean() + b.factor().apply({n1, n2});
}

template <class Rng>
Vec2 sample_position(const PositionBelief& b, Rng& rng) {
    const auto [n1, n2] = rng.normal_pair();
    return position_from_normals(b, n1, n2);
}

namespace detail {

/// The ellipse in whitened coordinates z = L^-1 (x - mean): (z - m)^T A (z - m) <= 1.
struct WhitenedEllipse {
    Sym2 A;
    Vec2 m;
    double gamma = 0.0;  // m^T A m - 1; negative when the origin is inside

    // Ray r e(t): alpha r^2 - 2 beta r + gamma = 0
    double alpha(Vec2 e) const { return A.quad(e); }
    double beta(Vec2 e) const { return A.bilinear(e, m); }
};

inline WhitenedEllipse whiten(const PositionBelief& b, const Ellipse2D& e) {
    if (!(e.semi_major > 0.0) || !(e.semi_minor > 0.0)) throw DomainError("ellipse_probability: degenerate ellipse");
    const Mat2 lt = b.factor().matrix().transpose();
    WhitenedEllipse w;
    w.A = lt.congruence(e.shape_matrix());
    w.m = b.factor().solve(e.center - b.mean());
    w.gamma = w.A.quad(w.m) - 1.0;
    return w;
}

inline constexpr double quad_tol = 1e-13;

} // namespace detail

/// Probability that the position lies outside the ellipse, accurate in absolute terms
/// also when it is tiny.
inline double ellipse_escape_probability(const PositionBelief& b, const Ellipse2D& e);

/// P(x_u in e) under the belief.
inline double ellipse_probability(const PositionBelief& b, const Ellipse2D& e) {
    const detail::WhitenedEllipse w = detail::whiten(b, e);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    if (w.gamma <= 0.0) return 1.0 - ellipse_escape_probability(b, e);

    // Origin outside. With S = A^(1/2) the ellipse maps to the unit circle and the origin
    // to y0 = -S m at distance rho. A ray leaving y0 at angle w from -y0 meets the circle at
    // s = rho cos w -+ cos p, where rho sin w = sin p. Substituting p removes every
    // cancellation near the tangent rays, and the ray maps back to x = s S^-1 u.
    const double rho = std::sqrt(1.0 + w.gamma);
    const double sd = std::sqrt(w.A.det());
    const double norm = 1.0 / std::sqrt(w.A.trace() + 2.0 * sd);
    const Sym2 S{(w.A.xx + sd) * norm, w.A.xy * norm, (w.A.yy + sd) * norm};
    const Sym2 Sinv = S.inverse();
    const double det_sinv = 1.0 / S.det();
    const Vec2 y0 = -1.0 * S.apply(w.m);
    const double u0 = std::atan2(-y0.y, -y0.x);

    auto crossing_mass = [&](double p) {
        const double sp = std::sin(p), cp = std::cos(p);
        const double rc = std::sqrt(rho * rho - sp * sp);  // rho cos w
        const double om = std::asin(sp / rho);
        const Vec2 x = Sinv.apply({std::cos(u0 + om), std::sin(u0 + om)});
        const double g2 = dot(x, x);
        const double s_near = w.gamma / (rc + cp);
        const double r1sq = s_near * s_near * g2;
        const double gap = 4.0 * rc * cp * g2;  // r2^2 - r1^2
        // dt/dp = det(S^-1) / |S^-1 u|^2 * cos p / (rho cos w)
        return std::exp(-0.5 * r1sq) * -std::expm1(-0.5 * gap) * det_sinv / g2 * cp / rc;
    };
    const double v = GK::integrate(crossing_mass, -0.5 * pi, 0.5 * pi, 15, detail::quad_tol);
    return std::clamp(v / two_pi, 0.0, 1.0);
}

inline double ellipse_escape_probability(const PositionBelief& b, const Ellipse2D& e) {
    const detail::WhitenedEllipse w = detail::whiten(b, e);
    if (w.gamma > 0.0) return 1.0 - ellipse_probability(b, e);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto escape = [&](double t) {
        const Vec2 dir{std::cos(t), std::sin(t)};
        const double al = w.alpha(dir), be = w.beta(dir);
        const double rho = (be + std::sqrt(std::max(be * be - al * w.gamma, 0.0))) / al;
        return std::exp(-0.5 * rho * rho);
    };
    // Four quarter turns keep the adaptive rule local on elongated ellipses.
    double q = 0.0;
    for (int k = 0; k < 4; ++k) q += GK::integrate(escape, 0.5 * pi * k, 0.5 * pi * (k + 1), 15, detail::quad_tol);
    return std::clamp(q / two_pi, 0.0, 1.0);
}

} // namespace risurllc
