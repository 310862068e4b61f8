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

// Square RIS array: element layout, steering vectors, linear phase profiles,
// array-factor gain and the beamwidth of the main lobe.

#include "risurllc/core.hpp"
#include "risurllc/geometry.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace risurllc {

/// sqrt(N) x sqrt(N) surface with element spacing d at wavelength lambda.
class RisGeometry {
public:
    RisGeometry(std::size_t n_elements, double spacing, double wavelength)
        : n_(n_elements), side_(static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_elements))))),
          d_(spacing), lambda_(wavelength) {
        if (n_ == 0 || side_ * side_ != n_) throw DomainError("RisGeometry: element count must be a positive perfect square");
        if (!(wavelength > 0.0)) throw DomainError("RisGeometry: wavelength must be positive");
        if (!(spacing > 0.0) || !(spacing < wavelength)) throw DomainError("RisGeometry: spacing must lie in (0, lambda)");
    }

    std::size_t n_elements() const noexcept { return n_; }
    std::size_t side() const noexcept { return side_; }
    double spacing() const noexcept { return d_; }
    double wavelength() const noexcept { return lambda_; }
    double wavenumber() const noexcept { return two_pi / lambda_; }

    /// Fraunhofer distance of the square aperture, 2 (d sqrt N)^2 / lambda.
    double fraunhofer_distance() const {
        const double aperture = d_ * static_cast<double>(side_);
        return 2.0 * aperture * aperture / lambda_;
    }
    bool is_far_field(double distance) const { return distance >= fraunhofer_distance(); }

private:
    std::size_t n_;
    std::size_t side_;
    double d_;
    double lambda_;
};

/// Linear phase profile: element (l, k) applies l * phi_x + k * phi_y (unwrapped).
struct PhaseProfile {
    double phi_x = 0.0;
    double phi_y = 0.0;

    double element_phase(std::size_t l, std::size_t k) const {
        return static_cast<double>(l) * phi_x + static_cast<double>(k) * phi_y;
    }
};

/// Main-lobe widths for a target AF gain.
struct Beamwidths {
    double delta_Theta = 0.0;  // ULA beamwidth
    double delta_theta = 0.0;  // elevation plane
    double delta_phi = 0.0;    // plane orthogonal to the elevation plane
};

/// Position of element n (1-based) in the RIS frame.
inline Cartesian3 element_position(std::size_t n, const RisGeometry& g) {
    if (n < 1 || n > g.n_elements()) throw DomainError("element_position: index out of range");
    const double half = 0.5 * (static_cast<double>(g.side()) - 1.0);
    const std::size_t l = (n - 1) % g.side();
    const std::size_t k = (n - 1) / g.side();
    return {g.spacing() * (static_cast<double>(l) - half), g.spacing() * (static_cast<double>(k) - half), 0.0};
}

inline std::vector<std::complex<double>> steering_vector(const Spherical& z, const RisGeometry& g) {
    const double ux = std::sin(z.theta) * std::cos(z.phi);
    const double uy = std::sin(z.theta) * std::sin(z.phi);
    std::vector<std::complex<double>> a(g.n_elements());
    for (std::size_t n = 1; n <= g.n_elements(); ++n) {
        const Cartesian3 r = element_position(n, g);
        a[n - 1] = std::polar(1.0, g.wavenumber() * (r.x * ux + r.y * uy));
    }
    return a;
}

/// Steers toward `pointing` while compensating the incidence from the BS direction.
inline PhaseProfile phase_profile(const Pointing& pointing, const Spherical& bs, const RisGeometry& g) {
    const double k = g.wavenumber() * g.spacing();
    const double st = std::sin(pointing.theta), sb = std::sin(bs.theta);
    return {-k * (st * std::cos(pointing.phi) + sb * std::cos(bs.phi)),
            -k * (st * std::sin(pointing.phi) + sb * std::sin(bs.phi))};
}

/// |A|^2 by explicit summation over the (l, k) element grid.
inline double af_gain_direct(const PhaseProfile& profile, const Spherical& ue, const Spherical& bs, const RisGeometry& g) {
    const std::size_t m = g.side();
    const double half = 0.5 * (static_cast<double>(m) - 1.0);
    const double kd = g.wavenumber() * g.spacing();
    const double sx = std::sin(ue.theta) * std::cos(ue.phi) + std::sin(bs.theta) * std::cos(bs.phi);
    const double sy = std::sin(ue.theta) * std::sin(ue.phi) + std::sin(bs.theta) * std::sin(bs.phi);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t k = 0; k < m; ++k) {
            const double phase = profile.element_phase(l, k) + kd * (static_cast<double>(l) - half) * sx +
                                 kd * (static_cast<double>(k) - half) * sy;
            acc += std::polar(1.0, phase);
        }
    acc /= static_cast<double>(g.n_elements());
    return std::norm(acc);
}

namespace detail {

/// sin(M f) / (M sin f), with the removable singularity at f = m*pi handled by series.
inline double dirichlet(double f, double m) {
    const double s = std::sin(f);
    if (std::abs(s) < 1e-9) {
        // f = j*pi + e; value = (-1)^{j(M-1)} (1 - (M^2 - 1) e^2 / 6 + ...)
        const double j = std::nearbyint(f / pi);
        const double e = f - j * pi;
        const double sign = (std::fmod(std::abs(j) * (m - 1.0), 2.0) == 0.0) ? 1.0 : -1.0;
        return sign * (1.0 - (m * m - 1.0) * e * e / 6.0);
    }
    return std::sin(m * f) / (m * s);
}

} // namespace detail

/// Direction cosine offsets (f_x, f_y) of a UE direction from the pointing.
inline Vec2 af_offsets(const Pointing& pointing, double ue_sx, double ue_sy, const RisGeometry& g) {
    const double c = pi * g.spacing() / g.wavelength();
    const double st = std::sin(pointing.theta);
    return {c * (ue_sx - st * std::cos(pointing.phi)), c * (ue_sy - st * std::sin(pointing.phi))};
}

/// Closed-form |A|^2 of the steered square array toward a UE direction.
inline double af_gain_closed(const Pointing& pointing, const Spherical& ue, const RisGeometry& g) {
    const Vec2 f = af_offsets(pointing, std::sin(ue.theta) * std::cos(ue.phi), std::sin(ue.theta) * std::sin(ue.phi), g);
    const double m = static_cast<double>(g.side());
    const double dx = detail::dirichlet(f.x, m);
    const double dy = detail::dirichlet(f.y, m);
    return dx * dx * dy * dy;
}

/// The x in [0, pi) with sin(x)/x = a0, by bisection.
inline double sinc_inverse(double a0) {
    if (!(a0 > 0.0) || a0 > 1.0) throw DomainError("sinc_inverse: argument must lie in (0, 1]");
    if (a0 == 1.0) return 0.0;
    double lo = 1e-12, hi = pi - 1e-12;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (std::sin(mid) / mid > a0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Beamwidths at which the AF gain falls to a0. The sinc main-lobe model approximates
/// the AF amplitude, so the gain target enters as sqrt(a0).
inline Beamwidths beamwidths(double a0, double theta_hat, const RisGeometry& g) {
    if (!(a0 > 0.0) || a0 > 1.0) throw DomainError("beamwidths: gain must lie in (0, 1]");
    if (!(theta_hat >= 0.0) || !(theta_hat < 0.5 * pi)) throw DomainError("beamwidths: theta_hat must lie in [0, pi/2)");
    const double x = sinc_inverse(std::sqrt(a0));
    const double arg = 2.0 * g.wavelength() * x / (pi * g.spacing() * static_cast<double>(g.side()));
    if (arg > 1.0)
        throw BeamTooWideError("beamwidths: gain " + std::to_string(a0) + " is unreachable for this aperture");
    Beamwidths bw;
    bw.delta_Theta = std::asin(arg);
    bw.delta_theta = bw.delta_Theta / std::cos(theta_hat);
    bw.delta_phi = bw.delta_Theta;
    return bw;
}

} // namespace risurllc
