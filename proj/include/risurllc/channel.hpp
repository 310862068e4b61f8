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

// Path loss, Rician fading with unit second moment, the distribution of the
// two-hop power gain |g_b g_u|^2 and its tail quantiles.

#include "risurllc/core.hpp"
#include "risurllc/geometry.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace risurllc {

struct LinkBudget {
    double beta0 = db_to_linear(-31.53);  // reference path gain (linear)
    double d0 = 1.0;                      // reference distance [m]
    double xi = 2.0;                      // path loss exponent
    double G_bu = db_to_linear(12.85);    // combined BS and UE antenna gain (linear)
    double noise_power = 0.0;             // sigma^2 [W]
    double K = db_to_linear(6.0);         // Rician K factor (linear)
};

/// Thermal noise -174 dBm/Hz over `bandwidth_hz`, plus a noise figure.
inline double thermal_noise_power(double bandwidth_hz, double noise_figure_db = 0.0) {
    require(bandwidth_hz > 0.0, "thermal_noise_power: bandwidth must be positive");
    return dbm_to_watts(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

inline double path_loss(const Cartesian3& x_u, const Cartesian3& x_b, const LinkBudget& lb) {
    const double ru = x_u.norm(), rb = x_b.norm();
    if (!(ru > 0.0) || !(rb > 0.0)) throw DomainError("path_loss: zero-norm position");
    return lb.beta0 * lb.beta0 * lb.G_bu * std::pow(lb.d0 * lb.d0 / (ru * rb), lb.xi);
}

/// gamma = (P / sigma^2) beta |g_b g_u|^2 N^2 |A|^2
inline double snr(double power, double beta, double fading_power, double af_gain, std::size_t n_elements, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("snr: noise power must be positive");
    const double n = static_cast<double>(n_elements);
    return power / sigma2 * beta * fading_power * n * n * af_gain;
}

// ----------------------------------------------------------------------------
// Bessel I0
// ----------------------------------------------------------------------------

namespace detail {
inline constexpr double bessel_split = 15.0;
}

/// Exponentially scaled modified Bessel function exp(-|x|) I0(x).
inline double bessel_i0e(double x) {
    x = std::abs(x);
    if (x < detail::bessel_split) {
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return sum * std::exp(-x);
    }
    // e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k); stop at the smallest term.
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * x * k);
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(two_pi * x);
}

inline double bessel_i0(double x) { return bessel_i0e(x) * std::exp(std::abs(x)); }

// ----------------------------------------------------------------------------
// Rician amplitude with E[|g|^2] = 1
// ----------------------------------------------------------------------------

inline double rice_pdf(double r, double K) {
    require(K >= 0.0, "rice_pdf: K must be non-negative");
    if (r <= 0.0) return 0.0;
    const double a = std::sqrt(K + 1.0) * r - std::sqrt(K);
    const double z = 2.0 * r * std::sqrt(K * (K + 1.0));
    return 2.0 * (K + 1.0) * r * std::exp(-a * a) * bessel_i0e(z);
}

/// P(|g| <= r). Poisson mixture of central chi-square CDFs:
/// sum_j e^-K K^j / j! * P(j + 1, (K + 1) r^2), with P the regularized lower gamma.
inline double rice_cdf(double r, double K) {
    require(K >= 0.0, "rice_cdf: K must be non-negative");
    if (r <= 0.0) return 0.0;
    const double z = (K + 1.0) * r * r;
    double weight = std::exp(-K);
    double sum = 0.0;
    for (int j = 0; j < 400; ++j) {
        const double term = weight * boost::math::gamma_p(static_cast<double>(j) + 1.0, z);
        sum += term;
        // Beyond j > 2K consecutive terms shrink by at least half, so the tail is below `term`.
        if (static_cast<double>(j) > 2.0 * K && term <= 1e-18 * sum) break;
        weight *= K / (static_cast<double>(j) + 1.0);
    }
    return std::min(sum, 1.0);
}

/// |nu + sigma_f (a + j b)|^2 from two standard normals a, b.
inline double rice_power(double K, double a, double b) {
    const double nu = std::sqrt(K / (K + 1.0));
    const double s = std::sqrt(0.5 / (K + 1.0));
    const double re = nu + s * a, im = s * b;
    return re * re + im * im;
}

inline double rice_amplitude(double K, double a, double b) { return std::sqrt(rice_power(K, a, b)); }

template <class Rng>
double rice_amplitude_sample(double K, Rng& rng) {
    require(K >= 0.0, "rice_amplitude_sample: K must be non-negative");
    const auto [a, b] = rng.normal_pair();
    return rice_amplitude(K, a, b);
}

// ----------------------------------------------------------------------------
// Product fading |g_b g_u|^2
// ----------------------------------------------------------------------------

namespace detail {

/// Integrates g(u) over the log-amplitude axis u = log x, split where the factors
/// involving s / x and x change shape.
template <class F>
double integrate_log_axis(F g, double s, double K, double u_lo) {
    const double u_hi = std::log((std::sqrt(K) + 9.0) / std::sqrt(K + 1.0));
    // Slivers shorter than 0.25 are merged: a piece carrying almost no mass cannot meet
    // a relative tolerance and would recurse to full depth.
    std::vector<double> inner{std::log(s) - 4.0, std::log(s), std::log(s) + 4.0, 0.0};
    std::sort(inner.begin(), inner.end());
    std::vector<double> cuts{u_lo};
    for (double c : inner) {
        if (c - cuts.back() > 0.25 && u_hi - c > 0.25) cuts.push_back(c);
    }
    cuts.push_back(u_hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, cuts[i], cuts[i + 1], 10, 1e-12);
    }
    return total;
}

} // namespace detail

/// P(|g_u|^2 |g_b|^2 <= t) for independent unit-power Rician links.
/// Evaluated as int F(sqrt(t)/x) f(x) dx with x = e^u.
inline double product_fading_cdf(double t, double K) {
    if (!(t >= 0.0)) throw DomainError("product_fading_cdf: t must be non-negative");
    require(K >= 0.0, "product_fading_cdf: K must be non-negative");
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return 1.0;
    const double s = std::sqrt(t);
    const double u_lo = std::min(std::log(s), 0.0) - 32.0;
    auto integrand = [&](double u) {
        const double x = std::exp(u);
        return rice_cdf(s / x, K) * rice_pdf(x, K) * x;
    };
    // below u_lo the inner CDF is 1, leaving the mass F(e^u_lo)
    const double total = rice_cdf(std::exp(u_lo), K) + detail::integrate_log_axis(integrand, s, K, u_lo);
    return std::clamp(total, 0.0, 1.0);
}

/// Density of |g_u|^2 |g_b|^2: int f(s/x) f(x) / (2 s) du with s = sqrt(t), x = e^u.
inline double product_fading_pdf(double t, double K) {
    if (!(t >= 0.0)) throw DomainError("product_fading_pdf: t must be non-negative");
    require(K >= 0.0, "product_fading_pdf: K must be non-negative");
    if (t == 0.0 || std::isinf(t)) return 0.0;
    const double s = std::sqrt(t);
    const double u_lo = std::min(std::log(s), 0.0) - 32.0;
    auto integrand = [&](double u) {
        const double x = std::exp(u);
        return rice_pdf(s / x, K) * rice_pdf(x, K) / (2.0 * s);
    };
    return detail::integrate_log_axis(integrand, s, K, u_lo);
}

/// The t with product_fading_cdf(t) = delta, by bisection in log t.
inline double fading_icdf(double delta, double K) {
    if (!(delta > 0.0) || delta > 0.5) throw DomainError("fading_icdf: delta must lie in (0, 0.5]");
    double lo = -60.0, hi = 2.0;  // natural log of t
    while (hi - lo > 1e-11) {
        const double mid = 0.5 * (lo + hi);
        if (product_fading_cdf(std::exp(mid), K) < delta) lo = mid;
        else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

/// Tabulated inverse CDF. Cubic Hermite interpolation in log-log coordinates with the
/// exact slopes d log G0 / d log delta = delta / (G0 f(G0)), clipped to keep every
/// interval monotone.
class FadingQuantileTable {
public:
    static constexpr double default_grid_min = 1e-8;
    static constexpr double default_grid_max = 0.5;
    static constexpr std::size_t default_points = 45;

    FadingQuantileTable(double K_db, std::vector<double> deltas, std::vector<double> g0s)
        : K_db_(K_db), deltas_(std::move(deltas)), g0s_(std::move(g0s)) {
        if (deltas_.size() < 4 || deltas_.size() != g0s_.size()) throw DomainError("FadingQuantileTable: need >= 4 matching points");
        for (std::size_t i = 1; i < deltas_.size(); ++i) {
            if (!(deltas_[i] > deltas_[i - 1]) || !(g0s_[i] > g0s_[i - 1]))
                throw DomainError("FadingQuantileTable: grid must be strictly increasing");
        }
        fit();
    }

    /// Log-spaced grid over [grid_min, grid_max].
    static FadingQuantileTable build(double K_db, double grid_min = default_grid_min, double grid_max = default_grid_max,
                                     std::size_t points = default_points) {
        require(grid_min > 0.0 && grid_max <= 0.5 && grid_min < grid_max && points >= 4, "FadingQuantileTable: bad grid");
        const double K = db_to_linear(K_db);
        std::vector<double> d(points), g(points);
        const double l0 = std::log(grid_min), l1 = std::log(grid_max);
        for (std::size_t i = 0; i < points; ++i) {
            d[i] = (i + 1 == points) ? grid_max : std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(points - 1));
            if (i == 0) d[i] = grid_min;
            g[i] = fading_icdf(d[i], K);
        }
        return FadingQuantileTable(K_db, std::move(d), std::move(g));
    }

    double K_db() const noexcept { return K_db_; }
    double grid_min() const noexcept { return deltas_.front(); }
    double grid_max() const noexcept { return deltas_.back(); }
    std::size_t size() const noexcept { return deltas_.size(); }
    const std::vector<double>& deltas() const noexcept { return deltas_; }
    const std::vector<double>& quantiles() const noexcept { return g0s_; }

    double operator()(double delta) const {
        if (!(delta >= grid_min()) || !(delta <= grid_max())) throw DomainError("FadingQuantileTable: delta outside the tabulated range");
        return std::exp((*interp_)(std::log(delta)));
    }

    void save(std::ostream& os) const {
        os << "# fading-quantile-table v1\n";
        os << "K_dB,grid_min,grid_max,points\n";
        os << std::setprecision(17) << K_db_ << ',' << grid_min() << ',' << grid_max() << ',' << size() << '\n';
        os << "delta,G0\n";
        for (std::size_t i = 0; i < size(); ++i) os << deltas_[i] << ',' << g0s_[i] << '\n';
    }

    /// Parses a saved table. Returns nothing when the stream is malformed.
    static std::optional<FadingQuantileTable> load(std::istream& is) {
        std::string line;
        auto next = [&]() -> bool {
            while (std::getline(is, line)) {
                if (!line.empty() && line[0] != '#') return true;
            }
            return false;
        };
        try {
            if (!next() || line != "K_dB,grid_min,grid_max,points") return std::nullopt;
            if (!next()) return std::nullopt;
            double k_db = 0.0, gmin = 0.0, gmax = 0.0;
            std::size_t n = 0;
            {
                std::istringstream ss(line);
                char c1 = 0, c2 = 0, c3 = 0;
                if (!(ss >> k_db >> c1 >> gmin >> c2 >> gmax >> c3 >> n) || c1 != ',' || c2 != ',' || c3 != ',') return std::nullopt;
            }
            if (!next() || line != "delta,G0") return std::nullopt;
            std::vector<double> d, g;
            while (next()) {
                std::istringstream ss(line);
                double a = 0.0, b = 0.0;
                char c = 0;
                if (!(ss >> a >> c >> b) || c != ',') return std::nullopt;
                d.push_back(a);
                g.push_back(b);
            }
            if (d.size() != n || d.front() != gmin || d.back() != gmax) return std::nullopt;
            return FadingQuantileTable(k_db, std::move(d), std::move(g));
        } catch (const Error&) {
            return std::nullopt;
        }
    }

    /// Loads `path` when its key matches (K_dB, grid); otherwise rebuilds and rewrites it.
    static FadingQuantileTable load_or_build(const std::string& path, double K_db, double grid_min = default_grid_min,
                                             double grid_max = default_grid_max, std::size_t points = default_points) {
        {
            std::ifstream in(path);
            if (in) {
                auto t = load(in);
                if (t && t->K_db() == K_db && t->grid_min() == grid_min && t->grid_max() == grid_max && t->size() == points) return *t;
            }
        }
        FadingQuantileTable t = build(K_db, grid_min, grid_max, points);
        std::ofstream out(path);
        if (out) t.save(out);
        return t;
    }

private:
    using Interp = boost::math::interpolators::cubic_hermite<std::vector<double>>;

    void fit() {
        const double K = db_to_linear(K_db_);
        const std::size_t n = deltas_.size();
        std::vector<double> x(n), y(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = std::log(deltas_[i]);
            y[i] = std::log(g0s_[i]);
            m[i] = deltas_[i] / (g0s_[i] * product_fading_pdf(g0s_[i], K));
        }
        // Fritsch-Carlson: (alpha, beta) inside the radius-3 disc keeps each piece monotone.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            const double a = m[i] / secant, b = m[i + 1] / secant;
            const double r = std::hypot(a, b);
            if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("FadingQuantileTable: non-monotone slopes");
            if (r > 3.0) {
                m[i] = 3.0 * a / r * secant;
                m[i + 1] = 3.0 * b / r * secant;
            }
        }
        interp_ = std::make_shared<Interp>(std::move(x), std::move(y), std::move(m));
    }

    double K_db_;
    std::vector<double> deltas_;
    std::vector<double> g0s_;
    std::shared_ptr<const Interp> interp_;
};

} // namespace risurllc
