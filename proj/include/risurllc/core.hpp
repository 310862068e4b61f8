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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace risurllc {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The beam cone reaches the horizon, so its floor footprint is unbounded.
class HorizonError : public Error {
public:
    HorizonError(double theta_hat, double delta_theta)
        : Error("beam cone grazes the horizon: theta_hat=" + std::to_string(theta_hat) +
                " rad, delta_theta=" + std::to_string(delta_theta) + " rad"),
          theta_hat_(theta_hat), delta_theta_(delta_theta) {}

    double theta_hat() const noexcept { return theta_hat_; }
    double delta_theta() const noexcept { return delta_theta_; }

private:
    double theta_hat_;
    double delta_theta_;
};

/// The requested AF gain cannot be reached because the beam would be wider than the aperture allows.
class BeamTooWideError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value; carries the offending field path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// ----------------------------------------------------------------------------
// Units
// ----------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Wraps an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
    double w = std::fmod(a, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

inline void require(bool cond, const char* what) {
    if (!cond) throw DomainError(what);
}

} // namespace risurllc
