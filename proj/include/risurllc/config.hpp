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

// Run configuration: a JSON document in user units (m, dB, dBm, ms, degrees) with
// built-in defaults for the reference indoor scenario. An empty document is valid.

#include "risurllc/channel.hpp"
#include "risurllc/control.hpp"
#include "risurllc/core.hpp"
#include "risurllc/montecarlo.hpp"
#include "risurllc/rng.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace risurllc {

struct HeatmapGrid {
    double x_min = 0.0, x_max = 15.0;
    double y_min = 0.0, y_max = 15.0;
    int nx = 60, ny = 60;

    /// Cell-center coordinate i of n over [lo, hi].
    static double cell(double lo, double hi, int i, int n) {
        return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
};

struct SweepGrid {
    double theta_min_deg = 0.0;
    double theta_max_deg = 40.0;
    int points = 43;
    double phi_hat_deg = 45.0;

    double theta_deg(int i) const {
        if (points == 1) return theta_min_deg;
        return theta_min_deg + (theta_max_deg - theta_min_deg) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
};

struct TableSpec {
    std::string path;  // empty: build in memory when needed
    double grid_min = FadingQuantileTable::default_grid_min;
    double grid_max = FadingQuantileTable::default_grid_max;
    int points = static_cast<int>(FadingQuantileTable::default_points);
};

struct Config {
    // scenario
    double room_side_m = 15.0;
    double ceiling_height_m = 25.0;
    std::array<double, 3> bs_position_m{-5.0, -5.0, 5.0};
    std::uint64_t n_elements = 100;
    double wavelength_m = 0.333;
    double spacing_wavelengths = 0.5;
    double sigma_u_m = 0.3;
    // link
    double beta0_db = -31.53;
    double d0_m = 1.0;
    double path_loss_exponent = 2.0;
    double antenna_gain_db = 12.85;
    double rician_k_db = 6.0;
    std::string noise_model = "thermal";  // "thermal" or "fixed"
    double noise_figure_db = 0.0;
    double noise_power_dbm = -118.437;  // used by "fixed"; thermal noise over 360 kHz
    // requirement
    double payload_bits = 256.0;
    double bandwidth_hz = 360e3;
    double deadline_ms = 0.5;
    double p_s = 1.0 - 1e-5;
    double delta_fraction = 0.9;
    // algorithm
    double a_min = 0.1;
    double nu = 0.028125;
    // experiments
    std::vector<double> psi_deg{0.0, 45.0, -45.0};
    HeatmapGrid heatmap;
    SweepGrid sweep;
    std::uint64_t mc_samples = 10'000'000;
    std::uint64_t seed = 0x5EED5EEDull;
    unsigned workers = 1;
    TableSpec quantile_table;

    std::vector<std::string> warnings;  // non-fatal findings from validate()

    double noise_power_w() const {
        return noise_model == "thermal" ? thermal_noise_power(bandwidth_hz, noise_figure_db) : dbm_to_watts(noise_power_dbm);
    }

    UrllcRequirement requirement() const {
        return UrllcRequirement::with_split(payload_bits, bandwidth_hz, deadline_ms * 1e-3, p_s, delta_fraction);
    }

    SearchConfig search() const { return {a_min, nu}; }

    Scenario scenario() const {
        Scenario s;
        s.room_side = room_side_m;
        s.h = ceiling_height_m;
        s.bs = {bs_position_m[0], bs_position_m[1], bs_position_m[2]};
        s.ris = RisGeometry(static_cast<std::size_t>(n_elements), spacing_wavelengths * wavelength_m, wavelength_m);
        s.sigma_u = sigma_u_m;
        s.link = LinkBudget{db_to_linear(beta0_db), d0_m, path_loss_exponent, db_to_linear(antenna_gain_db), noise_power_w(),
                            db_to_linear(rician_k_db)};
        s.req = requirement();
        s.search = search();
        return s;
    }

    McConfig mc() const { return {mc_samples, seed, workers}; }

    /// Checks every field and fills `warnings`. Throws ConfigError naming the first bad field.
    void validate();

    nlohmann::json to_json() const;
    /// FNV-1a over the canonical dump of the resolved configuration. Fields that cannot
    /// change results (worker count, cache path) are left out.
    std::string hash() const {
        nlohmann::json j = to_json();
        j["monte_carlo"].erase("workers");
        j["quantile_table"].erase("path");
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
        return buf;
    }

    static Config from_json(const nlohmann::json& j);
    static Config load(const std::string& path);
};

namespace detail {

/// One JSON object with a fixed key set; unknown keys are rejected.
class ConfigSection {
public:
    ConfigSection(const nlohmann::json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
        for (const auto& item : j_.items()) {
            if (!allowed.count(item.key())) throw ConfigError(field(item.key()), "unknown key");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const char* key) const { return j_.contains(key); }
    const nlohmann::json& at(const char* key) const { return j_.at(key); }

    void number(const char* key, double& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        out = v.get<double>();
    }
    void integer(const char* key, std::uint64_t& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (v.is_number_integer() && (v.is_number_unsigned() || v.get<std::int64_t>() >= 0)) {
            out = v.get<std::uint64_t>();
            return;
        }
        // 1e7 style literals are accepted when they are exact non-negative integers.
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) {
                out = static_cast<std::uint64_t>(d);
                return;
            }
        }
        throw ConfigError(field(key), "expected a non-negative integer");
    }
    template <class Int>
    void small_integer(const char* key, Int& out) const {
        std::uint64_t v = static_cast<std::uint64_t>(out);
        integer(key, v);
        if (v > 1'000'000'000ull) throw ConfigError(field(key), "value too large");
        out = static_cast<Int>(v);
    }
    void string(const char* key, std::string& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        out = v.get<std::string>();
    }
    void numbers(const char* key, std::vector<double>& out) const {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
};

inline void check(bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
}

} // namespace detail

inline Config Config::from_json(const nlohmann::json& j) {
    using detail::ConfigSection;
    Config c;
    const ConfigSection root(j, "", {"scenario", "link", "requirement", "algorithm", "psi_deg", "heatmap", "sweep",
                                     "monte_carlo", "quantile_table"});
    root.numbers("psi_deg", c.psi_deg);
    if (root.has("scenario")) {
        const ConfigSection s(root.at("scenario"), "scenario",
                              {"room_side_m", "ceiling_height_m", "bs_position_m", "n_elements", "wavelength_m",
                               "spacing_wavelengths", "sigma_u_m"});
        s.number("room_side_m", c.room_side_m);
        s.number("ceiling_height_m", c.ceiling_height_m);
        if (s.has("bs_position_m")) {
            std::vector<double> v;
            s.numbers("bs_position_m", v);
            if (v.size() != 3) throw ConfigError("scenario.bs_position_m", "expected [x, y, z]");
            c.bs_position_m = {v[0], v[1], v[2]};
        }
        s.integer("n_elements", c.n_elements);
        s.number("wavelength_m", c.wavelength_m);
        s.number("spacing_wavelengths", c.spacing_wavelengths);
        s.number("sigma_u_m", c.sigma_u_m);
    }
    if (root.has("link")) {
        const ConfigSection s(root.at("link"), "link",
                              {"beta0_db", "d0_m", "path_loss_exponent", "antenna_gain_db", "rician_k_db", "noise_model",
                               "noise_figure_db", "noise_power_dbm"});
        s.number("beta0_db", c.beta0_db);
        s.number("d0_m", c.d0_m);
        s.number("path_loss_exponent", c.path_loss_exponent);
        s.number("antenna_gain_db", c.antenna_gain_db);
        s.number("rician_k_db", c.rician_k_db);
        s.string("noise_model", c.noise_model);
        s.number("noise_figure_db", c.noise_figure_db);
        s.number("noise_power_dbm", c.noise_power_dbm);
        // An explicit noise power without a model selects the fixed model.
        if (s.has("noise_power_dbm") && !s.has("noise_model")) c.noise_model = "fixed";
    }
    if (root.has("requirement")) {
        const ConfigSection s(root.at("requirement"), "requirement",
                              {"payload_bits", "bandwidth_hz", "deadline_ms", "p_s", "delta_fraction"});
        s.number("payload_bits", c.payload_bits);
        s.number("bandwidth_hz", c.bandwidth_hz);
        s.number("deadline_ms", c.deadline_ms);
        s.number("p_s", c.p_s);
        s.number("delta_fraction", c.delta_fraction);
    }
    if (root.has("algorithm")) {
        const ConfigSection s(root.at("algorithm"), "algorithm", {"a_min", "nu"});
        s.number("a_min", c.a_min);
        s.number("nu", c.nu);
    }
    if (root.has("heatmap")) {
        const ConfigSection s(root.at("heatmap"), "heatmap", {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
        s.number("x_min", c.heatmap.x_min);
        s.number("x_max", c.heatmap.x_max);
        s.number("y_min", c.heatmap.y_min);
        s.number("y_max", c.heatmap.y_max);
        s.small_integer("nx", c.heatmap.nx);
        s.small_integer("ny", c.heatmap.ny);
    }
    if (root.has("sweep")) {
        const ConfigSection s(root.at("sweep"), "sweep", {"theta_min_deg", "theta_max_deg", "points", "phi_hat_deg"});
        s.number("theta_min_deg", c.sweep.theta_min_deg);
        s.number("theta_max_deg", c.sweep.theta_max_deg);
        s.small_integer("points", c.sweep.points);
        s.number("phi_hat_deg", c.sweep.phi_hat_deg);
    }
    if (root.has("monte_carlo")) {
        const ConfigSection s(root.at("monte_carlo"), "monte_carlo", {"samples", "seed", "workers"});
        s.integer("samples", c.mc_samples);
        s.integer("seed", c.seed);
        s.small_integer("workers", c.workers);
    }
    if (root.has("quantile_table")) {
        const ConfigSection s(root.at("quantile_table"), "quantile_table", {"path", "grid_min", "grid_max", "points"});
        s.string("path", c.quantile_table.path);
        s.number("grid_min", c.quantile_table.grid_min);
        s.number("grid_max", c.quantile_table.grid_max);
        s.small_integer("points", c.quantile_table.points);
    }
    c.validate();
    return c;
}

inline Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
    return from_json(j);
}

inline void Config::validate() {
    using detail::check;
    warnings.clear();
    check(room_side_m > 0.0, "scenario.room_side_m", "must be positive");
    check(ceiling_height_m > 0.0, "scenario.ceiling_height_m", "must be positive");
    for (double v : bs_position_m) check(std::isfinite(v), "scenario.bs_position_m", "must be finite");
    check(std::hypot(bs_position_m[0], bs_position_m[1], bs_position_m[2]) > 0.0, "scenario.bs_position_m",
          "must differ from the RIS position");
    check(n_elements >= 1, "scenario.n_elements", "must be positive");
    {
        const auto side = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(n_elements))));
        check(side * side == n_elements, "scenario.n_elements", "must be a perfect square");
    }
    check(wavelength_m > 0.0, "scenario.wavelength_m", "must be positive");
    check(spacing_wavelengths > 0.0 && spacing_wavelengths < 1.0, "scenario.spacing_wavelengths", "must lie in (0, 1)");
    check(sigma_u_m > 0.0, "scenario.sigma_u_m", "must be positive");
    check(std::isfinite(beta0_db), "link.beta0_db", "must be finite");
    check(d0_m > 0.0, "link.d0_m", "must be positive");
    check(path_loss_exponent > 0.0, "link.path_loss_exponent", "must be positive");
    check(std::isfinite(antenna_gain_db), "link.antenna_gain_db", "must be finite");
    check(std::isfinite(rician_k_db) && rician_k_db < 60.0, "link.rician_k_db", "must be finite and below 60 dB");
    check(noise_model == "thermal" || noise_model == "fixed", "link.noise_model", "must be \"thermal\" or \"fixed\"");
    check(std::isfinite(noise_figure_db) && noise_figure_db >= 0.0, "link.noise_figure_db", "must be non-negative");
    check(std::isfinite(noise_power_dbm), "link.noise_power_dbm", "must be finite");
    check(payload_bits > 0.0, "requirement.payload_bits", "must be positive");
    check(bandwidth_hz > 0.0, "requirement.bandwidth_hz", "must be positive");
    check(deadline_ms > 0.0, "requirement.deadline_ms", "must be positive");
    check(p_s > 0.0 && p_s < 1.0, "requirement.p_s", "must lie in (0, 1)");
    check(delta_fraction > 0.0 && delta_fraction < 1.0, "requirement.delta_fraction", "must lie in (0, 1)");
    check(nu > 0.0, "algorithm.nu", "must be positive");
    check(a_min > 0.0 && a_min < 1.0 - nu, "algorithm.a_min", "must lie in (0, 1 - nu)");
    for (double p : psi_deg) check(std::abs(p) < 90.0, "psi_deg", "every entry must lie in (-90, 90)");
    check(!psi_deg.empty(), "psi_deg", "must not be empty");
    check(heatmap.x_max > heatmap.x_min, "heatmap.x_max", "must exceed x_min");
    check(heatmap.y_max > heatmap.y_min, "heatmap.y_max", "must exceed y_min");
    check(heatmap.nx >= 1, "heatmap.nx", "must be positive");
    check(heatmap.ny >= 1, "heatmap.ny", "must be positive");
    check(sweep.points >= 1, "sweep.points", "must be positive");
    check(sweep.theta_min_deg >= 0.0, "sweep.theta_min_deg", "must be non-negative");
    check(sweep.theta_max_deg >= sweep.theta_min_deg && sweep.theta_max_deg < 90.0, "sweep.theta_max_deg",
          "must lie in [theta_min_deg, 90)");
    check(std::isfinite(sweep.phi_hat_deg), "sweep.phi_hat_deg", "must be finite");
    check(mc_samples >= 1000, "monte_carlo.samples", "must be at least 1000");
    check(workers >= 1 && workers <= 1024, "monte_carlo.workers", "must lie in [1, 1024]");
    check(quantile_table.grid_min > 0.0, "quantile_table.grid_min", "must be positive");
    check(quantile_table.grid_max > quantile_table.grid_min && quantile_table.grid_max < 1.0, "quantile_table.grid_max",
          "must lie in (grid_min, 1)");
    check(quantile_table.points >= 2, "quantile_table.points", "must be at least 2");
    try {
        requirement().validate();
    } catch (const ConfigError& e) {
        throw ConfigError("requirement." + e.field(), e.what());
    }
    const double delta = delta_fraction * (1.0 - p_s);
    check(delta >= quantile_table.grid_min && delta <= quantile_table.grid_max, "quantile_table.grid_min",
          "grid must cover the fading share of the outage budget");
    const RisGeometry g(static_cast<std::size_t>(n_elements), spacing_wavelengths * wavelength_m, wavelength_m);
    if (!g.is_far_field(ceiling_height_m)) {
        warnings.push_back("ceiling height " + std::to_string(ceiling_height_m) + " m is inside the Fraunhofer distance " +
                           std::to_string(g.fraunhofer_distance()) + " m; the far-field model may be inaccurate");
    }
    if ((1.0 - p_s) * static_cast<double>(mc_samples) < 30.0) {
        warnings.push_back("monte_carlo.samples too small to resolve the (1 - p_s) quantile; sweeps will fail");
    }
}

inline nlohmann::json Config::to_json() const {
    nlohmann::json j;
    j["scenario"] = {{"room_side_m", room_side_m},
                     {"ceiling_height_m", ceiling_height_m},
                     {"bs_position_m", bs_position_m},
                     {"n_elements", n_elements},
                     {"wavelength_m", wavelength_m},
                     {"spacing_wavelengths", spacing_wavelengths},
                     {"sigma_u_m", sigma_u_m}};
    j["link"] = {{"beta0_db", beta0_db},
                 {"d0_m", d0_m},
                 {"path_loss_exponent", path_loss_exponent},
                 {"antenna_gain_db", antenna_gain_db},
                 {"rician_k_db", rician_k_db},
                 {"noise_model", noise_model},
                 {"noise_figure_db", noise_figure_db},
                 {"noise_power_dbm", noise_power_dbm}};
    j["requirement"] = {{"payload_bits", payload_bits},
                        {"bandwidth_hz", bandwidth_hz},
                        {"deadline_ms", deadline_ms},
                        {"p_s", p_s},
                        {"delta_fraction", delta_fraction}};
    j["algorithm"] = {{"a_min", a_min}, {"nu", nu}};
    j["psi_deg"] = psi_deg;
    j["heatmap"] = {{"x_min", heatmap.x_min}, {"x_max", heatmap.x_max}, {"y_min", heatmap.y_min},
                    {"y_max", heatmap.y_max}, {"nx", heatmap.nx},       {"ny", heatmap.ny}};
    j["sweep"] = {{"theta_min_deg", sweep.theta_min_deg},
                  {"theta_max_deg", sweep.theta_max_deg},
                  {"points", sweep.points},
                  {"phi_hat_deg", sweep.phi_hat_deg}};
    j["monte_carlo"] = {{"samples", mc_samples}, {"seed", seed}, {"workers", workers}};
    j["quantile_table"] = {{"path", quantile_table.path},
                           {"grid_min", quantile_table.grid_min},
                           {"grid_max", quantile_table.grid_max},
                           {"points", quantile_table.points}};
    return j;
}

} // namespace risurllc
