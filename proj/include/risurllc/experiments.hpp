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

// Experiment drivers behind the command line tool: single decisions, power
// heatmaps, elevation sweeps against the Monte Carlo oracle, and a validation run.
// Outputs are pure functions of the configuration.

#include "risurllc/config.hpp"
#include "risurllc/control.hpp"
#include "risurllc/montecarlo.hpp"
#include "risurllc/stats.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace risurllc {

// ----------------------------------------------------------------------------
// Formatting
// ----------------------------------------------------------------------------

namespace detail {

inline std::string fmt(const char* f, double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// "+45" / "-45" / "+0" style tag for file names.
inline std::string psi_tag(double psi_deg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "psi%+g", psi_deg);
    return buf;
}

inline std::string csv_header_comment(const Config& c, const std::string& kind, double psi_deg) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "# risurllc %s config_hash=%s seed=%llu psi_deg=%g\n", kind.c_str(), c.hash().c_str(),
                  static_cast<unsigned long long>(c.seed), psi_deg);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

} // namespace detail

/// Controller for a configuration: fading quantiles come from the cached table when
/// quantile_table.path is set, otherwise from direct inversion.
inline PowerController make_controller(const Config& c) {
    if (c.quantile_table.path.empty()) return PowerController(c.scenario());
    return PowerController(c.scenario(), FadingQuantileTable::load_or_build(c.quantile_table.path, c.rician_k_db,
                                                                            c.quantile_table.grid_min, c.quantile_table.grid_max,
                                                                            static_cast<std::size_t>(c.quantile_table.points)));
}

// ----------------------------------------------------------------------------
// Single decision
// ----------------------------------------------------------------------------

inline PowerDecision run_decision(const PowerController& ctl, Vec2 position, double psi_deg) {
    const Scenario& sc = ctl.scenario();
    return ctl.decide(sc.belief_at(position, deg_to_rad(psi_deg)));
}

/// Full decision record, dB and linear side by side.
inline nlohmann::json decision_record(const Config& c, Vec2 position, double psi_deg, const PowerDecision& d) {
    using nlohmann::json;
    json j;
    j["status"] = d.feasible ? "feasible" : "infeasible";
    j["config_hash"] = c.hash();
    j["position_m"] = {position.x, position.y};
    j["psi_deg"] = psi_deg;
    j["pointing_deg"] = {{"theta_hat", rad_to_deg(d.pointing.theta)}, {"phi_hat", rad_to_deg(d.pointing.phi)}};
    j["phase_profile_rad"] = {{"phi_x", d.profile.phi_x}, {"phi_y", d.profile.phi_y}};
    j["gamma0"] = d.gamma0;
    j["gamma0_db"] = linear_to_db(d.gamma0);
    j["fading_quantile"] = d.fading_quantile;
    j["fading_quantile_db"] = linear_to_db(d.fading_quantile);
    j["noise_power_w"] = c.noise_power_w();
    j["noise_power_dbm"] = watts_to_dbm(c.noise_power_w());
    j["probability_in_region"] = d.probability;
    j["search_iterations"] = d.iterations;
    if (d.feasible) {
        j["power_w"] = d.power;
        j["power_dbm"] = watts_to_dbm(d.power);
        j["af_gain"] = d.af_gain;
        j["af_gain_db"] = linear_to_db(d.af_gain);
        j["worst_beta"] = d.worst_beta;
        j["worst_beta_db"] = linear_to_db(d.worst_beta);
        j["worst_point_m"] = {d.worst_point.x, d.worst_point.y};
        j["region"] = {{"center_m", {d.region.center.x, d.region.center.y}},
                       {"semi_major_m", d.region.semi_major},
                       {"semi_minor_m", d.region.semi_minor},
                       {"orientation_deg", rad_to_deg(d.region.orientation)}};
    } else {
        j["power_w"] = nullptr;
        j["reason"] = "belief mass inside the widest beam is below 1 - eps";
    }
    return j;
}

// ----------------------------------------------------------------------------
// Heatmap
// ----------------------------------------------------------------------------

struct HeatmapCell {
    double x = 0.0, y = 0.0;
    bool feasible = false;
    double power = 0.0;
    double af_gain = 0.0;
    double fading_quantile = 0.0;
};

inline std::vector<HeatmapCell> heatmap_cells(const PowerController& ctl, const HeatmapGrid& g, double psi_deg) {
    std::vector<HeatmapCell> cells;
    cells.reserve(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny));
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            HeatmapCell c;
            c.x = HeatmapGrid::cell(g.x_min, g.x_max, ix, g.nx);
            c.y = HeatmapGrid::cell(g.y_min, g.y_max, iy, g.ny);
            try {
                const PowerDecision d = run_decision(ctl, {c.x, c.y}, psi_deg);
                c.feasible = d.feasible;
                c.power = d.power;
                c.af_gain = d.af_gain;
                c.fading_quantile = d.fading_quantile;
            } catch (const HorizonError&) {
                c.feasible = false;
            }
            cells.push_back(c);
        }
    }
    return cells;
}

/// Writes one CSV per psi into `out_dir`; returns the file paths.
inline std::vector<std::filesystem::path> run_heatmap(const Config& c, const std::filesystem::path& out_dir) {
    const PowerController ctl = make_controller(c);
    std::vector<std::filesystem::path> files;
    for (double psi : c.psi_deg) {
        const auto path = out_dir / ("heatmap_" + detail::psi_tag(psi) + ".csv");
        std::ofstream out = detail::open_output(path);
        out << detail::csv_header_comment(c, "heatmap", psi);
        out << "x,y,P_dBm,A0,G0_dB,feasible\n";
        for (const HeatmapCell& cell : heatmap_cells(ctl, c.heatmap, psi)) {
            out << detail::fmt("%.6f", cell.x) << ',' << detail::fmt("%.6f", cell.y) << ','
                << (cell.feasible ? detail::fmt("%.6f", watts_to_dbm(cell.power)) : "nan") << ','
                << (cell.feasible ? detail::fmt("%.6f", cell.af_gain) : "nan") << ','
                << detail::fmt("%.6f", linear_to_db(cell.fading_quantile)) << ',' << (cell.feasible ? 1 : 0) << '\n';
        }
        files.push_back(path);
    }
    return files;
}

// ----------------------------------------------------------------------------
// Elevation sweep
// ----------------------------------------------------------------------------

struct SweepPoint {
    double theta_deg = 0.0;
    double psi_deg = 0.0;
    PowerDecision decision;
    OptPowerResult opt;
    OutageEstimate outage_pc;
    OutageEstimate outage_opt;

    double gap_db() const { return linear_to_db(decision.power / opt.power); }
};

/// Floor point seen from the RIS at elevation theta, azimuth phi.
inline Vec2 floor_point(double theta, double phi, double h) {
    const double r = h * std::tan(theta);
    return {r * std::cos(phi), r * std::sin(phi)};
}

/// One sweep point. The Monte Carlo streams are derived from (psi, theta) so each
/// point is independent and does not depend on which other points run.
inline SweepPoint run_sweep_point(const PowerController& ctl, const McConfig& mc, double theta_deg, double phi_hat_deg,
                                  double psi_deg) {
    const Scenario& sc = ctl.scenario();
    SweepPoint p;
    p.theta_deg = theta_deg;
    p.psi_deg = psi_deg;
    const Vec2 m = floor_point(deg_to_rad(theta_deg), deg_to_rad(phi_hat_deg), sc.h);
    const PositionBelief b = sc.belief_at(m, deg_to_rad(psi_deg));
    p.decision = ctl.decide(b);
    char label[96];
    std::snprintf(label, sizeof label, "sweep/psi=%.9g/theta=%.9g/phi=%.9g", psi_deg, theta_deg, phi_hat_deg);
    const McConfig pm = mc.derive(label);
    const SnrKernel kernel(sc, b, p.decision.pointing);
    p.opt = opt_power_detail(kernel, sc.req, pm);
    std::vector<double> powers{p.opt.power};
    if (p.decision.feasible) powers.push_back(p.decision.power);
    const auto est = outage_estimates(kernel, sc.req, powers, pm, Domain::outage);
    p.outage_opt = est[0];
    if (p.decision.feasible) p.outage_pc = est[1];
    return p;
}

inline std::vector<SweepPoint> sweep_points(const PowerController& ctl, const McConfig& mc, const SweepGrid& g,
                                            double psi_deg, const std::function<void(const SweepPoint&)>& on_point = {}) {
    std::vector<SweepPoint> pts;
    for (int i = 0; i < g.points; ++i) {
        pts.push_back(run_sweep_point(ctl, mc, g.theta_deg(i), g.phi_hat_deg, psi_deg));
        if (on_point) on_point(pts.back());
    }
    return pts;
}

inline std::vector<std::filesystem::path> run_sweep(const Config& c, const std::filesystem::path& out_dir,
                                                    const std::function<void(const SweepPoint&)>& on_point = {}) {
    const PowerController ctl = make_controller(c);
    std::vector<std::filesystem::path> files;
    for (double psi : c.psi_deg) {
        const auto path = out_dir / ("sweep_" + detail::psi_tag(psi) + ".csv");
        std::ofstream out = detail::open_output(path);
        out << detail::csv_header_comment(c, "sweep", psi);
        out << "theta_hat_deg,P_pc_dBm,P_opt_dBm,gap_dB,outage_pc,outage_ci,outage_opt\n";
        for (const SweepPoint& p : sweep_points(ctl, c.mc(), c.sweep, psi, on_point)) {
            const bool ok = p.decision.feasible;
            out << detail::fmt("%.6f", p.theta_deg) << ',' << (ok ? detail::fmt("%.6f", watts_to_dbm(p.decision.power)) : "nan")
                << ',' << detail::fmt("%.6f", watts_to_dbm(p.opt.power)) << ',' << (ok ? detail::fmt("%.6f", p.gap_db()) : "nan")
                << ',' << (ok ? detail::fmt("%.6e", p.outage_pc.p_out) : "nan") << ','
                << (ok ? detail::fmt("%.6e", p.outage_pc.ci_halfwidth) : "nan") << ',' << detail::fmt("%.6e", p.outage_opt.p_out)
                << '\n';
        }
        files.push_back(path);
    }
    return files;
}

// ----------------------------------------------------------------------------
// Validation run
// ----------------------------------------------------------------------------

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["passed"] = all_passed();
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        return j;
    }
};

struct ValidateOptions {
    int battery_beliefs = 5;  // random beliefs per psi in the conservativeness battery
};

/// Oracle and invariant battery on the configured scenario. Failures become report
/// entries; only configuration errors throw.
inline ValidationReport run_validate(const Config& c, const ValidateOptions& opt = {},
                                     const std::function<void(const ValidationCheck&)>& on_check = {}) {
    ValidationReport rep;
    const Scenario sc = c.scenario();
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.checks.push_back({std::move(name), ok, std::move(detail)});
        if (on_check) on_check(rep.checks.back());
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            add(name, false, std::string("exception: ") + e.what());
        }
    };
    char buf[256];

    guarded("rotation_orthonormal", [&] {
        double worst = 0.0;
        for (double t = 0.0; t < 1.5; t += 0.1)
            for (double p = 0.0; p < two_pi; p += 0.3) {
                const Rotation3 r = rotation_matrix(t, p);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double s = 0.0;
                        for (int k = 0; k < 3; ++k) s += r(k, i) * r(k, j);
                        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
                    }
            }
        std::snprintf(buf, sizeof buf, "max |R^T R - I| = %.3g (tolerance 1e-12)", worst);
        add("rotation_orthonormal", worst <= 1e-12, buf);
    });

    guarded("footprint_reference", [&] {
        // Published footprints at h = 25 m, theta = pi/6, phi = pi/4, N = 100, d = lambda/2.
        struct Ref { double a0, c, a, b; };
        const Ref refs[2] = {{0.9, 10.2269, 1.2988, 0.9737}, {0.1, 10.6034, 5.7221, 4.2606}};
        const RisGeometry g{100, 0.333 / 2.0, 0.333};
        double worst = 0.0;
        for (const Ref& r : refs) {
            const Ellipse2D e = illuminated_region(r.a0, {pi / 6.0, pi / 4.0}, g, 25.0);
            worst = std::max({worst, std::abs(e.center.x / r.c - 1.0), std::abs(e.center.y / r.c - 1.0),
                              std::abs(e.semi_major / r.a - 1.0), std::abs(e.semi_minor / r.b - 1.0)});
        }
        std::snprintf(buf, sizeof buf, "worst relative deviation %.4f (tolerance 0.02)", worst);
        add("footprint_reference", worst <= 0.02, buf);
    });

    guarded("af_closed_form", [&] {
        std::mt19937_64 gen(c.seed);
        std::uniform_real_distribution<double> th(0.0, 1.5), ph(0.0, two_pi);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Pointing p{th(gen), ph(gen)};
            const Spherical bs{8.0, th(gen), ph(gen)};
            const Spherical ue{25.0, th(gen), ph(gen)};
            worst = std::max(worst, std::abs(af_gain_direct(phase_profile(p, bs, sc.ris), ue, bs, sc.ris) - af_gain_closed(p, ue, sc.ris)));
        }
        std::snprintf(buf, sizeof buf, "max |direct - closed| = %.3g over 1000 directions (tolerance 1e-10)", worst);
        add("af_closed_form", worst <= 1e-10, buf);
    });

    guarded("ellipse_rayleigh", [&] {
        const PositionBelief b{{2.0, 1.0}, covariance_from_motion(c.sigma_u_m, 0.0)};
        Ellipse2D e;
        e.center = {2.0, 1.0};
        e.semi_major = e.semi_minor = 1.5 * c.sigma_u_m;
        const double err = std::abs(ellipse_probability(b, e) - (-std::expm1(-0.5 * 1.5 * 1.5)));
        std::snprintf(buf, sizeof buf, "error %.3g against 1 - exp(-r^2 / 2) (tolerance 1e-9)", err);
        add("ellipse_rayleigh", err <= 1e-9, buf);
    });

    guarded("ellipse_vs_sampling", [&] {
        const StreamSpec s = stream(c.seed, Domain::oracle).derive("validate/ellipse");
        std::mt19937_64 gen(c.seed + 1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const PositionBelief b{{0.0, 0.0}, covariance_from_motion(c.sigma_u_m, pi / 4.0)};
        const std::uint64_t n = 1'000'000;
        double worst_z = 0.0;
        for (int k = 0; k < 10; ++k) {
            Ellipse2D e;
            e.center = {c.sigma_u_m * u(gen), c.sigma_u_m * u(gen)};
            e.semi_major = c.sigma_u_m * (1.0 + 0.5 * u(gen));
            e.semi_minor = e.semi_major * (0.6 + 0.3 * u(gen));
            e.orientation = 1.5 * u(gen);
            const double p = ellipse_probability(b, e);
            std::uint64_t hits = 0;
            for (std::uint64_t i = 0; i < n; ++i) {
                SampleRng r = s.derive(std::to_string(k)).at(i);
                hits += e.contains(sample_position(b, r)) ? 1u : 0u;
            }
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            worst_z = std::max(worst_z, std::abs(static_cast<double>(hits) / static_cast<double>(n) - p) / sigma);
        }
        std::snprintf(buf, sizeof buf, "worst |z| = %.2f over 10 ellipses, 1e6 samples each (tolerance 3.5)", worst_z);
        add("ellipse_vs_sampling", worst_z <= 3.5, buf);
    });

    guarded("fading_quantile", [&] {
        const double delta = sc.req.delta;
        const double g0 = fading_icdf(delta, sc.link.K);
        const double err = std::abs(product_fading_cdf(g0, sc.link.K) / delta - 1.0);
        std::snprintf(buf, sizeof buf, "G0 = %.6e, relative CDF error %.3g (tolerance 1e-3)", g0, err);
        add("fading_quantile", err <= 1e-3, buf);
    });

    guarded("search_iterations", [&] {
        const PositionBelief b = sc.belief_at(floor_point(pi / 6.0, pi / 4.0, sc.h));
        const AfSearchResult r = reliable_af_gain(b, sc.pointing_at(b.mean()), sc.ris, sc.h, sc.req.eps, sc.search);
        std::snprintf(buf, sizeof buf, "feasible=%d A0=%.5f iterations=%d", r.feasible ? 1 : 0, r.a0, r.iterations);
        const int bound = static_cast<int>(std::ceil(std::log2((1.0 - sc.search.nu - sc.search.a_min) / sc.search.nu)));
        add("search_iterations", r.feasible && r.iterations <= bound, buf);
    });

    guarded("conservativeness", [&] {
        const PowerController ctl = make_controller(c);
        std::mt19937_64 gen(c.seed + 2);
        std::uniform_real_distribution<double> pos(0.0, c.room_side_m);
        const McConfig mc = c.mc();
        int runs = 0, fails = 0, infeasible = 0;
        double worst = 0.0;
        for (double psi : c.psi_deg) {
            for (int k = 0; k < opt.battery_beliefs; ++k) {
                const Vec2 m{pos(gen), pos(gen)};
                const PositionBelief b = sc.belief_at(m, deg_to_rad(psi));
                const PowerDecision d = ctl.decide(b);
                if (!d.feasible) {
                    ++infeasible;
                    continue;
                }
                char label[64];
                std::snprintf(label, sizeof label, "validate/battery/%d/%g", k, psi);
                const OutageEstimate e = outage_estimate(sc, b, sc.req, d.power, mc.derive(label), Domain::outage);
                ++runs;
                worst = std::max(worst, e.p_out);
                if (e.p_out > sc.req.outage_target() + e.ci_halfwidth) ++fails;
            }
        }
        std::snprintf(buf, sizeof buf, "%d feasible runs (%d infeasible), worst outage %.3e vs target %.1e, %d above target + CI",
                      runs, infeasible, worst, sc.req.outage_target(), fails);
        add("conservativeness", fails == 0 && runs > 0, buf);
    });
    return rep;
}

} // namespace risurllc
