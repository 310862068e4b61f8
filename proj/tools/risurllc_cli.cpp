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
//
// risurllc: command line front end.
//
//   risurllc decide --x 10 --y 10 [--psi 45]
//   risurllc heatmap --out results/
//   risurllc sweep --out results/ --samples 1e6
//   risurllc validate
//   risurllc quantile-table --out table.csv
//
// Exit codes: 0 success (infeasible decisions included), 1 configuration or usage
// error, 2 numerical or runtime error.

#include "risurllc/config.hpp"
#include "risurllc/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace risurllc;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> samples;
    std::optional<unsigned> workers;
    std::string out;
    std::vector<double> psi;
};

Config load_config(const Common& o) {
    Config c = o.config_path.empty() ? Config::from_json(nlohmann::json::object()) : Config::load(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.samples) {
        if (!(*o.samples >= 0.0) || std::floor(*o.samples) != *o.samples) throw ConfigError("--samples", "must be a non-negative integer");
        c.mc_samples = static_cast<std::uint64_t>(*o.samples);
    }
    if (o.workers) c.workers = *o.workers;
    if (!o.psi.empty()) c.psi_deg = o.psi;
    c.validate();
    for (const auto& w : c.warnings) std::cerr << "warning: " << w << '\n';
    return c;
}

void emit(const nlohmann::json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f = detail::open_output(out);
    f << text;
    std::cerr << "wrote " << out << '\n';
}

nlohmann::json error_record(const char* kind, const std::string& what) {
    return {{"status", "error"}, {"error", kind}, {"message", what}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conservative RIS-aided URLLC power control"};
    app.require_subcommand(1);
    Common o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON configuration (defaults reproduce the reference scenario)")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master seed for Monte Carlo streams");
        sub->add_option("--samples", o.samples, "Monte Carlo samples per estimate");
        sub->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
        sub->add_option("--out", o.out, "Output file or directory");
        sub->add_option("--psi", o.psi, "Motion angles in degrees")->delimiter(',');
    };

    double x = 10.0, y = 10.0;
    auto* decide = app.add_subcommand("decide", "Power decision for one position estimate");
    add_common(decide);
    decide->add_option("--x", x, "Estimated x [m]");
    decide->add_option("--y", y, "Estimated y [m]");

    auto* heatmap = app.add_subcommand("heatmap", "Power over the configured floor grid, one CSV per psi");
    add_common(heatmap);
    auto* sweep = app.add_subcommand("sweep", "Elevation sweep against the Monte Carlo oracle, one CSV per psi");
    add_common(sweep);
    int battery = 5;
    auto* validate = app.add_subcommand("validate", "Oracle and invariant checks on the configured scenario");
    add_common(validate);
    validate->add_option("--battery", battery, "Random beliefs per psi in the conservativeness check");
    auto* table = app.add_subcommand("quantile-table", "Build the fading quantile table");
    add_common(table);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    Config cfg;
    try {
        cfg = load_config(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (decide->parsed()) {
            // The first psi entry applies; the default list starts with 0.
            const double psi = cfg.psi_deg.front();
            try {
                const PowerController ctl = make_controller(cfg);
                const PowerDecision d = run_decision(ctl, {x, y}, psi);
                emit(decision_record(cfg, {x, y}, psi, d), o.out);
            } catch (const HorizonError& e) {
                emit(error_record("horizon", e.what()), o.out);
                return 2;
            }
            return 0;
        }
        const std::string dir = o.out.empty() ? "." : o.out;
        if (heatmap->parsed()) {
            for (const auto& f : run_heatmap(cfg, dir)) std::cerr << "wrote " << f.string() << '\n';
            return 0;
        }
        if (sweep->parsed()) {
            auto progress = [](const SweepPoint& p) {
                std::fprintf(stderr, "psi=%+g theta=%.2f gap=%.2f dB outage_pc=%.3g\n", p.psi_deg, p.theta_deg,
                             p.decision.feasible ? p.gap_db() : NAN, p.outage_pc.p_out);
            };
            for (const auto& f : run_sweep(cfg, dir, progress)) std::cerr << "wrote " << f.string() << '\n';
            return 0;
        }
        if (validate->parsed()) {
            ValidateOptions vo;
            vo.battery_beliefs = battery;
            const ValidationReport rep = run_validate(cfg, vo, [](const ValidationCheck& c) {
                std::fprintf(stderr, "%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
            });
            nlohmann::json j = rep.to_json();
            j["config_hash"] = cfg.hash();
            emit(j, o.out);
            return 0;
        }
        if (table->parsed()) {
            const std::string path = !o.out.empty() ? o.out
                                   : !cfg.quantile_table.path.empty() ? cfg.quantile_table.path
                                                                      : "fading_quantile_table.csv";
            const FadingQuantileTable t = FadingQuantileTable::build(cfg.rician_k_db, cfg.quantile_table.grid_min,
                                                                     cfg.quantile_table.grid_max,
                                                                     static_cast<std::size_t>(cfg.quantile_table.points));
            std::ofstream f = detail::open_output(path);
            t.save(f);
            std::cerr << "wrote " << path << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
