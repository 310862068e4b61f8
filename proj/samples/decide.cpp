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
// Minimal library use: one power decision for a tracked UE, then a Monte Carlo
// check of its outage.

#include "risurllc/control.hpp"
#include "risurllc/montecarlo.hpp"

#include <cstdio>

int main() {
    using namespace risurllc;
    const Scenario sc;  // reference indoor scenario
    const PowerController ctl{sc};

    // Tracker output: estimate (10, 10) m, moving along 45 degrees.
    const PositionBelief belief = sc.belief_at({10.0, 10.0}, deg_to_rad(45.0));
    const PowerDecision d = ctl.decide(belief);
    if (!d.feasible) {
        std::printf("infeasible: only %.6f of the belief fits the widest beam\n", d.probability);
        return 0;
    }
    std::printf("P = %.3f dBm  A0 = %.4f  G0 = %.2f dB  worst beta = %.2f dB\n", watts_to_dbm(d.power), d.af_gain,
                linear_to_db(d.fading_quantile), linear_to_db(d.worst_beta));

    McConfig mc;
    mc.n_samples = 2'000'000;
    const OutageEstimate e = outage_estimate(sc, belief, sc.req, d.power, mc);
    std::printf("outage at P: %.2e (95%% CI [%.2e, %.2e]), target %.0e\n", e.p_out, e.ci_low, e.ci_high,
                sc.req.outage_target());
    return 0;
}
