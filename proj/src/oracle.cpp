// Copyright 2026 The annealscale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "annealscale/oracle.hpp"

#include <cmath>

#include "annealscale/bdg.hpp"
#include "annealscale/ed.hpp"
#include "annealscale/error.hpp"

namespace annealscale {

double OracleComparison::residual_gap() const { return std::abs(residual_bdg - residual_exact); }
double OracleComparison::ground_gap() const { return std::abs(ground_bdg - ground_exact); }

OracleComparison compare_with_exact(std::size_t L, double T, std::size_t r, const SweepPlan& plan,
                                    double s_probe) {
    if (L > ed::max_sites) throw CapacityError("exact comparison is limited to small chains");
    if (!(T > 0.0)) throw ParameterError("annealing time must be positive");
    if (!(s_probe >= 0.0 && s_probe <= 1.0)) throw ParameterError("s_probe must lie in [0, 1]");
    OracleComparison out;
    out.L = L;
    out.T = T;
    out.realization = r;
    out.s_probe = s_probe;

    const double v = 1.0 / T;
    const ChainSpec chain = realization_chain(L, v, r, plan);
    out.residual_bdg = run_realization(L, v, r, plan);
    const auto psi = ed::evolve_exact(ed::ground_state(chain, 0.0, 0.0).state, chain, T);
    out.residual_exact = ed::classical_stats(psi).residual_energy;

    const double t_probe = s_probe * T;
    out.ground_bdg = ground_energy(chain, s_probe, t_probe);
    out.ground_exact = ed::ground_state(chain, s_probe, t_probe).energy;
    return out;
}

}  // namespace annealscale
