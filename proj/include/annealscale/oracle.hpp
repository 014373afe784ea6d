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

#pragma once

// Side-by-side evaluation of one noisy anneal by the BdG evolver and by dense
// exact diagonalization, on identical noise signals.

#include <cstddef>

#include "annealscale/ensemble.hpp"

namespace annealscale {

struct OracleComparison {
    std::size_t L = 0;
    double T = 0.0;
    std::size_t realization = 0;
    double residual_bdg = 0.0;
    double residual_exact = 0.0;
    double s_probe = 0.0;  // where the ground energies were compared
    double ground_bdg = 0.0;
    double ground_exact = 0.0;

    double residual_gap() const;
    double ground_gap() const;
};

/// Anneal of duration T for realization r of `plan`; the ground energies are
/// compared at s_probe, t = s_probe * T with the same noise.
OracleComparison compare_with_exact(std::size_t L, double T, std::size_t r, const SweepPlan& plan,
                                    double s_probe = 0.5);

}  // namespace annealscale
