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

#include "annealscale/ode.hpp"

namespace annealscale {

void StepperOptions::validate() const {
    if (!(rtol > 0.0) || !(atol >= 0.0)) {
        throw ParameterError("integrator tolerances must be positive");
    }
    if (initial_step < 0.0 || max_step < 0.0 || !(min_step > 0.0)) {
        throw ParameterError("integrator step bounds must be non-negative");
    }
}

void throw_step_underflow(double t, double h, double err) {
    std::ostringstream msg;
    msg << "step size underflow at t=" << t << " (h=" << h << ", last error estimate=" << err
        << ")";
    throw IntegrationError(msg.str(), t, err);
}

}  // namespace annealscale
