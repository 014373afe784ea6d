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

#include <cmath>
#include <memory>

#include "annealscale/ed.hpp"
#include "annealscale/error.hpp"
#include "catch2/catch.hpp"

namespace annealscale {

TEST_CASE("dense Hamiltonian") {
    GIVEN("a single classical bond") {
        ChainSpec chain(2);
        const auto H = ed::build_hamiltonian(chain, 1.0, 0.0);
        THEN("it is diagonal with the bond energies") {
            CHECK(H.isDiagonal(1e-15));
            CHECK(H(0, 0) == -1.0);  // up up
            CHECK(H(1, 1) == 1.0);   // down up (site 0 flipped)
            CHECK(H(2, 2) == 1.0);
            CHECK(H(3, 3) == -1.0);
        }
    }
    GIVEN("two spins in a unit field") {
        ChainSpec chain(2);
        THEN("the ground energy is -2") {
            CHECK(ed::ground_state(chain, 0.0, 0.0).energy == Approx(-2.0).epsilon(1e-14));
        }
    }
    GIVEN("a noisy chain") {
        ChainSpec chain(5);
        NoiseSpectrum spec;
        spec.n_modes = 10;
        chain.attach_noise(1, std::make_shared<NoiseSignal>(sample_signal(spec, 3)), 0.2);
        const auto H = ed::build_hamiltonian(chain, 0.4, 2.0);
        THEN("it is symmetric and agrees with the matrix-free product") {
            CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
            Eigen::VectorXcd v = Eigen::VectorXcd::Random(32);
            Eigen::VectorXcd w;
            ed::apply_hamiltonian(chain, 0.4, 2.0, v, w);
            CHECK((H.cast<std::complex<double>>() * v - w).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
    GIVEN("too many sites") {
        ChainSpec chain(13);
        THEN("construction is refused") {
            CHECK_THROWS_AS(ed::build_hamiltonian(chain, 0.5, 0.0), CapacityError);
        }
    }
}

TEST_CASE("classical statistics") {
    CHECK(ed::classical_stats(ed::all_up(4)).residual_energy == 0.0);
    CHECK(ed::classical_stats(ed::all_up(4)).magnetization_deficit == 0.0);

    const auto x = ed::classical_stats(ed::x_polarized(2));
    CHECK(x.residual_energy == Approx(1.0).epsilon(1e-15));
    CHECK(x.magnetization_deficit == Approx(1.0).epsilon(1e-15));

    ed::DenseState cat = ed::all_up(3);
    cat.amplitudes(0) = std::sqrt(0.5);
    cat.amplitudes(7) = std::sqrt(0.5);
    CHECK(ed::classical_stats(cat).magnetization_deficit == Approx(0.0).margin(1e-15));
    CHECK(ed::classical_stats(cat).residual_energy == Approx(0.0).margin(1e-15));
}

TEST_CASE("exact Schrodinger evolution") {
    GIVEN("an eigenstate of a frozen Hamiltonian") {
        Schedule frozen;
        frozen.frozen_s = 0.4;
        ChainSpec chain(6, frozen);
        const auto ground = ed::ground_state(chain, 0.4, 0.0);
        const auto out = ed::evolve_exact(ground.state, chain, 10.0);
        THEN("only the phase changes") {
            CHECK(std::abs(ground.state.amplitudes.dot(out.amplitudes)) == Approx(1.0).margin(1e-8));
            CHECK(std::abs(out.norm() - 1.0) < 1e-8);
        }
        THEN("its energy variance vanishes") {
            CHECK(std::abs(ed::energy_variance(ground.state, chain, 0.4, 0.0)) < 1e-9);
        }
    }

    GIVEN("a slow anneal of a short chain") {
        ChainSpec chain(4);
        const auto start = ed::ground_state(chain, 0.0, 0.0).state;
        const auto slow = ed::evolve_exact(start, chain, 1000.0);
        const auto faster = ed::evolve_exact(start, chain, 100.0);
        THEN("the final state is nearly classical and improves with T") {
            const double slow_e = ed::classical_stats(slow).residual_energy;
            CHECK(slow_e < 1e-3);
            CHECK(slow_e < ed::classical_stats(faster).residual_energy);
            CHECK(std::abs(slow.norm() - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("fermionic two-point functions of simple states") {
    GIVEN("the x-polarized state") {
        const auto corr = ed::correlators(ed::x_polarized(4));
        THEN("it is the fermion vacuum") {
            CHECK(corr.G.cwiseAbs().maxCoeff() < 1e-15);
            CHECK(corr.F.cwiseAbs().maxCoeff() < 1e-15);
        }
    }
    GIVEN("the all-up state") {
        const auto corr = ed::correlators(ed::all_up(3));
        THEN("every site is half filled") {
            for (int i = 0; i < 3; ++i) CHECK(corr.G(i, i).real() == Approx(0.5).epsilon(1e-15));
            // nearest-neighbour bond: 2 Re G - 2 Re F = <sz sz> = 1
            CHECK(2.0 * corr.G(0, 1).real() - 2.0 * corr.F(0, 1).real() == Approx(1.0));
        }
    }
}

}  // namespace annealscale
