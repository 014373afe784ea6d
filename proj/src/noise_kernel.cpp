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

// Built with -ffast-math -fopenmp so that the loops below map onto glibc's
// vectorized sin/cos. Nothing else belongs in this translation unit.

#include <math.h>

#include <cstddef>

namespace annealscale {

double harmonic_sum(const double* omega, const double* x, const double* p, std::size_t n,
                    double t) {
    constexpr std::size_t chunk = 256;
    double c[chunk];
    double s[chunk];
    double acc = 0.0;
    for (std::size_t base = 0; base < n; base += chunk) {
        const std::size_t m = (n - base < chunk) ? n - base : chunk;
        const double* w = omega + base;
#pragma omp simd
        for (std::size_t i = 0; i < m; ++i) c[i] = cos(w[i] * t);
#pragma omp simd
        for (std::size_t i = 0; i < m; ++i) s[i] = sin(w[i] * t);
        const double* xs = x + base;
        const double* ps = p + base;
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 0; i < m; ++i) acc += xs[i] * c[i] + ps[i] * s[i];
    }
    return acc;
}

}  // namespace annealscale
