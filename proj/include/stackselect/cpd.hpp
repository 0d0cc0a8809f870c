/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stackselect/linalg.hpp"
#include "stackselect/volume.hpp"

namespace stackselect {

/// Weighted sum of rank-one tensors: sum_i weights[i] * a_i o b_i o c_i.
/// Factor columns have unit norm; weights are sorted non-increasing.
struct CPModel {
    int rank = 0;
    std::vector<double> weights;
    std::array<Matrix, 3> factors;  // k x r, m x r, n x r
};

enum class CpInit { RandomUniform, SvdLeading };

struct AlsConfig {
    int rank = 25;
    /// The indicator consumes a ratio of residuals, and past a few dozen
    /// sweeps the slow ALS tail moves numerator and denominator together, so
    /// extra sweeps buy no discrimination - only time.
    int max_iterations = 50;
    double fit_tolerance = 1e-5;
    std::int64_t init_seed = 0;
    CpInit init_scheme = CpInit::RandomUniform;
};

struct CpResult {
    CPModel model;
    /// fit per iteration, fit = 1 - ||X - X'||_F / ||X||_F; entry 0 is the
    /// fit of the initialization.
    std::vector<double> fit_history;
};

/// Alternating least squares solve of the rank-cfg.rank decomposition.
/// Deterministic in (tensor, config); the fit history is non-decreasing.
CpResult cp_als(const Volume& x, const AlsConfig& cfg);

/// Warm-started variant: columns of `init` seed the factors and any
/// remaining columns are drawn from cfg.init_seed. Used by rank sweeps so
/// the rank-(r+1) error can only improve on the rank-r solution.
CpResult cp_als(const Volume& x, const AlsConfig& cfg, const CPModel& init);

/// Dense evaluation of the model; entry (p,q,s) = sum_i w_i A[p,i] B[q,i] C[s,i].
Volume cp_reconstruct(const CPModel& m);

/// ||X - X'||_F / ||X||_F accumulated without materializing X'.
double cp_relative_error(const Volume& x, const CPModel& m);

}  // namespace stackselect
