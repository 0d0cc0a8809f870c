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

#include <cstdint>
#include <string>
#include <vector>

#include "stackselect/assess.hpp"
#include "stackselect/motion.hpp"

namespace stackselect {

/// One simulated selection trial: three orthogonal stacks, two corrupted.
struct TrialOutcome {
    std::int64_t trial_seed = 0;
    std::string motion_free_id;
    std::string selected_id;
    std::vector<MotionReport> reports;
};

/// Ratio of indicators after/before adding motion (detection sensitivity).
double rmi(double mi_after, double mi_before);

/// Ratio of indicators between orientations without motion (baseline bias).
double bmi(double mi_other, double mi_axial);

/// Fraction of trials whose selected stack is the motion-free one.
double success_rate(const std::vector<TrialOutcome>& outcomes);

struct TrialSuiteConfig {
    int phantom_size = 64;
    double slice_thickness_mm = 2.0;
    RandomMotionConfig motion;  // per-trial seeds are derived internally
    AssessConfig assess;
};

/// Deterministic trial loop: per trial, build a phantom, corrupt two of the
/// three orientations with random trajectories, select a reference. The
/// phantom seed of trial i is phantom_seeds[i % size] mixed with i.
std::vector<TrialOutcome> run_trial_suite(const std::vector<std::int64_t>& phantom_seeds,
                                          const TrialSuiteConfig& cfg, int n_trials);

}  // namespace stackselect
