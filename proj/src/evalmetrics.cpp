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

#include "stackselect/evalmetrics.hpp"

#include <cmath>
#include <string>

#include "stackselect/error.hpp"
#include "stackselect/rng.hpp"

namespace stackselect {

namespace {

double positive_ratio(double numerator, double denominator, const char* what) {
    if (!(denominator > 0.0) || !std::isfinite(denominator))
        fail(ErrorCode::DivisionByZeroBaseline, std::string(what) + " baseline must be positive");
    if (!(numerator >= 0.0) || !std::isfinite(numerator))
        fail(ErrorCode::InvalidParameter, std::string(what) + " numerator must be non-negative");
    return numerator / denominator;
}

}  // namespace

double rmi(double mi_after, double mi_before) { return positive_ratio(mi_after, mi_before, "rmi"); }

double bmi(double mi_other, double mi_axial) { return positive_ratio(mi_other, mi_axial, "bmi"); }

double success_rate(const std::vector<TrialOutcome>& outcomes) {
    if (outcomes.empty()) fail(ErrorCode::EmptyInput, "no trial outcomes to score");
    std::size_t hits = 0;
    for (const TrialOutcome& o : outcomes) hits += o.selected_id == o.motion_free_id;
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::vector<TrialOutcome> run_trial_suite(const std::vector<std::int64_t>& phantom_seeds,
                                          const TrialSuiteConfig& cfg, int n_trials) {
    if (n_trials < 1) fail(ErrorCode::InvalidParameter, "need at least one trial");
    if (phantom_seeds.empty()) fail(ErrorCode::EmptyInput, "no phantom seeds given");

    constexpr std::array<Orientation, 3> kOrientations{Orientation::Axial, Orientation::Coronal,
                                                       Orientation::Sagittal};
    std::vector<TrialOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(n_trials));
    for (int trial = 0; trial < n_trials; ++trial) {
        const std::uint64_t trial_seed =
            mix_seed(static_cast<std::uint64_t>(cfg.motion.seed), 0x747269616cULL + static_cast<std::uint64_t>(trial));
        SplitMix trial_rng(trial_seed);
        const std::int64_t phantom_seed = static_cast<std::int64_t>(mix_seed(
            static_cast<std::uint64_t>(phantom_seeds[trial % phantom_seeds.size()]),
            static_cast<std::uint64_t>(trial)));

        try {
            auto [volume, mask] = make_phantom(cfg.phantom_size, phantom_seed);
            const int free_index = static_cast<int>(trial_rng.next_below(3));

            std::vector<StackInput> stacks;
            stacks.reserve(3);
            for (int o = 0; o < 3; ++o) {
                const Orientation orientation = kOrientations[o];
                const int n_slices = stack_slice_count(volume, orientation, cfg.slice_thickness_mm);
                // Masks always come from the motion-free geometry of the
                // orientation, so the indicator responds to content
                // decoherence instead of mask-boundary churn: the per-plane
                // area weights would otherwise jump whenever motion empties a
                // grazing plane. The motion-free acquisition carries a
                // half-voxel pose offset so its slices interpolate off-lattice
                // exactly like any moving acquisition; an on-lattice stack
                // keeps fine-scale energy that every resampled stack loses,
                // which would bias the baseline floor upward.
                auto [free_stack, free_mask] =
                    apply_motion(volume, mask, linear_trajectory(n_slices, 0.0, 0.0, 0.0, 0.5),
                                 orientation, cfg.slice_thickness_mm);
                if (o == free_index) {
                    stacks.push_back(
                        {std::move(free_stack), std::move(free_mask), to_string(orientation)});
                } else {
                    RandomMotionConfig motion = cfg.motion;
                    motion.seed = static_cast<std::int64_t>(trial_rng.next_u64());
                    auto corrupted = apply_motion(volume, mask, random_trajectory(n_slices, motion),
                                                  orientation, cfg.slice_thickness_mm);
                    stacks.push_back({std::move(corrupted.first), std::move(free_mask),
                                      to_string(orientation)});
                }
            }

            auto [selected, reports] = select_reference(stacks, cfg.assess);
            TrialOutcome outcome;
            outcome.trial_seed = static_cast<std::int64_t>(trial_seed);
            outcome.motion_free_id = to_string(kOrientations[free_index]);
            outcome.selected_id = std::move(selected);
            outcome.reports = std::move(reports);
            outcomes.push_back(std::move(outcome));
        } catch (const Error& e) {
            throw Error(e.code(), "trial " + std::to_string(trial) + ": " + e.detail());
        }
    }
    return outcomes;
}

}  // namespace stackselect
