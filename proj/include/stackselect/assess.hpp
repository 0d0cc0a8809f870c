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

#include <string>
#include <utility>
#include <vector>

#include "stackselect/cpd.hpp"
#include "stackselect/volume.hpp"

namespace stackselect {

enum class Method { CP, SvdRss, SvdFs };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

/// Default truncation rank per method: 25 for CP, 5 for the SVD variants.
int default_rank(Method m);

/// Per-stack motion indicator plus audit metadata.
struct MotionReport {
    Method method = Method::CP;
    double mi = 0.0;
    int rank_used = 0;
    std::string stack_id;
    double elapsed_ms = 0.0;
    /// Effective-area sum (SVD-RSS) or effective volume (CP, SVD-FS) used to
    /// normalize the raw relative error.
    double effective_norm = 0.0;
};

struct AssessConfig {
    Method method = Method::CP;
    int rank = 0;                // 0 = method default
    double target_spacing = 0;   // <= 0 = smallest spacing of the input
    AlsConfig als;               // CP only; seed is mixed with a content hash
};

/// Sum over all re-sliced planes of (1/S) ||D - D'||_F / ||D||_F after
/// isotropic resampling, with rank-`cfg.rank` truncations.
MotionReport mi_svd_rss(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                        const std::string& stack_id = {});

/// (1/V) ||X - X'||_F / ||X||_F for the CP model of the resampled stack.
MotionReport mi_cp(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                   const std::string& stack_id = {});

/// Flattened-stack baseline: rank-`cfg.rank` relative error of the
/// (slices x in-plane voxels) matrix of the raw stack, over the raw
/// effective volume.
MotionReport mi_svd_fs(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                       const std::string& stack_id = {});

/// Dispatch on cfg.method.
MotionReport assess_stack(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                          const std::string& stack_id = {});

struct StackInput {
    Volume volume;
    Mask mask;
    std::string id;
};

/// Assesses every stack and returns the id with the minimum indicator
/// (ties broken by input order) along with all reports.
std::pair<std::string, std::vector<MotionReport>> select_reference(
    const std::vector<StackInput>& stacks, const AssessConfig& cfg);

}  // namespace stackselect
