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

#include "stackselect/volume.hpp"

namespace stackselect {

struct SsimConfig {
    int window = 11;              // odd
    double gaussian_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 0.0;   // <= 0: max intensity over both inputs
};

/// Mean of the local SSIM index with a separable 3D Gaussian window.
/// A mask restricts the computation to the mask's bounding box.
double ssim(const Volume& a, const Volume& b, const SsimConfig& cfg = {},
            const Mask* mask = nullptr);

/// ||a - truth||_F / ||truth||_F.
double nrmse(const Volume& a, const Volume& truth, const Mask* mask = nullptr);

/// Voxel-wise (1 - local SSIM) / 2, range [0, 1]. With a mask the returned
/// map covers the mask's bounding box.
Volume dssim_map(const Volume& a, const Volume& b, const SsimConfig& cfg = {},
                 const Mask* mask = nullptr);

}  // namespace stackselect
