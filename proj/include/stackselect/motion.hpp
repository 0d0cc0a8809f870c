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
#include <utility>
#include <vector>

#include "stackselect/volume.hpp"

namespace stackselect {

/// 4x4 homogeneous transform, row-major.
struct Mat4 {
    std::array<double, 16> m{};

    static Mat4 identity();
    double& at(int r, int c) { return m[static_cast<std::size_t>(r) * 4 + c]; }
    double at(int r, int c) const { return m[static_cast<std::size_t>(r) * 4 + c]; }
};

Mat4 mat4_mul(const Mat4& a, const Mat4& b);

/// 6-DoF rigid pose: Euler angles in degrees (R = Rz * Ry * Rx) and a
/// translation in millimetres.
struct RigidTransform {
    std::array<double, 3> rotation_deg{0.0, 0.0, 0.0};
    std::array<double, 3> translation_mm{0.0, 0.0, 0.0};
};

/// Homogeneous matrix [[R, d], [0, 1]] with R = Rz(tz) Ry(ty) Rx(tx).
Mat4 to_matrix(const RigidTransform& t);

/// Pose whose matrix is matrix(a) * matrix(b).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Pose whose matrix is the inverse of matrix(t).
RigidTransform invert(const RigidTransform& t);

/// Per-slice pose sequence in spatial slice order.
struct MotionTrajectory {
    std::vector<RigidTransform> transforms;
    /// True when the temporal order was [1,3,5,...,2,4,6,...].
    bool interleaved = false;
};

/// Affine ramp: slice i carries base + i * step. A pure base offset is a
/// rigid repositioning of the whole stack, so slices stay mutually
/// consistent; only the step term introduces inter-slice motion.
MotionTrajectory linear_trajectory(int n_slices, const std::array<double, 3>& rot_step_deg,
                                   const std::array<double, 3>& trans_step_mm,
                                   const std::array<double, 3>& rot_base_deg = {0.0, 0.0, 0.0},
                                   const std::array<double, 3>& trans_base_mm = {0.0, 0.0, 0.0});
/// Scalar steps and bases broadcast to all three axes.
MotionTrajectory linear_trajectory(int n_slices, double rot_step_deg, double trans_step_mm,
                                   double rot_base_deg = 0.0, double trans_base_mm = 0.0);

struct RandomMotionConfig {
    double local_max_rot_deg = 5.0;
    double local_max_trans_mm = 1.0;
    /// Whole-stack pose offset as a fraction of the local maxima. Kept small:
    /// a rigid repositioning carries no inter-slice motion, so a large offset
    /// only perturbs the mask geometry without adding signal.
    double global_offset_factor = 0.5;
    double clamp_rot_deg = 25.0;
    double clamp_trans_mm = 5.0;
    std::int64_t seed = 0;
    /// Normalized roughness in [0, 1); 0 is a natural interpolating spline.
    double spline_smoothing = 0.5;
    /// Per-slice twitch amplitude as a fraction of the local maxima. The
    /// spline models slow drift between excitations; the jitter term adds the
    /// fast component so adjacent slices always disagree by a little even
    /// when the drift curve happens to flatten.
    double jitter_factor = 0.3;
};

/// Random-walk control points smoothed by a cubic spline, sampled in
/// interleaved temporal order (first half of the curve for odd slices,
/// second half for even slices), perturbed by per-slice jitter, and clamped
/// to the configured maxima.
MotionTrajectory random_trajectory(int n_slices, const RandomMotionConfig& cfg);

/// Number of slices a stack acquires along `orientation`:
/// floor(extent_mm / slice_thickness_mm).
int stack_slice_count(const Volume& v, Orientation orientation, double slice_thickness_mm);

/// Samples one slice per trajectory entry from the volume transformed about
/// its centre: trilinear for intensities, nearest-neighbour for the mask.
/// The output raster stores slices along its third axis; in-plane spacing is
/// the source spacing and through-plane spacing is slice_thickness_mm.
std::pair<Volume, Mask> apply_motion(const Volume& v, const Mask& m,
                                     const MotionTrajectory& traj, Orientation orientation,
                                     double slice_thickness_mm);

/// Smoothing cubic spline over y sampled at knots 0..n-1, evaluated at
/// `eval_at`. roughness 0 interpolates; larger values smooth harder.
std::vector<double> smoothing_spline(const std::vector<double>& y, double roughness,
                                     const std::vector<double>& eval_at);

}  // namespace stackselect
