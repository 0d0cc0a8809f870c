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

#include "stackselect/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stackselect/error.hpp"
#include "stackselect/rng.hpp"

namespace stackselect {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

RigidTransform from_matrix(const Mat4& m) {
    RigidTransform t;
    const double sy = std::clamp(-m.at(2, 0), -1.0, 1.0);
    const double ty = std::asin(sy);
    double tx, tz;
    if (std::abs(m.at(2, 0)) < 1.0 - 1e-12) {
        tx = std::atan2(m.at(2, 1), m.at(2, 2));
        tz = std::atan2(m.at(1, 0), m.at(0, 0));
    } else {
        // Gimbal lock: fold the z rotation into x.
        tz = 0.0;
        tx = (sy > 0.0) ? std::atan2(m.at(0, 1), m.at(1, 1)) : std::atan2(-m.at(0, 1), m.at(1, 1));
    }
    t.rotation_deg = {tx * kRadToDeg, ty * kRadToDeg, tz * kRadToDeg};
    t.translation_mm = {m.at(0, 3), m.at(1, 3), m.at(2, 3)};
    return t;
}

}  // namespace

Mat4 Mat4::identity() {
    Mat4 out;
    for (int i = 0; i < 4; ++i) out.at(i, i) = 1.0;
    return out;
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
    Mat4 out;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < 4; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

Mat4 to_matrix(const RigidTransform& t) {
    for (double v : t.rotation_deg)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidParameter, "rotation must be finite");
    for (double v : t.translation_mm)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidParameter, "translation must be finite");
    const double ax = t.rotation_deg[0] * kDegToRad;
    const double ay = t.rotation_deg[1] * kDegToRad;
    const double az = t.rotation_deg[2] * kDegToRad;
    const double cx = std::cos(ax), sx = std::sin(ax);
    const double cy = std::cos(ay), sy = std::sin(ay);
    const double cz = std::cos(az), sz = std::sin(az);

    Mat4 m = Mat4::identity();
    // R = Rz * Ry * Rx
    m.at(0, 0) = cz * cy;
    m.at(0, 1) = cz * sy * sx - sz * cx;
    m.at(0, 2) = cz * sy * cx + sz * sx;
    m.at(1, 0) = sz * cy;
    m.at(1, 1) = sz * sy * sx + cz * cx;
    m.at(1, 2) = sz * sy * cx - cz * sx;
    m.at(2, 0) = -sy;
    m.at(2, 1) = cy * sx;
    m.at(2, 2) = cy * cx;
    m.at(0, 3) = t.translation_mm[0];
    m.at(1, 3) = t.translation_mm[1];
    m.at(2, 3) = t.translation_mm[2];
    return m;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return from_matrix(mat4_mul(to_matrix(a), to_matrix(b)));
}

RigidTransform invert(const RigidTransform& t) {
    const Mat4 m = to_matrix(t);
    Mat4 inv = Mat4::identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) inv.at(i, j) = m.at(j, i);
    for (int i = 0; i < 3; ++i) {
        double d = 0.0;
        for (int j = 0; j < 3; ++j) d -= m.at(j, i) * m.at(j, 3);
        inv.at(i, 3) = d;
    }
    return from_matrix(inv);
}

MotionTrajectory linear_trajectory(int n_slices, const std::array<double, 3>& rot_step_deg,
                                   const std::array<double, 3>& trans_step_mm,
                                   const std::array<double, 3>& rot_base_deg,
                                   const std::array<double, 3>& trans_base_mm) {
    if (n_slices < 1) fail(ErrorCode::InvalidParameter, "need at least one slice");
    MotionTrajectory traj;
    traj.interleaved = false;
    traj.transforms.resize(n_slices);
    for (int i = 0; i < n_slices; ++i) {
        RigidTransform& t = traj.transforms[i];
        for (int a = 0; a < 3; ++a) {
            t.rotation_deg[a] = rot_base_deg[a] + i * rot_step_deg[a];
            t.translation_mm[a] = trans_base_mm[a] + i * trans_step_mm[a];
        }
    }
    return traj;
}

MotionTrajectory linear_trajectory(int n_slices, double rot_step_deg, double trans_step_mm,
                                   double rot_base_deg, double trans_base_mm) {
    return linear_trajectory(n_slices, std::array<double, 3>{rot_step_deg, rot_step_deg, rot_step_deg},
                             std::array<double, 3>{trans_step_mm, trans_step_mm, trans_step_mm},
                             std::array<double, 3>{rot_base_deg, rot_base_deg, rot_base_deg},
                             std::array<double, 3>{trans_base_mm, trans_base_mm, trans_base_mm});
}

std::vector<double> smoothing_spline(const std::vector<double>& y, double roughness,
                                     const std::vector<double>& eval_at) {
    const int n = static_cast<int>(y.size());
    if (n < 1) fail(ErrorCode::EmptyInput, "spline needs at least one value");
    if (!(roughness >= 0.0) || !std::isfinite(roughness))
        fail(ErrorCode::InvalidParameter, "roughness must be non-negative");

    std::vector<double> g = y;
    std::vector<double> gamma(n, 0.0);  // second derivatives, natural ends
    const int m = n - 2;                // interior knots
    if (m > 0) {
        // Reinsch: (R + lambda Q^T Q) gamma_int = Q^T y, g = y - lambda Q gamma_int,
        // on unit knot spacing. roughness in [0,1) maps to lambda = s/(1-s).
        const double s = std::min(roughness, 0.999);
        const double lambda = s / (1.0 - s);
        const double d0 = 2.0 / 3.0 + 6.0 * lambda;
        const double d1 = 1.0 / 6.0 - 4.0 * lambda;
        const double d2 = lambda;

        // Banded Cholesky, bandwidth 2.
        std::vector<double> l0(m), l1(m, 0.0), l2(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double a2 = (i >= 2) ? d2 : 0.0;
            if (i >= 2) a2 = a2 / l0[i - 2];
            double a1 = (i >= 1) ? d1 : 0.0;
            if (i >= 1) a1 = (a1 - ((i >= 2) ? a2 * l1[i - 2] : 0.0)) / l0[i - 1];
            double diag = d0;
            if (i >= 2) diag -= a2 * a2;
            if (i >= 1) diag -= a1 * a1;
            if (!(diag > 0.0)) fail(ErrorCode::SingularSystem, "spline system not positive definite");
            l0[i] = std::sqrt(diag);
            if (i >= 1) l1[i - 1] = a1;  // L[i][i-1]
            if (i >= 2) l2[i - 2] = a2;  // L[i][i-2]
        }
        std::vector<double> rhs(m);
        for (int i = 0; i < m; ++i) rhs[i] = y[i] - 2.0 * y[i + 1] + y[i + 2];
        // forward L z = rhs
        for (int i = 0; i < m; ++i) {
            double v = rhs[i];
            if (i >= 1) v -= l1[i - 1] * rhs[i - 1];
            if (i >= 2) v -= l2[i - 2] * rhs[i - 2];
            rhs[i] = v / l0[i];
        }
        // backward L^T x = z
        for (int i = m - 1; i >= 0; --i) {
            double v = rhs[i];
            if (i + 1 < m) v -= l1[i] * rhs[i + 1];
            if (i + 2 < m) v -= l2[i] * rhs[i + 2];
            rhs[i] = v / l0[i];
        }
        for (int i = 0; i < m; ++i) gamma[i + 1] = rhs[i];
        for (int i = 0; i < m; ++i) {
            g[i] -= lambda * rhs[i];
            g[i + 1] += 2.0 * lambda * rhs[i];
            g[i + 2] -= lambda * rhs[i];
        }
    }

    std::vector<double> out;
    out.reserve(eval_at.size());
    for (double t : eval_at) {
        if (!std::isfinite(t)) fail(ErrorCode::InvalidParameter, "evaluation point must be finite");
        const double tc = std::clamp(t, 0.0, static_cast<double>(n - 1));
        if (n == 1) {
            out.push_back(g[0]);
            continue;
        }
        const int i = std::min(n - 2, static_cast<int>(tc));
        const double u = tc - i;
        const double a = 1.0 - u;
        out.push_back(gamma[i] * a * a * a / 6.0 + gamma[i + 1] * u * u * u / 6.0 +
                      (g[i] - gamma[i] / 6.0) * a + (g[i + 1] - gamma[i + 1] / 6.0) * u);
    }
    return out;
}

MotionTrajectory random_trajectory(int n_slices, const RandomMotionConfig& cfg) {
    if (n_slices < 2) fail(ErrorCode::InvalidParameter, "need at least two slices");
    if (cfg.local_max_rot_deg < 0.0 || cfg.local_max_trans_mm < 0.0 || cfg.global_offset_factor < 0.0)
        fail(ErrorCode::InvalidParameter, "motion magnitudes must be non-negative");
    if (cfg.clamp_rot_deg < cfg.local_max_rot_deg || cfg.clamp_trans_mm < cfg.local_max_trans_mm)
        fail(ErrorCode::InvalidParameter, "clamps must be at least the local maxima");
    if (!(cfg.spline_smoothing >= 0.0))
        fail(ErrorCode::InvalidParameter, "spline smoothing must be non-negative");
    if (cfg.jitter_factor < 0.0)
        fail(ErrorCode::InvalidParameter, "jitter factor must be non-negative");

    const int n = n_slices;
    const int n_points = 2 * n;
    const int n_odd = (n + 1) / 2;  // acquisition order [1,3,5,...,2,4,6,...]

    // Temporal sample t lives at curve parameter t*(2N-1)/(N-1): the first
    // half of the curve feeds odd slices, the second half even slices.
    std::vector<double> eval(n);
    for (int t = 0; t < n; ++t)
        eval[t] = static_cast<double>(t) * (n_points - 1) / (n - 1);

    SplitMix rng(mix_seed(static_cast<std::uint64_t>(cfg.seed), 0x6d6f74696f6eULL));  // "motion"
    MotionTrajectory traj;
    traj.interleaved = true;
    traj.transforms.resize(n);

    std::vector<double> points(n_points);
    for (int dof = 0; dof < 6; ++dof) {
        const bool is_rot = dof < 3;
        const double local = is_rot ? cfg.local_max_rot_deg : cfg.local_max_trans_mm;
        const double clamp = is_rot ? cfg.clamp_rot_deg : cfg.clamp_trans_mm;
        const double global = cfg.global_offset_factor * local;

        points[0] = rng.next_uniform(-global, global);
        for (int i = 1; i < n_points; ++i)
            points[i] = points[i - 1] + rng.next_uniform(-local, local);

        const std::vector<double> sampled = smoothing_spline(points, cfg.spline_smoothing, eval);
        const double jitter = cfg.jitter_factor * local;
        for (int t = 0; t < n; ++t) {
            const double v =
                std::clamp(sampled[t] + rng.next_uniform(-jitter, jitter), -clamp, clamp);
            // temporal sample t -> spatial slice: odd slices first.
            const int slice = (t < n_odd) ? 2 * t : 2 * (t - n_odd) + 1;
            if (is_rot)
                traj.transforms[slice].rotation_deg[dof] = v;
            else
                traj.transforms[slice].translation_mm[dof - 3] = v;
        }
    }
    return traj;
}

namespace {

Axis slice_axis(Orientation o) {
    switch (o) {
        case Orientation::Axial: return Axis::Z;
        case Orientation::Coronal: return Axis::Y;
        case Orientation::Sagittal: return Axis::X;
        case Orientation::Isotropic: break;
    }
    fail(ErrorCode::InvalidParameter, "stack orientation must be axial, coronal, or sagittal");
}

}  // namespace

int stack_slice_count(const Volume& v, Orientation orientation, double slice_thickness_mm) {
    if (!(slice_thickness_mm > 0.0) || !std::isfinite(slice_thickness_mm))
        fail(ErrorCode::InvalidParameter, "slice thickness must be positive");
    const int axis = static_cast<int>(slice_axis(orientation));
    const double extent = v.dims[axis] * v.spacing[axis];
    const int n = static_cast<int>(std::floor(extent / slice_thickness_mm + 1e-9));
    if (n < 1) fail(ErrorCode::InvalidParameter, "slice thickness exceeds the volume extent");
    return n;
}

std::pair<Volume, Mask> apply_motion(const Volume& v, const Mask& m, const MotionTrajectory& traj,
                                     Orientation orientation, double slice_thickness_mm) {
    if (m.dims != v.dims) fail(ErrorCode::ShapeMismatch, "mask dims do not match volume dims");
    if (!v.is_isotropic()) fail(ErrorCode::RequiresIsotropic, "motion sampling needs an isotropic source");
    const int n = stack_slice_count(v, orientation, slice_thickness_mm);
    if (static_cast<int>(traj.transforms.size()) != n)
        fail(ErrorCode::ShapeMismatch, "trajectory length does not match the slice count");

    const auto [nx, ny, nz] = v.dims;
    const std::array<double, 3> centre{(nx - 1) * v.spacing[0] / 2.0, (ny - 1) * v.spacing[1] / 2.0,
                                       (nz - 1) * v.spacing[2] / 2.0};

    std::array<int, 3> odims{};
    std::array<double, 3> ospacing{};
    switch (orientation) {
        case Orientation::Axial:
            odims = {nx, ny, n};
            ospacing = {v.spacing[0], v.spacing[1], slice_thickness_mm};
            break;
        case Orientation::Coronal:
            odims = {nx, nz, n};
            ospacing = {v.spacing[0], v.spacing[2], slice_thickness_mm};
            break;
        default:  // Sagittal; Isotropic already rejected by stack_slice_count
            odims = {ny, nz, n};
            ospacing = {v.spacing[1], v.spacing[2], slice_thickness_mm};
            break;
    }

    Volume stack(odims, ospacing, orientation);
    Mask stack_mask(odims);

    auto world_point = [&](int a, int b, int i) -> std::array<double, 3> {
        const double pa = a * ospacing[0];
        const double pb = b * ospacing[1];
        const double pi = i * slice_thickness_mm;
        switch (orientation) {
            case Orientation::Axial: return {pa, pb, pi};
            case Orientation::Coronal: return {pa, pi, pb};
            default: return {pi, pa, pb};
        }
    };
    auto sample = [&](int x, int y, int z) -> double {
        if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return 0.0;
        return v.data[v.index(x, y, z)];
    };

    std::size_t dst = 0;
    for (int i = 0; i < n; ++i) {
        const Mat4 t = to_matrix(traj.transforms[i]);
        for (int b = 0; b < odims[1]; ++b)
            for (int a = 0; a < odims[0]; ++a, ++dst) {
                const std::array<double, 3> q = world_point(a, b, i);
                // The volume is rotated about its centre then shifted by d;
                // sample the source at p = C + R^T (q - C - d).
                std::array<double, 3> rel{};
                for (int c = 0; c < 3; ++c) rel[c] = q[c] - centre[c] - t.at(c, 3);
                std::array<double, 3> p{};
                for (int c = 0; c < 3; ++c)
                    p[c] = centre[c] + t.at(0, c) * rel[0] + t.at(1, c) * rel[1] + t.at(2, c) * rel[2];

                const double ux = p[0] / v.spacing[0];
                const double uy = p[1] / v.spacing[1];
                const double uz = p[2] / v.spacing[2];
                const int x0 = static_cast<int>(std::floor(ux));
                const int y0 = static_cast<int>(std::floor(uy));
                const int z0 = static_cast<int>(std::floor(uz));
                const double fx = ux - x0, fy = uy - y0, fz = uz - z0;
                const double c00 = sample(x0, y0, z0) * (1 - fx) + sample(x0 + 1, y0, z0) * fx;
                const double c10 = sample(x0, y0 + 1, z0) * (1 - fx) + sample(x0 + 1, y0 + 1, z0) * fx;
                const double c01 = sample(x0, y0, z0 + 1) * (1 - fx) + sample(x0 + 1, y0, z0 + 1) * fx;
                const double c11 =
                    sample(x0, y0 + 1, z0 + 1) * (1 - fx) + sample(x0 + 1, y0 + 1, z0 + 1) * fx;
                const double c0 = c00 * (1 - fy) + c10 * fy;
                const double c1 = c01 * (1 - fy) + c11 * fy;
                stack.data[dst] = c0 * (1 - fz) + c1 * fz;

                const int xn = static_cast<int>(std::floor(ux + 0.5));
                const int yn = static_cast<int>(std::floor(uy + 0.5));
                const int zn = static_cast<int>(std::floor(uz + 0.5));
                if (xn >= 0 && yn >= 0 && zn >= 0 && xn < nx && yn < ny && zn < nz)
                    stack_mask.data[dst] = m.data[m.index(xn, yn, zn)];
            }
    }
    return {std::move(stack), std::move(stack_mask)};
}

}  // namespace stackselect
