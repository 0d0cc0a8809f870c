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

#include "stackselect/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stackselect/error.hpp"

namespace stackselect {

namespace {

struct Box {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};  // exclusive
    std::array<int, 3> dims() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
};

Box full_box(const std::array<int, 3>& dims) { return Box{{0, 0, 0}, dims}; }

Box mask_bounding_box(const Mask& m) {
    Box b{{m.dims[0], m.dims[1], m.dims[2]}, {0, 0, 0}};
    bool any = false;
    std::size_t idx = 0;
    for (int z = 0; z < m.dims[2]; ++z)
        for (int y = 0; y < m.dims[1]; ++y)
            for (int x = 0; x < m.dims[0]; ++x, ++idx) {
                if (m.data[idx] == 0) continue;
                any = true;
                b.lo = {std::min(b.lo[0], x), std::min(b.lo[1], y), std::min(b.lo[2], z)};
                b.hi = {std::max(b.hi[0], x + 1), std::max(b.hi[1], y + 1), std::max(b.hi[2], z + 1)};
            }
    if (!any) fail(ErrorCode::EmptyMask, "mask has no positive voxels");
    return b;
}

std::vector<double> crop(const Volume& v, const Box& b) {
    const auto d = b.dims();
    std::vector<double> out(static_cast<std::size_t>(d[0]) * d[1] * d[2]);
    std::size_t dst = 0;
    for (int z = b.lo[2]; z < b.hi[2]; ++z)
        for (int y = b.lo[1]; y < b.hi[1]; ++y)
            for (int x = b.lo[0]; x < b.hi[0]; ++x, ++dst) out[dst] = v.at(x, y, z);
    return out;
}

// Border-renormalized separable Gaussian along one axis: clipped kernels are
// re-divided by the in-range weight sum, so constants stay constant.
void gauss_axis(std::vector<double>& data, const std::array<int, 3>& dims, int axis,
                const std::vector<double>& w) {
    const int half = static_cast<int>(w.size()) / 2;
    const int n = dims[axis];
    const std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(dims[0]),
                                            static_cast<std::size_t>(dims[0]) * dims[1]};
    const std::size_t s = stride[axis];
    const int ou = (axis == 0) ? 1 : 0;
    const int ov = (axis == 2) ? 1 : 2;
    std::vector<double> line(n);
    for (int b = 0; b < dims[ov]; ++b)
        for (int a = 0; a < dims[ou]; ++a) {
            const std::size_t base = stride[ou] * a + stride[ov] * b;
            for (int i = 0; i < n; ++i) line[i] = data[base + s * i];
            for (int i = 0; i < n; ++i) {
                double acc = 0.0, wsum = 0.0;
                const int k0 = std::max(-half, -i);
                const int k1 = std::min(half, n - 1 - i);
                for (int k = k0; k <= k1; ++k) {
                    const double wk = w[k + half];
                    acc += wk * line[i + k];
                    wsum += wk;
                }
                data[base + s * i] = acc / wsum;
            }
        }
}

void gauss_blur(std::vector<double>& data, const std::array<int, 3>& dims,
                const std::vector<double>& w) {
    for (int axis = 0; axis < 3; ++axis) gauss_axis(data, dims, axis, w);
}

void check_cfg(const SsimConfig& cfg) {
    if (cfg.window < 1 || cfg.window % 2 == 0) fail(ErrorCode::InvalidParameter, "window must be odd and positive");
    if (!(cfg.gaussian_sigma > 0.0)) fail(ErrorCode::InvalidParameter, "gaussian_sigma must be positive");
    if (!(cfg.k1 > 0.0) || !(cfg.k2 > 0.0)) fail(ErrorCode::InvalidParameter, "k1 and k2 must be positive");
}

Box region_for(const Volume& a, const Volume& b, const Mask* mask) {
    if (a.dims != b.dims) fail(ErrorCode::ShapeMismatch, "volumes must share dims");
    if (mask != nullptr) {
        if (mask->dims != a.dims) fail(ErrorCode::ShapeMismatch, "mask dims must match the volumes");
        return mask_bounding_box(*mask);
    }
    return full_box(a.dims);
}

// Local SSIM index per voxel of the region.
std::vector<double> ssim_map_region(const Volume& a, const Volume& b, const SsimConfig& cfg,
                                    const Box& box) {
    check_cfg(cfg);
    const auto dims = box.dims();
    std::vector<double> va = crop(a, box);
    std::vector<double> vb = crop(b, box);

    double peak = 0.0;
    for (double v : va) peak = std::max(peak, std::abs(v));
    for (double v : vb) peak = std::max(peak, std::abs(v));
    double range = cfg.dynamic_range > 0.0 ? cfg.dynamic_range : peak;
    if (range <= 0.0) range = 1.0;  // two all-zero inputs: keep stabilizers positive
    const double c1 = (cfg.k1 * range) * (cfg.k1 * range);
    const double c2 = (cfg.k2 * range) * (cfg.k2 * range);

    const int half = cfg.window / 2;
    std::vector<double> w(cfg.window);
    for (int k = -half; k <= half; ++k)
        w[k + half] = std::exp(-0.5 * (k / cfg.gaussian_sigma) * (k / cfg.gaussian_sigma));

    const std::size_t total = va.size();
    std::vector<double> mu_a = va, mu_b = vb, aa(total), bb(total), ab(total);
    for (std::size_t i = 0; i < total; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
    }
    gauss_blur(mu_a, dims, w);
    gauss_blur(mu_b, dims, w);
    gauss_blur(aa, dims, w);
    gauss_blur(bb, dims, w);
    gauss_blur(ab, dims, w);

    std::vector<double> map(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double var_a = aa[i] - mu_a[i] * mu_a[i];
        const double var_b = bb[i] - mu_b[i] * mu_b[i];
        const double cov = ab[i] - mu_a[i] * mu_b[i];
        map[i] = ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2));
    }
    return map;
}

}  // namespace

double ssim(const Volume& a, const Volume& b, const SsimConfig& cfg, const Mask* mask) {
    const Box box = region_for(a, b, mask);
    const std::vector<double> map = ssim_map_region(a, b, cfg, box);
    double acc = 0.0;
    for (double v : map) acc += v;
    return acc / static_cast<double>(map.size());
}

double nrmse(const Volume& a, const Volume& truth, const Mask* mask) {
    const Box box = region_for(a, truth, mask);
    double err2 = 0.0, ref2 = 0.0;
    for (int z = box.lo[2]; z < box.hi[2]; ++z)
        for (int y = box.lo[1]; y < box.hi[1]; ++y)
            for (int x = box.lo[0]; x < box.hi[0]; ++x) {
                const double t = truth.at(x, y, z);
                const double d = a.at(x, y, z) - t;
                err2 += d * d;
                ref2 += t * t;
            }
    if (ref2 <= 0.0) fail(ErrorCode::DegenerateTruth, "ground truth has zero norm");
    return std::sqrt(err2 / ref2);
}

Volume dssim_map(const Volume& a, const Volume& b, const SsimConfig& cfg, const Mask* mask) {
    const Box box = region_for(a, b, mask);
    std::vector<double> map = ssim_map_region(a, b, cfg, box);
    for (double& v : map) v = std::clamp((1.0 - v) / 2.0, 0.0, 1.0);
    return Volume(box.dims(), a.spacing, a.orientation, std::move(map));
}

}  // namespace stackselect
