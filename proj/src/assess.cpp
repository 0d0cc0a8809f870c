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

#include "stackselect/assess.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "stackselect/error.hpp"
#include "stackselect/linalg.hpp"

namespace stackselect {

const char* method_name(Method m) {
    switch (m) {
        case Method::CP: return "cp";
        case Method::SvdRss: return "svd-rss";
        case Method::SvdFs: return "svd-fs";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "cp") return Method::CP;
    if (name == "svd-rss") return Method::SvdRss;
    if (name == "svd-fs") return Method::SvdFs;
    fail(ErrorCode::InvalidParameter, "unknown method '" + name + "' (expected cp, svd-rss, or svd-fs)");
}

int default_rank(Method m) { return m == Method::CP ? 25 : 5; }

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

int effective_rank(const AssessConfig& cfg) {
    const int rank = cfg.rank > 0 ? cfg.rank : default_rank(cfg.method);
    if (rank < 1) fail(ErrorCode::InvalidParameter, "rank must be positive");
    return rank;
}

double resolve_spacing(const Volume& v, const AssessConfig& cfg) {
    return cfg.target_spacing > 0.0 ? cfg.target_spacing : default_target_spacing(v);
}

void check_pair(const Volume& stack, const Mask& m) {
    if (m.dims != stack.dims) fail(ErrorCode::ShapeMismatch, "mask dims do not match stack dims");
    if (effective_volume(m) == 0) fail(ErrorCode::EmptyMask, "mask has no positive voxels");
}

// FNV-1a over the raster bytes plus shape; keys the per-call ALS stream so
// repeated runs on the same stack reproduce exactly.
std::uint64_t content_hash(const Volume& v) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    mix(v.dims.data(), sizeof(v.dims));
    mix(v.spacing.data(), sizeof(v.spacing));
    mix(v.data.data(), v.data.size() * sizeof(double));
    return h;
}

}  // namespace

MotionReport mi_svd_rss(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                        const std::string& stack_id) {
    const auto start = Clock::now();
    check_pair(stack, m);
    const int rank = effective_rank(cfg);
    auto [iso, iso_mask] = resample_isotropic(stack, m, resolve_spacing(stack, cfg));

    double mi = 0.0;
    double area_sum = 0.0;
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        const std::vector<SliceImage> slices = reslice(iso, axis);
        for (int i = 0; i < static_cast<int>(slices.size()); ++i) {
            const std::int64_t area = effective_area(iso_mask, axis, i);
            if (area == 0) continue;  // empty plane carries no motion signal
            const SliceImage& s = slices[i];
            Matrix d(s.height, s.width, s.data);
            // Small planes cannot support the full truncation; cap per slice.
            const int r = std::min(rank, std::min(d.rows, d.cols));
            if (frobenius_norm(d) == 0.0) continue;
            const double err = low_rank_error(d, truncated_svd(d, r));
            mi += err / static_cast<double>(area);
            area_sum += static_cast<double>(area);
        }
    }
    MotionReport report;
    report.method = Method::SvdRss;
    report.mi = mi;
    report.rank_used = rank;
    report.stack_id = stack_id;
    report.effective_norm = area_sum;
    report.elapsed_ms = ms_since(start);
    return report;
}

MotionReport mi_cp(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                   const std::string& stack_id) {
    const auto start = Clock::now();
    check_pair(stack, m);
    const int rank = effective_rank(cfg);
    auto [iso, iso_mask] = resample_isotropic(stack, m, resolve_spacing(stack, cfg));
    const std::int64_t volume = effective_volume(iso_mask);
    if (volume == 0) fail(ErrorCode::EmptyMask, "mask support vanished during resampling");

    AlsConfig als = cfg.als;
    als.rank = rank;
    als.init_seed = static_cast<std::int64_t>(content_hash(iso) ^
                                              static_cast<std::uint64_t>(cfg.als.init_seed));
    const CpResult result = cp_als(iso, als);
    const double rel = 1.0 - result.fit_history.back();

    MotionReport report;
    report.method = Method::CP;
    report.mi = rel / static_cast<double>(volume);
    report.rank_used = rank;
    report.stack_id = stack_id;
    report.effective_norm = static_cast<double>(volume);
    report.elapsed_ms = ms_since(start);
    return report;
}

MotionReport mi_svd_fs(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                       const std::string& stack_id) {
    const auto start = Clock::now();
    check_pair(stack, m);
    const int n_slices = stack.dims[2];
    if (n_slices < 2) fail(ErrorCode::InvalidVolume, "flattened baseline needs at least two slices");
    const int rank = effective_rank(cfg);

    // Rows are raw slices flattened to vectors; no resampling (the baseline
    // operates on the acquired stack directly).
    const int cols = stack.dims[0] * stack.dims[1];
    Matrix d(n_slices, cols, stack.data);
    const int r = std::min(rank, std::min(d.rows, d.cols));
    const double err = low_rank_error(d, truncated_svd(d, r));
    const std::int64_t volume = effective_volume(m);

    MotionReport report;
    report.method = Method::SvdFs;
    report.mi = err / static_cast<double>(volume);
    report.rank_used = rank;
    report.stack_id = stack_id;
    report.effective_norm = static_cast<double>(volume);
    report.elapsed_ms = ms_since(start);
    return report;
}

MotionReport assess_stack(const Volume& stack, const Mask& m, const AssessConfig& cfg,
                          const std::string& stack_id) {
    switch (cfg.method) {
        case Method::CP: return mi_cp(stack, m, cfg, stack_id);
        case Method::SvdRss: return mi_svd_rss(stack, m, cfg, stack_id);
        case Method::SvdFs: return mi_svd_fs(stack, m, cfg, stack_id);
    }
    fail(ErrorCode::InvalidParameter, "unknown assessment method");
}

std::pair<std::string, std::vector<MotionReport>> select_reference(
    const std::vector<StackInput>& stacks, const AssessConfig& cfg) {
    if (stacks.size() < 2) fail(ErrorCode::InsufficientStacks, "reference selection needs at least two stacks");

    std::vector<MotionReport> reports;
    reports.reserve(stacks.size());
    for (const StackInput& s : stacks) {
        try {
            reports.push_back(assess_stack(s.volume, s.mask, cfg, s.id));
        } catch (const Error& e) {
            throw Error(e.code(), "stack '" + s.id + "': " + e.detail());
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].mi < reports[best].mi) best = i;  // ties keep the earlier stack
    }
    return {reports[best].stack_id, reports};
}

}  // namespace stackselect
