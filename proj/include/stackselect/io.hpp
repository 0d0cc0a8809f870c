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
#include "stackselect/evalmetrics.hpp"
#include "stackselect/motion.hpp"
#include "stackselect/volume.hpp"

namespace stackselect {

// Native "SVL1" volume format: 4-byte magic, u32 version, u8 kind
// (0 = float32 intensities, 1 = uint8 mask), 3 x u32 dims, 3 x f32 spacing
// in mm, u8 orientation, then the x-fastest payload. Little-endian on disk.
void write_native(const std::string& path, const Volume& v);
void write_native(const std::string& path, const Mask& m);
Volume read_native_volume(const std::string& path);
Mask read_native_mask(const std::string& path);

/// Minimal uncompressed single-image NIfTI-1 reader (float32 or int16,
/// scl_slope/scl_inter applied). Orientation is tagged Isotropic; affine
/// semantics are out of scope.
Volume read_nifti1(const std::string& path);

/// Deterministic JSON emitter: fixed key order, doubles at 9 significant
/// digits, no whitespace. Shared by every serialized schema so identical
/// inputs give byte-identical documents.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const char* name);
    JsonWriter& value(double v);
    JsonWriter& value(std::int64_t v);
    JsonWriter& value(int v);
    JsonWriter& value(bool v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v);
    const std::string& str() const { return out_; }

private:
    void comma();
    std::string out_;
    std::vector<bool> has_item_;
    bool pending_key_ = false;
};

/// %.9g rendering used for every float written to JSON or CSV.
std::string format_double(double v);

// report_v1 documents. Serialized elapsed_ms is 0 unless include_timing is
// set, so files from identical inputs are byte-identical.
std::string report_json(const std::vector<MotionReport>& reports, bool include_timing = false);
std::string outcomes_json(const std::vector<TrialOutcome>& outcomes, bool include_timing = false);
void write_report_json(const std::vector<MotionReport>& reports, const std::string& path,
                       bool include_timing = false);
void write_report_json(const std::vector<TrialOutcome>& outcomes, const std::string& path,
                       bool include_timing = false);
void append_report_fields(JsonWriter& w, const MotionReport& r, bool include_timing);

/// Matches the trajectory_v1 schema: slices, interleaved flag, seed, and an
/// echo of the generating configuration.
struct TrajectoryMeta {
    enum class Mode { Linear, Random } mode = Mode::Linear;
    std::array<double, 3> linear_rot_step_deg{};
    std::array<double, 3> linear_trans_step_mm{};
    RandomMotionConfig random;
    std::int64_t seed = 0;
};

std::string trajectory_json(const MotionTrajectory& traj, const TrajectoryMeta& meta);
void write_trajectory_json(const MotionTrajectory& traj, const TrajectoryMeta& meta,
                           const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace stackselect
