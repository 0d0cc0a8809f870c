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

#include "stackselect/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "stackselect/error.hpp"

namespace stackselect {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::IoError, "read failed for '" + path + "'");
    return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t len) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

// Little-endian primitives, host-independent.
void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::vector<unsigned char>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::int16_t get_i16(const unsigned char* p) { return static_cast<std::int16_t>(get_u16(p)); }

std::int32_t get_i32(const unsigned char* p) { return static_cast<std::int32_t>(get_u32(p)); }

constexpr char kMagic[4] = {'S', 'V', 'L', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 1 + 12 + 12 + 1;

struct NativeHeader {
    std::uint8_t kind = 0;
    std::array<int, 3> dims{};
    std::array<double, 3> spacing{};
    Orientation orientation = Orientation::Isotropic;
    const unsigned char* payload = nullptr;
    std::size_t payload_len = 0;
};

void append_header(std::vector<unsigned char>& out, std::uint8_t kind,
                   const std::array<int, 3>& dims, const std::array<double, 3>& spacing,
                   Orientation orientation) {
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, 1);
    out.push_back(kind);
    for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
    for (double s : spacing) put_f32(out, static_cast<float>(s));
    out.push_back(static_cast<std::uint8_t>(orientation));
}

NativeHeader parse_native(const std::vector<unsigned char>& bytes, const std::string& path) {
    if (bytes.size() < kHeaderSize) fail(ErrorCode::CorruptFile, "'" + path + "' is shorter than the header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "' does not start with the SVL1 magic");
    if (get_u32(bytes.data() + 4) != 1)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "' has an unsupported version");
    NativeHeader h;
    h.kind = bytes[8];
    if (h.kind > 1) fail(ErrorCode::CorruptFile, "'" + path + "' has an unknown payload kind");
    for (int i = 0; i < 3; ++i) {
        const std::uint32_t d = get_u32(bytes.data() + 9 + 4 * i);
        if (d == 0 || d > 1u << 24) fail(ErrorCode::CorruptFile, "'" + path + "' has invalid dims");
        h.dims[i] = static_cast<int>(d);
    }
    for (int i = 0; i < 3; ++i) {
        const float s = get_f32(bytes.data() + 21 + 4 * i);
        if (!(s > 0.0f) || !std::isfinite(s)) fail(ErrorCode::CorruptFile, "'" + path + "' has invalid spacing");
        h.spacing[i] = static_cast<double>(s);
    }
    const std::uint8_t o = bytes[33];
    if (o > 3) fail(ErrorCode::CorruptFile, "'" + path + "' has an invalid orientation byte");
    h.orientation = static_cast<Orientation>(o);

    const std::size_t voxels =
        static_cast<std::size_t>(h.dims[0]) * h.dims[1] * h.dims[2];
    const std::size_t expect = voxels * (h.kind == 0 ? 4 : 1);
    const std::size_t have = bytes.size() - kHeaderSize;
    if (have != expect)
        fail(ErrorCode::CorruptFile, "'" + path + "' payload has " + std::to_string(have) +
                                         " bytes, expected " + std::to_string(expect));
    h.payload = bytes.data() + kHeaderSize;
    h.payload_len = have;
    return h;
}

}  // namespace

void write_native(const std::string& path, const Volume& v) {
    std::vector<unsigned char> out;
    out.reserve(kHeaderSize + v.voxel_count() * 4);
    append_header(out, 0, v.dims, v.spacing, v.orientation);
    for (double d : v.data) put_f32(out, static_cast<float>(d));
    write_file(path, out.data(), out.size());
}

void write_native(const std::string& path, const Mask& m) {
    std::vector<unsigned char> out;
    out.reserve(kHeaderSize + m.voxel_count());
    append_header(out, 1, m.dims, {1.0, 1.0, 1.0}, Orientation::Isotropic);
    out.insert(out.end(), m.data.begin(), m.data.end());
    write_file(path, out.data(), out.size());
}

Volume read_native_volume(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    const NativeHeader h = parse_native(bytes, path);
    if (h.kind != 0) fail(ErrorCode::UnsupportedFormat, "'" + path + "' holds a mask, not intensities");
    std::vector<double> data(h.payload_len / 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float f = get_f32(h.payload + 4 * i);
        if (!std::isfinite(f)) fail(ErrorCode::CorruptFile, "'" + path + "' has non-finite intensities");
        data[i] = static_cast<double>(f);
    }
    return Volume(h.dims, h.spacing, h.orientation, std::move(data));
}

Mask read_native_mask(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    const NativeHeader h = parse_native(bytes, path);
    if (h.kind != 1) fail(ErrorCode::UnsupportedFormat, "'" + path + "' holds intensities, not a mask");
    std::vector<std::uint8_t> data(h.payload, h.payload + h.payload_len);
    for (std::uint8_t v : data) {
        if (v > 1) fail(ErrorCode::CorruptFile, "'" + path + "' has mask bytes other than 0/1");
    }
    return Mask(h.dims, std::move(data));
}

Volume read_nifti1(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "' is gzip-compressed");
    if (bytes.size() < 348) fail(ErrorCode::CorruptFile, "'" + path + "' is shorter than a NIfTI-1 header");
    if (get_i32(bytes.data()) != 348)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "': sizeof_hdr is not 348");
    if (std::memcmp(bytes.data() + 344, "n+1\0", 4) != 0)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "': magic is not n+1");

    const std::int16_t ndim = get_i16(bytes.data() + 40);
    const bool squeezed_4d = ndim == 4 && get_i16(bytes.data() + 48) == 1;
    if (ndim != 3 && !squeezed_4d)
        fail(ErrorCode::UnsupportedFormat, "'" + path + "': dim[0] must describe a 3D image");
    std::array<int, 3> dims{};
    for (int i = 0; i < 3; ++i) {
        const std::int16_t d = get_i16(bytes.data() + 42 + 2 * i);
        if (d <= 0) fail(ErrorCode::CorruptFile, "'" + path + "': dim[" + std::to_string(i + 1) + "] must be positive");
        dims[i] = d;
    }
    const std::int16_t datatype = get_i16(bytes.data() + 70);
    if (datatype != 16 && datatype != 4)
        fail(ErrorCode::UnsupportedFormat,
             "'" + path + "': datatype " + std::to_string(datatype) + " (want float32 or int16)");
    const std::int16_t bitpix = get_i16(bytes.data() + 72);
    const int bytes_per = datatype == 16 ? 4 : 2;
    if (bitpix != 8 * bytes_per) fail(ErrorCode::CorruptFile, "'" + path + "': bitpix does not match datatype");

    std::array<double, 3> spacing{};
    for (int i = 0; i < 3; ++i) {
        const float s = get_f32(bytes.data() + 80 + 4 * i);
        if (!(s > 0.0f) || !std::isfinite(s))
            fail(ErrorCode::CorruptFile, "'" + path + "': pixdim[" + std::to_string(i + 1) + "] must be positive");
        spacing[i] = static_cast<double>(s);
    }
    const float vox_offset_f = get_f32(bytes.data() + 108);
    if (!(vox_offset_f >= 348.0f))
        fail(ErrorCode::CorruptFile, "'" + path + "': vox_offset is before the header end");
    const std::size_t vox_offset = static_cast<std::size_t>(vox_offset_f);
    const float slope = get_f32(bytes.data() + 112);
    const float inter = get_f32(bytes.data() + 116);

    const std::size_t voxels = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    const std::size_t need = voxels * static_cast<std::size_t>(bytes_per);
    if (bytes.size() < vox_offset + need)
        fail(ErrorCode::CorruptFile, "'" + path + "' payload has " +
                                         std::to_string(bytes.size() - std::min(bytes.size(), vox_offset)) +
                                         " bytes, expected " + std::to_string(need));

    std::vector<double> data(voxels);
    const unsigned char* p = bytes.data() + vox_offset;
    const double s = slope != 0.0f ? static_cast<double>(slope) : 1.0;
    const double b = slope != 0.0f ? static_cast<double>(inter) : 0.0;
    for (std::size_t i = 0; i < voxels; ++i) {
        double raw;
        if (datatype == 16) {
            const float f = get_f32(p + 4 * i);
            raw = static_cast<double>(f);
        } else {
            raw = static_cast<double>(get_i16(p + 2 * i));
        }
        const double v = s * raw + b;
        if (!std::isfinite(v)) fail(ErrorCode::CorruptFile, "'" + path + "' has non-finite intensities");
        data[i] = v;
    }
    return Volume(dims, spacing, Orientation::Isotropic, std::move(data));
}

std::string format_double(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidParameter, "cannot serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void JsonWriter::comma() {
    if (!has_item_.empty() && has_item_.back() && !pending_key_) out_.push_back(',');
    if (!has_item_.empty()) has_item_.back() = true;
    pending_key_ = false;
}

JsonWriter& JsonWriter::begin_object() {
    comma();
    out_.push_back('{');
    has_item_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    out_.push_back('}');
    has_item_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    comma();
    out_.push_back('[');
    has_item_.push_back(false);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    out_.push_back(']');
    has_item_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::key(const char* name) {
    comma();
    out_.push_back('"');
    out_ += name;  // keys are library-controlled identifiers; no escaping needed
    out_ += "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    comma();
    out_ += format_double(v);
    return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
    comma();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<std::int64_t>(v)); }

JsonWriter& JsonWriter::value(bool v) {
    comma();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    comma();
    out_.push_back('"');
    for (char c : v) {
        switch (c) {
            case '"': out_ += "\\\""; break;
            case '\\': out_ += "\\\\"; break;
            case '\n': out_ += "\\n"; break;
            case '\r': out_ += "\\r"; break;
            case '\t': out_ += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out_ += buf;
                } else {
                    out_.push_back(c);
                }
        }
    }
    out_.push_back('"');
    return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

void append_report_fields(JsonWriter& w, const MotionReport& r, bool include_timing) {
    w.begin_object();
    w.key("stack_id").value(r.stack_id);
    w.key("method").value(method_name(r.method));
    w.key("mi").value(r.mi);
    w.key("rank_used").value(r.rank_used);
    w.key("effective_norm").value(r.effective_norm);
    // elapsed_ms is excluded from determinism guarantees; serialized as 0
    // unless timing is explicitly requested.
    w.key("elapsed_ms").value(include_timing ? r.elapsed_ms : 0.0);
    w.end_object();
}

std::string report_json(const std::vector<MotionReport>& reports, bool include_timing) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value("report_v1");
    w.key("items").begin_array();
    for (const MotionReport& r : reports) append_report_fields(w, r, include_timing);
    w.end_array();
    w.end_object();
    return w.str();
}

std::string outcomes_json(const std::vector<TrialOutcome>& outcomes, bool include_timing) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value("report_v1");
    w.key("items").begin_array();
    for (const TrialOutcome& o : outcomes) {
        w.begin_object();
        w.key("trial_seed").value(o.trial_seed);
        w.key("motion_free_id").value(o.motion_free_id);
        w.key("selected_id").value(o.selected_id);
        w.key("success").value(o.selected_id == o.motion_free_id);
        w.key("reports").begin_array();
        for (const MotionReport& r : o.reports) append_report_fields(w, r, include_timing);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

void write_report_json(const std::vector<MotionReport>& reports, const std::string& path,
                       bool include_timing) {
    write_text_file(path, report_json(reports, include_timing) + "\n");
}

void write_report_json(const std::vector<TrialOutcome>& outcomes, const std::string& path,
                       bool include_timing) {
    write_text_file(path, outcomes_json(outcomes, include_timing) + "\n");
}

std::string trajectory_json(const MotionTrajectory& traj, const TrajectoryMeta& meta) {
    JsonWriter w;
    w.begin_object();
    w.key("schema").value("trajectory_v1");
    w.key("interleaved").value(traj.interleaved);
    w.key("seed").value(meta.seed);
    w.key("config").begin_object();
    if (meta.mode == TrajectoryMeta::Mode::Linear) {
        w.key("mode").value("linear");
        w.key("rot_step_deg").begin_array();
        for (double v : meta.linear_rot_step_deg) w.value(v);
        w.end_array();
        w.key("trans_step_mm").begin_array();
        for (double v : meta.linear_trans_step_mm) w.value(v);
        w.end_array();
    } else {
        w.key("mode").value("random");
        w.key("local_max_rot_deg").value(meta.random.local_max_rot_deg);
        w.key("local_max_trans_mm").value(meta.random.local_max_trans_mm);
        w.key("global_offset_factor").value(meta.random.global_offset_factor);
        w.key("clamp_rot_deg").value(meta.random.clamp_rot_deg);
        w.key("clamp_trans_mm").value(meta.random.clamp_trans_mm);
        w.key("spline_smoothing").value(meta.random.spline_smoothing);
    }
    w.end_object();
    w.key("slices").begin_array();
    for (std::size_t i = 0; i < traj.transforms.size(); ++i) {
        const RigidTransform& t = traj.transforms[i];
        w.begin_object();
        w.key("index").value(static_cast<std::int64_t>(i));
        w.key("rot_deg").begin_array();
        for (double v : t.rotation_deg) w.value(v);
        w.end_array();
        w.key("trans_mm").begin_array();
        for (double v : t.translation_mm) w.value(v);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

void write_trajectory_json(const MotionTrajectory& traj, const TrajectoryMeta& meta,
                           const std::string& path) {
    write_text_file(path, trajectory_json(traj, meta) + "\n");
}

void write_text_file(const std::string& path, const std::string& contents) {
    write_file(path, contents.data(), contents.size());
}

}  // namespace stackselect
