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

#include <chrono>
#include <limits>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "stackselect/assess.hpp"
#include "stackselect/cpd.hpp"
#include "stackselect/error.hpp"
#include "stackselect/evalmetrics.hpp"
#include "stackselect/io.hpp"
#include "stackselect/metrics.hpp"
#include "stackselect/motion.hpp"
#include "stackselect/volume.hpp"

namespace ss = stackselect;

namespace {

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
int exit_code_for(ss::ErrorCode code) {
    switch (code) {
        case ss::ErrorCode::InvalidParameter:
        case ss::ErrorCode::RankTooLarge:
        case ss::ErrorCode::InsufficientStacks:
        case ss::ErrorCode::EmptyInput:
            return 2;
        case ss::ErrorCode::SingularSystem:
        case ss::ErrorCode::DegenerateTensor:
        case ss::ErrorCode::DegenerateTruth:
        case ss::ErrorCode::DivisionByZeroBaseline:
            return 4;
        default:
            return 3;
    }
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ss::Volume load_volume(const std::string& path) {
    if (has_suffix(path, ".nii")) return ss::read_nifti1(path);
    return ss::read_native_volume(path);
}

ss::Orientation parse_orientation(const std::string& s) {
    if (s == "axial") return ss::Orientation::Axial;
    if (s == "coronal") return ss::Orientation::Coronal;
    if (s == "sagittal") return ss::Orientation::Sagittal;
    ss::fail(ss::ErrorCode::InvalidParameter,
             "unknown orientation '" + s + "' (expected axial, coronal, or sagittal)");
}

std::pair<int, int> parse_ranks(const std::string& s) {
    int lo = 0;
    int hi = 0;
    const std::size_t dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            lo = hi = std::stoi(s);
        } else {
            lo = std::stoi(s.substr(0, dots));
            hi = std::stoi(s.substr(dots + 2));
        }
    } catch (const std::exception&) {
        ss::fail(ss::ErrorCode::InvalidParameter, "cannot parse rank range '" + s + "' (expected LO..HI)");
    }
    if (lo < 1 || hi < lo)
        ss::fail(ss::ErrorCode::InvalidParameter, "rank range '" + s + "' must satisfy 1 <= LO <= HI");
    return {lo, hi};
}

struct CorruptSpec {
    bool random = false;
    double rot = 5.0;
    double trans = 1.0;
};

CorruptSpec parse_corrupt(const std::string& s) {
    constexpr const char* kUsage = " must look like linear:ROT,TRANS or random:ROT,TRANS";
    CorruptSpec spec;
    std::size_t prefix = 0;
    if (s.rfind("linear:", 0) == 0) {
        prefix = 7;
    } else if (s.rfind("random:", 0) == 0) {
        prefix = 7;
        spec.random = true;
    } else {
        ss::fail(ss::ErrorCode::InvalidParameter, "corruption spec '" + s + "'" + kUsage);
    }
    const std::string body = s.substr(prefix);
    const std::size_t comma = body.find(',');
    if (comma == std::string::npos)
        ss::fail(ss::ErrorCode::InvalidParameter, "corruption spec '" + s + "'" + kUsage);
    try {
        spec.rot = std::stod(body.substr(0, comma));
        spec.trans = std::stod(body.substr(comma + 1));
    } catch (const std::exception&) {
        ss::fail(ss::ErrorCode::InvalidParameter, "corruption spec '" + s + "'" + kUsage);
    }
    return spec;
}

void print_doc(const std::string& doc) {
    std::fwrite(doc.data(), 1, doc.size(), stdout);
    std::fputc('\n', stdout);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct PhantomArgs {
    int size = 64;
    std::int64_t seed = 0;
    std::string out;
    std::string mask_out;
};

void run_phantom(const PhantomArgs& a) {
    auto [volume, mask] = ss::make_phantom(a.size, a.seed);
    ss::write_native(a.out, volume);
    if (!a.mask_out.empty()) ss::write_native(a.mask_out, mask);
}

struct SimulateArgs {
    std::string input;
    std::string mask;
    std::string mode = "linear";
    std::string orientation = "axial";
    double thickness = 2.0;
    double rot_step = 0.0;
    double trans_step = 0.0;
    double rot_base = 0.0;
    double trans_base = 0.0;
    std::string rot_axis = "all";
    std::int64_t seed = 0;
    ss::RandomMotionConfig random;
    std::string out;
    std::string mask_out;
    std::string traj_out;
};

void run_simulate(const SimulateArgs& a) {
    const ss::Volume volume = load_volume(a.input);
    const ss::Mask mask = ss::read_native_mask(a.mask);
    const ss::Orientation orientation = parse_orientation(a.orientation);
    const int n = ss::stack_slice_count(volume, orientation, a.thickness);

    ss::MotionTrajectory traj;
    ss::TrajectoryMeta meta;
    if (a.mode == "linear") {
        std::array<double, 3> rot{a.rot_step, a.rot_step, a.rot_step};
        if (a.rot_axis == "x")
            rot = {a.rot_step, 0.0, 0.0};
        else if (a.rot_axis == "y")
            rot = {0.0, a.rot_step, 0.0};
        else if (a.rot_axis == "z")
            rot = {0.0, 0.0, a.rot_step};
        else if (a.rot_axis != "all")
            ss::fail(ss::ErrorCode::InvalidParameter,
                     "unknown rot axis '" + a.rot_axis + "' (expected x, y, z, or all)");
        const std::array<double, 3> trans{a.trans_step, a.trans_step, a.trans_step};
        const std::array<double, 3> rot_base{a.rot_base, a.rot_base, a.rot_base};
        const std::array<double, 3> trans_base{a.trans_base, a.trans_base, a.trans_base};
        traj = ss::linear_trajectory(n, rot, trans, rot_base, trans_base);
        meta.mode = ss::TrajectoryMeta::Mode::Linear;
        meta.linear_rot_step_deg = rot;
        meta.linear_trans_step_mm = trans;
    } else if (a.mode == "random") {
        ss::RandomMotionConfig cfg = a.random;
        cfg.seed = a.seed;
        traj = ss::random_trajectory(n, cfg);
        meta.mode = ss::TrajectoryMeta::Mode::Random;
        meta.random = cfg;
        meta.seed = a.seed;
    } else {
        ss::fail(ss::ErrorCode::InvalidParameter, "unknown mode '" + a.mode + "' (expected linear or random)");
    }

    auto [stack, stack_mask] = ss::apply_motion(volume, mask, traj, orientation, a.thickness);
    ss::write_native(a.out, stack);
    if (!a.mask_out.empty()) ss::write_native(a.mask_out, stack_mask);
    ss::write_trajectory_json(traj, meta, a.traj_out);
}

struct AssessArgs {
    std::string input;
    std::string mask;
    std::string method = "cp";
    int rank = 0;
    double spacing = 0.0;
    std::int64_t seed = 0;
    bool timing = false;
};

void run_assess(const AssessArgs& a) {
    const ss::Volume stack = load_volume(a.input);
    const ss::Mask mask = ss::read_native_mask(a.mask);
    ss::AssessConfig cfg;
    cfg.method = ss::method_from_name(a.method);
    cfg.rank = a.rank;
    cfg.target_spacing = a.spacing;
    cfg.als.init_seed = a.seed;
    const ss::MotionReport report = ss::assess_stack(stack, mask, cfg, a.input);
    print_doc(ss::report_json({report}, a.timing));
}

struct SelectArgs {
    std::string method = "cp";
    int rank = 0;
    double spacing = 0.0;
    std::int64_t seed = 0;
    bool timing = false;
    std::vector<std::string> paths;
};

void run_select(const SelectArgs& a) {
    if (a.paths.size() % 2 != 0)
        ss::fail(ss::ErrorCode::InvalidParameter,
                 "stacks must be given as alternating STACK MASK path pairs");
    std::vector<ss::StackInput> stacks;
    for (std::size_t i = 0; i + 1 < a.paths.size(); i += 2) {
        ss::StackInput s;
        s.volume = load_volume(a.paths[i]);
        s.mask = ss::read_native_mask(a.paths[i + 1]);
        s.id = a.paths[i];
        stacks.push_back(std::move(s));
    }
    ss::AssessConfig cfg;
    cfg.method = ss::method_from_name(a.method);
    cfg.rank = a.rank;
    cfg.target_spacing = a.spacing;
    cfg.als.init_seed = a.seed;
    auto [winner, reports] = ss::select_reference(stacks, cfg);

    ss::JsonWriter w;
    w.begin_object();
    w.key("schema").value("report_v1");
    w.key("selected").value(winner);
    w.key("tie_break").value("lowest indicator, earliest input order");
    w.key("items").begin_array();
    for (const ss::MotionReport& r : reports) ss::append_report_fields(w, r, a.timing);
    w.end_array();
    w.end_object();
    print_doc(w.str());
}

struct RankSweepArgs {
    std::string input;
    std::string mask;
    std::string method = "cp";
    std::string ranks = "1..50";
    std::string corrupt = "linear:5,1";
    std::string orientation = "axial";
    double thickness = 2.0;
    double spacing = 0.0;
    std::int64_t seed = 0;
    int als_iterations = 0;
};

void run_rank_sweep(const RankSweepArgs& a) {
    const ss::Volume volume = load_volume(a.input);
    const ss::Mask mask = ss::read_native_mask(a.mask);
    const ss::Orientation orientation = parse_orientation(a.orientation);
    const auto [lo, hi] = parse_ranks(a.ranks);
    const CorruptSpec spec = parse_corrupt(a.corrupt);

    const int n = ss::stack_slice_count(volume, orientation, a.thickness);
    // Both acquisitions carry the same half-voxel pose offset so the baseline
    // interpolates off-lattice exactly like the corrupted stack; an on-lattice
    // baseline keeps fine-scale energy the moving stack loses and skews the
    // ratio at high rank.
    const ss::MotionTrajectory clean_traj = ss::linear_trajectory(n, 0.0, 0.0, 0.0, 0.5);
    ss::MotionTrajectory corrupt_traj;
    if (spec.random) {
        ss::RandomMotionConfig motion;
        motion.local_max_rot_deg = spec.rot;
        motion.local_max_trans_mm = spec.trans;
        motion.seed = a.seed;
        corrupt_traj = ss::random_trajectory(n, motion);
    } else {
        corrupt_traj = ss::linear_trajectory(n, {spec.rot, spec.rot, spec.rot},
                                             {spec.trans, spec.trans, spec.trans}, {0.0, 0.0, 0.0},
                                             {0.5, 0.5, 0.5});
    }
    auto [clean, clean_mask] = ss::apply_motion(volume, mask, clean_traj, orientation, a.thickness);
    auto [corrupt, corrupt_mask] = ss::apply_motion(volume, mask, corrupt_traj, orientation, a.thickness);

    std::string csv = "rank,rmi,elapsed_ms\n";
    if (a.method == "cp") {
        const double spacing = a.spacing > 0.0 ? a.spacing : ss::default_target_spacing(clean);
        auto [clean_iso, clean_iso_mask] = ss::resample_isotropic(clean, clean_mask, spacing);
        auto [corrupt_iso, corrupt_iso_mask] = ss::resample_isotropic(corrupt, corrupt_mask, spacing);
        const double clean_volume = static_cast<double>(ss::effective_volume(clean_iso_mask));
        const double corrupt_volume = static_cast<double>(ss::effective_volume(corrupt_iso_mask));

        ss::AlsConfig als;
        als.init_seed = a.seed;
        if (a.als_iterations > 0) {
            // Exact iteration count: keeps per-rank cost proportional to rank,
            // which is what the timing column is meant to expose.
            als.max_iterations = a.als_iterations;
            als.fit_tolerance = std::numeric_limits<double>::min();
        }
        for (int rank = lo; rank <= hi; ++rank) {
            als.rank = rank;
            const auto start = Clock::now();
            // Each rank refits from the same seeded initialization: the sweep
            // reports the rank-r fit itself, not the tail of a continued
            // optimization, and per-rank cost stays proportional to rank.
            const ss::CpResult clean_res = ss::cp_als(clean_iso, als);
            const ss::CpResult corrupt_res = ss::cp_als(corrupt_iso, als);
            const double elapsed = ms_since(start);
            const double mi_clean = (1.0 - clean_res.fit_history.back()) / clean_volume;
            const double mi_corrupt = (1.0 - corrupt_res.fit_history.back()) / corrupt_volume;
            csv += std::to_string(rank) + "," + ss::format_double(ss::rmi(mi_corrupt, mi_clean)) +
                   "," + ss::format_double(elapsed) + "\n";
        }
    } else if (a.method == "svd-rss") {
        const double spacing = a.spacing > 0.0 ? a.spacing : ss::default_target_spacing(clean);
        auto [clean_iso, clean_iso_mask] = ss::resample_isotropic(clean, clean_mask, spacing);
        const int max_rank = std::min({clean_iso.dims[0], clean_iso.dims[1], clean_iso.dims[2]});
        if (hi > max_rank)
            ss::fail(ss::ErrorCode::RankTooLarge, "rank " + std::to_string(hi) +
                                                      " exceeds the re-sliced row count " +
                                                      std::to_string(max_rank));
        ss::AssessConfig cfg;
        cfg.method = ss::Method::SvdRss;
        cfg.target_spacing = a.spacing;
        for (int rank = lo; rank <= hi; ++rank) {
            cfg.rank = rank;
            const auto start = Clock::now();
            const double mi_clean = ss::mi_svd_rss(clean, clean_mask, cfg).mi;
            const double mi_corrupt = ss::mi_svd_rss(corrupt, corrupt_mask, cfg).mi;
            const double elapsed = ms_since(start);
            csv += std::to_string(rank) + "," + ss::format_double(ss::rmi(mi_corrupt, mi_clean)) +
                   "," + ss::format_double(elapsed) + "\n";
        }
    } else {
        ss::fail(ss::ErrorCode::InvalidParameter,
                 "rank sweeps support methods cp and svd-rss, not '" + a.method + "'");
    }
    std::fwrite(csv.data(), 1, csv.size(), stdout);
}

struct TrialSuiteArgs {
    int trials = 50;
    std::int64_t seed = 0;
    std::string method = "all";
    int size = 64;
    double thickness = 2.0;
    int rank = 0;
    std::string out;
    bool timing = false;
};

void run_trial_suite(const TrialSuiteArgs& a) {
    std::vector<ss::Method> methods;
    if (a.method == "all") {
        methods = {ss::Method::CP, ss::Method::SvdRss, ss::Method::SvdFs};
    } else {
        methods = {ss::method_from_name(a.method)};
    }

    ss::JsonWriter full;
    full.begin_object();
    full.key("schema").value("report_v1");
    full.key("trials").value(a.trials);
    full.key("methods").begin_array();

    ss::JsonWriter summary;
    summary.begin_object();
    summary.key("schema").value("report_v1");
    summary.key("trials").value(a.trials);
    summary.key("success_rates").begin_object();

    for (ss::Method method : methods) {
        ss::TrialSuiteConfig cfg;
        cfg.phantom_size = a.size;
        cfg.slice_thickness_mm = a.thickness;
        cfg.motion.seed = a.seed;
        cfg.assess.method = method;
        cfg.assess.rank = a.rank;
        const std::vector<ss::TrialOutcome> outcomes =
            ss::run_trial_suite({a.seed}, cfg, a.trials);
        const double rate = ss::success_rate(outcomes);

        full.begin_object();
        full.key("method").value(ss::method_name(method));
        full.key("success_rate").value(rate);
        full.key("items").begin_array();
        for (const ss::TrialOutcome& o : outcomes) {
            full.begin_object();
            full.key("trial_seed").value(o.trial_seed);
            full.key("motion_free_id").value(o.motion_free_id);
            full.key("selected_id").value(o.selected_id);
            full.key("success").value(o.selected_id == o.motion_free_id);
            full.key("reports").begin_array();
            for (const ss::MotionReport& r : o.reports) ss::append_report_fields(full, r, a.timing);
            full.end_array();
            full.end_object();
        }
        full.end_array();
        full.end_object();

        summary.key(ss::method_name(method)).value(rate);
    }
    full.end_array();
    full.end_object();
    summary.end_object();
    summary.end_object();

    if (!a.out.empty()) ss::write_text_file(a.out, full.str() + "\n");
    print_doc(summary.str());
}

struct EvaluateArgs {
    std::string metric = "ssim";
    std::vector<std::string> paths;
    std::string mask_path;
    std::string out;
};

void run_evaluate(const EvaluateArgs& a) {
    if (a.paths.size() != 2)
        ss::fail(ss::ErrorCode::InvalidParameter, "evaluate needs exactly two volumes: TEST REFERENCE");
    const ss::Volume test = load_volume(a.paths[0]);
    const ss::Volume reference = load_volume(a.paths[1]);
    ss::Mask mask;
    const ss::Mask* mask_ptr = nullptr;
    if (!a.mask_path.empty()) {
        mask = ss::read_native_mask(a.mask_path);
        mask_ptr = &mask;
    }

    double value = 0.0;
    if (a.metric == "ssim") {
        value = ss::ssim(test, reference, {}, mask_ptr);
    } else if (a.metric == "nrmse") {
        value = ss::nrmse(test, reference, mask_ptr);
    } else if (a.metric == "dssim") {
        const ss::Volume map = ss::dssim_map(test, reference, {}, mask_ptr);
        double sum = 0.0;
        for (double v : map.data) sum += v;
        value = map.data.empty() ? 0.0 : sum / static_cast<double>(map.data.size());
        if (!a.out.empty()) ss::write_native(a.out, map);
    } else {
        ss::fail(ss::ErrorCode::InvalidParameter,
                 "unknown metric '" + a.metric + "' (expected ssim, nrmse, or dssim)");
    }

    ss::JsonWriter w;
    w.begin_object();
    w.key("schema").value("report_v1");
    w.key("metric").value(a.metric);
    w.key("value").value(value);
    w.end_object();
    print_doc(w.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion assessment and reference stack selection for multi-stack MRI"};
    app.require_subcommand(1);
    bool json_flag = false;  // JSON is the default; the flag is accepted for pipelines
    app.add_flag("--json", json_flag, "emit JSON on stdout (default)")->group("");

    PhantomArgs phantom;
    CLI::App* cmd_phantom = app.add_subcommand("phantom", "Generate a deterministic synthetic volume");
    cmd_phantom->add_option("--size", phantom.size, "cube edge length in voxels");
    cmd_phantom->add_option("--seed", phantom.seed, "shape/texture seed");
    cmd_phantom->add_option("-o,--out", phantom.out, "output volume path")->required();
    cmd_phantom->add_option("--mask-out", phantom.mask_out, "optional output mask path");

    SimulateArgs simulate;
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Acquire a motion-corrupted stack from a volume");
    cmd_simulate->add_option("-i,--input", simulate.input, "isotropic input volume")->required();
    cmd_simulate->add_option("--mask", simulate.mask, "input mask")->required();
    cmd_simulate->add_option("--mode", simulate.mode, "linear or random");
    cmd_simulate->add_option("--orientation", simulate.orientation, "axial, coronal, or sagittal");
    cmd_simulate->add_option("--thickness", simulate.thickness, "slice thickness in mm");
    cmd_simulate->add_option("--rot-step", simulate.rot_step, "linear: per-slice rotation step (deg)");
    cmd_simulate->add_option("--trans-step", simulate.trans_step, "linear: per-slice translation step (mm)");
    cmd_simulate->add_option("--rot-base", simulate.rot_base, "linear: constant rotation offset (deg)");
    cmd_simulate->add_option("--trans-base", simulate.trans_base, "linear: constant translation offset (mm)");
    cmd_simulate->add_option("--rot-axis", simulate.rot_axis, "linear: rotation axis (x, y, z, or all)");
    cmd_simulate->add_option("--seed", simulate.seed, "random: trajectory seed");
    cmd_simulate->add_option("--local-rot", simulate.random.local_max_rot_deg, "random: local rotation bound (deg)");
    cmd_simulate->add_option("--local-trans", simulate.random.local_max_trans_mm, "random: local translation bound (mm)");
    cmd_simulate->add_option("--global-factor", simulate.random.global_offset_factor, "random: global offset factor");
    cmd_simulate->add_option("--smoothing", simulate.random.spline_smoothing, "random: spline roughness in [0,1)");
    cmd_simulate->add_option("-o,--out", simulate.out, "output stack path")->required();
    cmd_simulate->add_option("--mask-out", simulate.mask_out, "optional output stack-mask path");
    cmd_simulate->add_option("--traj-out", simulate.traj_out, "trajectory JSON path")->required();

    AssessArgs assess;
    CLI::App* cmd_assess = app.add_subcommand("assess", "Compute the motion indicator of one stack");
    cmd_assess->add_option("-i,--input", assess.input, "stack volume")->required();
    cmd_assess->add_option("--mask", assess.mask, "stack mask")->required();
    cmd_assess->add_option("--method", assess.method, "cp, svd-rss, or svd-fs");
    cmd_assess->add_option("--rank", assess.rank, "truncation rank (0 = method default)");
    cmd_assess->add_option("--spacing", assess.spacing, "isotropic target spacing in mm (0 = auto)");
    cmd_assess->add_option("--seed", assess.seed, "decomposition init seed");
    cmd_assess->add_flag("--timing", assess.timing, "include measured elapsed_ms in the report");

    SelectArgs select;
    CLI::App* cmd_select = app.add_subcommand("select", "Pick the reference stack with the lowest indicator");
    cmd_select->add_option("--method", select.method, "cp, svd-rss, or svd-fs");
    cmd_select->add_option("--rank", select.rank, "truncation rank (0 = method default)");
    cmd_select->add_option("--spacing", select.spacing, "isotropic target spacing in mm (0 = auto)");
    cmd_select->add_option("--seed", select.seed, "decomposition init seed");
    cmd_select->add_flag("--timing", select.timing, "include measured elapsed_ms in reports");
    cmd_select->add_option("paths", select.paths, "alternating STACK MASK path pairs")->expected(-1);

    RankSweepArgs sweep;
    CLI::App* cmd_sweep = app.add_subcommand("rank-sweep", "RMI and timing around a rank range");
    cmd_sweep->add_option("-i,--input", sweep.input, "isotropic input volume")->required();
    cmd_sweep->add_option("--mask", sweep.mask, "input mask")->required();
    cmd_sweep->add_option("--method", sweep.method, "cp or svd-rss");
    cmd_sweep->add_option("--ranks", sweep.ranks, "rank range LO..HI");
    cmd_sweep->add_option("--corrupt", sweep.corrupt, "corruption spec, e.g. linear:5,1");
    cmd_sweep->add_option("--orientation", sweep.orientation, "stack orientation for the simulated pair");
    cmd_sweep->add_option("--thickness", sweep.thickness, "slice thickness in mm");
    cmd_sweep->add_option("--spacing", sweep.spacing, "isotropic target spacing in mm (0 = auto)");
    cmd_sweep->add_option("--seed", sweep.seed, "decomposition init seed");
    cmd_sweep->add_option("--als-iters", sweep.als_iterations, "cap ALS iterations per rank (0 = default)");
    bool csv_flag = false;
    cmd_sweep->add_flag("--csv", csv_flag, "emit CSV on stdout (default)");

    TrialSuiteArgs trials;
    CLI::App* cmd_trials = app.add_subcommand("trial-suite", "Run seeded reference-selection trials");
    cmd_trials->add_option("--trials", trials.trials, "number of trials");
    cmd_trials->add_option("--seed", trials.seed, "suite seed");
    cmd_trials->add_option("--method", trials.method, "cp, svd-rss, svd-fs, or all");
    cmd_trials->add_option("--size", trials.size, "phantom edge length");
    cmd_trials->add_option("--thickness", trials.thickness, "slice thickness in mm");
    cmd_trials->add_option("--rank", trials.rank, "truncation rank (0 = method default)");
    cmd_trials->add_option("-o,--out", trials.out, "outcomes JSON path");
    cmd_trials->add_flag("--timing", trials.timing, "include measured elapsed_ms in reports");

    EvaluateArgs evaluate;
    CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "Volume similarity metrics");
    cmd_evaluate->add_option("--metric", evaluate.metric, "ssim, nrmse, or dssim");
    cmd_evaluate->add_option("paths", evaluate.paths, "TEST REFERENCE volume paths")->expected(2);
    cmd_evaluate->add_option("--mask", evaluate.mask_path, "restrict to a mask's bounding box");
    cmd_evaluate->add_option("-o,--out", evaluate.out, "dssim: output map path");

    for (CLI::App* sub : {cmd_phantom, cmd_simulate, cmd_assess, cmd_select, cmd_sweep,
                          cmd_trials, cmd_evaluate}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
        if (cmd_phantom->parsed()) run_phantom(phantom);
        if (cmd_simulate->parsed()) run_simulate(simulate);
        if (cmd_assess->parsed()) run_assess(assess);
        if (cmd_select->parsed()) run_select(select);
        if (cmd_sweep->parsed()) run_rank_sweep(sweep);
        if (cmd_trials->parsed()) run_trial_suite(trials);
        if (cmd_evaluate->parsed()) run_evaluate(evaluate);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
