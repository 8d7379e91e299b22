#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/geometry.hpp"
#include "gazedepth/image.hpp"

namespace gazedepth {

struct GazeSample {
    double t_ms = 0.0;
    double x_px = 0.0;
    double y_px = 0.0;
    std::optional<double> depth_m;  // eye-to-object distance; absent when the estimate failed
    bool valid = true;
};

struct FrameIndexEntry {
    double t_ms = 0.0;
    std::string frame_file;  // relative to the recording directory
};

struct RecordingMeta {
    std::string participant;
    std::string condition;  // LR / RL for benchmark tasks
    double depth_level_m = 0.0;
    double frame_rate_hz = 0.0;
};

struct GazeRecording {
    CameraIntrinsics intrinsics;
    std::vector<GazeSample> samples;
    std::vector<FrameIndexEntry> frames;
    RecordingMeta meta;
    std::filesystem::path root;  // directory the manifest was loaded from

    /// Frame whose time range covers t: the last entry with entry.t <= t.
    const FrameIndexEntry& frame_at(double t_ms) const {
        if (frames.empty()) throw std::runtime_error("recording has no frames");
        auto it = std::upper_bound(frames.begin(), frames.end(), t_ms,
                                   [](double t, const FrameIndexEntry& e) { return t < e.t_ms; });
        if (it == frames.begin()) return frames.front();
        return *(it - 1);
    }
};

struct Fixation {
    double start_ms = 0.0;
    double end_ms = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    std::optional<double> depth_m;       // median of member sample depths; absent if none present
    std::size_t first_sample = 0;        // inclusive index range into recording samples
    std::size_t last_sample = 0;
};

// ---------------------------------------------------------------------------
// Per-fixation depth aggregation.
//
// Single gaze rays can miss the target and report far-plane depths; the
// median bounds the influence of such outliers as long as they stay in the
// minority. Lower median for even counts.

inline double fixation_depth(std::span<const GazeSample> samples) {
    std::vector<double> depths;
    depths.reserve(samples.size());
    for (const auto& s : samples)
        if (s.depth_m) depths.push_back(*s.depth_m);
    if (depths.empty())
        throw std::runtime_error(
            "fixation_depth: no sample carries a depth estimate; skip or flag this fixation");
    auto mid = depths.begin() + (depths.size() - 1) / 2;
    std::nth_element(depths.begin(), mid, depths.end());
    return *mid;
}

// ---------------------------------------------------------------------------
// I-DT fixation detection.
//
// Dispersion of a window is (max_x - min_x) scaled to degrees on the x axis
// plus (max_y - min_y) scaled on the y axis, using the linear deg-per-pixel
// factors implied by the intrinsics. A window qualifies once it spans at
// least min_duration; it then grows while dispersion stays within the
// threshold. Invalid samples terminate windows.

inline std::vector<Fixation> detect_fixations(const GazeRecording& rec, double dispersion_max_deg,
                                              double min_duration_ms) {
    if (!(dispersion_max_deg > 0.0)) throw std::invalid_argument("dispersion_max must be > 0");
    if (!(min_duration_ms > 0.0)) throw std::invalid_argument("min_duration must be > 0");

    const double degpx_x = rad_to_deg(rec.intrinsics.h_fov) / rec.intrinsics.res_x;
    const double degpx_y = rad_to_deg(rec.intrinsics.v_fov) / rec.intrinsics.res_y;
    const auto& s = rec.samples;

    std::vector<Fixation> out;

    auto dispersion_ok = [&](std::size_t first, std::size_t last) {
        double min_x = s[first].x_px, max_x = s[first].x_px;
        double min_y = s[first].y_px, max_y = s[first].y_px;
        for (std::size_t i = first + 1; i <= last; ++i) {
            min_x = std::min(min_x, s[i].x_px);
            max_x = std::max(max_x, s[i].x_px);
            min_y = std::min(min_y, s[i].y_px);
            max_y = std::max(max_y, s[i].y_px);
        }
        return (max_x - min_x) * degpx_x + (max_y - min_y) * degpx_y <= dispersion_max_deg;
    };

    auto emit = [&](std::size_t first, std::size_t last) {
        Fixation f;
        f.start_ms = s[first].t_ms;
        f.end_ms = s[last].t_ms;
        f.first_sample = first;
        f.last_sample = last;
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = first; i <= last; ++i) {
            sx += s[i].x_px;
            sy += s[i].y_px;
        }
        const double n = static_cast<double>(last - first + 1);
        f.centroid_x = sx / n;
        f.centroid_y = sy / n;
        std::span<const GazeSample> members(s.data() + first, last - first + 1);
        bool any_depth = std::any_of(members.begin(), members.end(),
                                     [](const GazeSample& gs) { return gs.depth_m.has_value(); });
        if (any_depth) f.depth_m = fixation_depth(members);
        out.push_back(f);
    };

    // maximal runs of valid samples
    std::size_t i = 0;
    while (i < s.size()) {
        if (!s[i].valid) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end + 1 < s.size() && s[run_end + 1].valid) ++run_end;

        std::size_t w = i;
        while (w <= run_end) {
            // smallest window starting at w that spans min_duration
            std::size_t j = w;
            while (j <= run_end && s[j].t_ms - s[w].t_ms < min_duration_ms) ++j;
            if (j > run_end) break;
            if (dispersion_ok(w, j)) {
                while (j + 1 <= run_end && dispersion_ok(w, j + 1)) ++j;
                emit(w, j);
                w = j + 1;
            } else {
                ++w;
            }
        }
        i = run_end + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recording directory format:
//   recording.meta  key=value (participant, condition, depth_level_m,
//                   h_fov_deg, v_fov_deg, res_x, res_y, frame_rate_hz)
//   gaze.csv        t_ms,x_px,y_px,depth_m,valid   (depth empty when missing)
//   frames.csv      t_ms,frame_file
//   frames/*.png

inline void save_recording(const GazeRecording& rec, const std::filesystem::path& dir,
                           const std::vector<ImageRGB>* frame_images = nullptr) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "frames");

    KeyValueMap meta;
    meta["participant"] = rec.meta.participant;
    meta["condition"] = rec.meta.condition;
    meta["depth_level_m"] = format_double(rec.meta.depth_level_m);
    meta["h_fov_deg"] = format_double(rad_to_deg(rec.intrinsics.h_fov));
    meta["v_fov_deg"] = format_double(rad_to_deg(rec.intrinsics.v_fov));
    meta["res_x"] = std::to_string(rec.intrinsics.res_x);
    meta["res_y"] = std::to_string(rec.intrinsics.res_y);
    meta["frame_rate_hz"] = format_double(rec.meta.frame_rate_hz);
    write_kv_file(dir / "recording.meta", meta);

    {
        std::ofstream out(dir / "gaze.csv", std::ios::binary);
        out << "t_ms,x_px,y_px,depth_m,valid\n";
        for (const auto& s : rec.samples) {
            out << format_double(s.t_ms) << ',' << format_double(s.x_px) << ','
                << format_double(s.y_px) << ',';
            if (s.depth_m) out << format_double(*s.depth_m);
            out << ',' << (s.valid ? '1' : '0') << '\n';
        }
    }
    {
        std::ofstream out(dir / "frames.csv", std::ios::binary);
        out << "t_ms,frame_file\n";
        for (const auto& f : rec.frames) out << format_double(f.t_ms) << ',' << f.frame_file << '\n';
    }
    if (frame_images) {
        if (frame_images->size() != rec.frames.size())
            throw std::invalid_argument("save_recording: frame image count mismatch");
        for (std::size_t k = 0; k < rec.frames.size(); ++k)
            write_png(dir / rec.frames[k].frame_file, (*frame_images)[k]);
    }
}

inline GazeRecording load_recording(const std::filesystem::path& dir, Warnings* warnings = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a recording directory: " + dir.string());

    GazeRecording rec;
    rec.root = dir;

    const auto meta = read_kv_file(dir / "recording.meta");
    const std::string ctx = (dir / "recording.meta").string();
    rec.meta.participant = kv_require(meta, "participant", ctx);
    rec.meta.condition = kv_require(meta, "condition", ctx);
    rec.meta.depth_level_m = parse_double(kv_require(meta, "depth_level_m", ctx));
    rec.meta.frame_rate_hz = parse_double(kv_require(meta, "frame_rate_hz", ctx));
    rec.intrinsics.h_fov = deg_to_rad(parse_double(kv_require(meta, "h_fov_deg", ctx)));
    rec.intrinsics.v_fov = deg_to_rad(parse_double(kv_require(meta, "v_fov_deg", ctx)));
    rec.intrinsics.res_x = static_cast<int>(parse_long(kv_require(meta, "res_x", ctx)));
    rec.intrinsics.res_y = static_cast<int>(parse_long(kv_require(meta, "res_y", ctx)));
    rec.intrinsics.validate();
    if (!(rec.meta.frame_rate_hz > 0.0))
        throw std::runtime_error(ctx + ": frame_rate_hz must be > 0");

    // gaze.csv
    {
        std::ifstream in(dir / "gaze.csv", std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + (dir / "gaze.csv").string());
        std::string line;
        if (!std::getline(in, line) || std::string(trim(line)) != "t_ms,x_px,y_px,depth_m,valid")
            throw std::runtime_error((dir / "gaze.csv").string() +
                                     ": expected header 't_ms,x_px,y_px,depth_m,valid'");
        std::size_t row = 1;  // header was row 1
        while (std::getline(in, line)) {
            ++row;
            std::string_view sv = trim(line);
            if (sv.empty()) continue;
            auto fields = split(sv, ',');
            if (fields.size() != 5)
                throw std::runtime_error((dir / "gaze.csv").string() + ": row " +
                                         std::to_string(row) + ": expected 5 fields");
            GazeSample s;
            try {
                s.t_ms = parse_double(fields[0]);
                s.x_px = parse_double(fields[1]);
                s.y_px = parse_double(fields[2]);
                if (!std::string(trim(fields[3])).empty()) s.depth_m = parse_double(fields[3]);
                const std::string v(trim(fields[4]));
                if (v == "1") s.valid = true;
                else if (v == "0") s.valid = false;
                else throw std::runtime_error("valid flag must be 0 or 1");
            } catch (const std::exception& e) {
                throw std::runtime_error((dir / "gaze.csv").string() + ": row " +
                                         std::to_string(row) + ": " + e.what());
            }
            if (!rec.samples.empty() && s.t_ms < rec.samples.back().t_ms)
                throw std::runtime_error((dir / "gaze.csv").string() + ": row " +
                                         std::to_string(row) + ": timestamp decreases");
            if (s.depth_m && !(*s.depth_m > 0.0)) {
                warn(warnings, "gaze.csv row " + std::to_string(row) +
                                   ": non-positive depth, sample flagged invalid");
                s.depth_m.reset();
                s.valid = false;
            }
            if (s.valid && (s.x_px < 0.0 || s.x_px >= rec.intrinsics.res_x || s.y_px < 0.0 ||
                            s.y_px >= rec.intrinsics.res_y)) {
                warn(warnings, "gaze.csv row " + std::to_string(row) +
                                   ": gaze outside frame, sample flagged invalid");
                s.valid = false;
            }
            rec.samples.push_back(s);
        }
    }

    // frames.csv
    {
        std::ifstream in(dir / "frames.csv", std::ios::binary);
        if (!in) throw std::runtime_error("cannot open: " + (dir / "frames.csv").string());
        std::string line;
        if (!std::getline(in, line) || std::string(trim(line)) != "t_ms,frame_file")
            throw std::runtime_error((dir / "frames.csv").string() +
                                     ": expected header 't_ms,frame_file'");
        std::size_t row = 1;
        std::vector<std::string> missing;
        while (std::getline(in, line)) {
            ++row;
            std::string_view sv = trim(line);
            if (sv.empty()) continue;
            auto comma = sv.find(',');
            if (comma == std::string_view::npos)
                throw std::runtime_error((dir / "frames.csv").string() + ": row " +
                                         std::to_string(row) + ": expected 2 fields");
            FrameIndexEntry e;
            e.t_ms = parse_double(trim(sv.substr(0, comma)));
            e.frame_file = std::string(trim(sv.substr(comma + 1)));
            if (!rec.frames.empty() && e.t_ms < rec.frames.back().t_ms)
                throw std::runtime_error((dir / "frames.csv").string() + ": row " +
                                         std::to_string(row) + ": timestamp decreases");
            if (!fs::exists(dir / e.frame_file)) missing.push_back(e.frame_file);
            rec.frames.push_back(e);
        }
        if (!missing.empty()) {
            std::string msg = (dir / "frames.csv").string() + ": missing frame files:";
            for (const auto& m : missing) msg += " " + m;
            throw std::runtime_error(msg);
        }
    }

    if (rec.frames.empty()) throw std::runtime_error(dir.string() + ": recording has no frames");
    if (!rec.samples.empty() && rec.frames.front().t_ms > rec.samples.front().t_ms)
        throw std::runtime_error(dir.string() + ": frame manifest starts after the first sample");
    return rec;
}

// ---------------------------------------------------------------------------
// Fixation CSV (analysis output; not part of the recording directory)

inline void save_fixations(const std::vector<Fixation>& fixes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "start_ms,end_ms,centroid_x,centroid_y,depth_m,first_sample,last_sample\n";
    for (const auto& f : fixes) {
        out << format_double(f.start_ms) << ',' << format_double(f.end_ms) << ','
            << format_double(f.centroid_x) << ',' << format_double(f.centroid_y) << ',';
        if (f.depth_m) out << format_double(*f.depth_m);
        out << ',' << f.first_sample << ',' << f.last_sample << '\n';
    }
}

inline std::vector<Fixation> load_fixations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        std::string(trim(line)) != "start_ms,end_ms,centroid_x,centroid_y,depth_m,first_sample,last_sample")
        throw std::runtime_error(path.string() + ": bad fixation CSV header");
    std::vector<Fixation> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split(sv, ',');
        if (fields.size() != 7)
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     ": expected 7 fields");
        Fixation f;
        f.start_ms = parse_double(fields[0]);
        f.end_ms = parse_double(fields[1]);
        f.centroid_x = parse_double(fields[2]);
        f.centroid_y = parse_double(fields[3]);
        if (!std::string(trim(fields[4])).empty()) f.depth_m = parse_double(fields[4]);
        f.first_sample = static_cast<std::size_t>(parse_long(fields[5]));
        f.last_sample = static_cast<std::size_t>(parse_long(fields[6]));
        out.push_back(f);
    }
    return out;
}

}  // namespace gazedepth
