#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/geometry.hpp"
#include "gazedepth/image.hpp"
#include "gazedepth/recording.hpp"

namespace gazedepth {

struct CropRect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    bool operator==(const CropRect&) const = default;
};

/// Canonicalized thumbnail around one fixation.
struct Patch {
    ImageRGB pixels;               // canonical_px x canonical_px
    std::size_t fixation_id = 0;   // index into the source fixation list
    CropRect crop_rect;            // source-frame pixels; may extend past the frame
    PatchMode mode = PatchMode::Classic;
    double pad_fraction = 0.0;     // share of crop pixels that came from edge replication
};

/// Crop a size.width x size.height region centered on the gaze point, pad by
/// edge replication where the rect leaves the frame (the gaze point stays
/// centered), then resize to canonical_px squared.
inline Patch extract_patch(const ImageRGB& frame, double gaze_x, double gaze_y, PatchSizePx size,
                           int canonical_px) {
    if (gaze_x < 0.0 || gaze_x >= frame.width || gaze_y < 0.0 || gaze_y >= frame.height)
        throw std::invalid_argument("extract_patch: gaze point outside frame");
    if (size.width < 1 || size.height < 1 || size.width > frame.width || size.height > frame.height)
        throw std::invalid_argument("extract_patch: patch size outside [1, frame dims]");
    if (canonical_px < 1) throw std::invalid_argument("extract_patch: canonical_px must be >= 1");

    const int gx = static_cast<int>(std::lround(gaze_x));
    const int gy = static_cast<int>(std::lround(gaze_y));

    Patch p;
    p.crop_rect = {gx - size.width / 2, gy - size.height / 2, size.width, size.height};

    ImageRGB crop(size.width, size.height);
    std::size_t padded = 0;
    for (int y = 0; y < size.height; ++y) {
        const int sy = p.crop_rect.y0 + y;
        const int cy = std::clamp(sy, 0, frame.height - 1);
        for (int x = 0; x < size.width; ++x) {
            const int sx = p.crop_rect.x0 + x;
            const int cx = std::clamp(sx, 0, frame.width - 1);
            if (sx != cx || sy != cy) ++padded;
            const std::uint8_t* src = frame.px(cx, cy);
            crop.set(x, y, src[0], src[1], src[2]);
        }
    }
    p.pad_fraction = static_cast<double>(padded) /
                     (static_cast<double>(size.width) * static_cast<double>(size.height));
    p.pixels = resize_bilinear(crop, canonical_px, canonical_px);
    return p;
}

/// One thumbnail per fixation, sized per spec, taken from the frame at the
/// fixation's midpoint time. Depth-adaptive extraction skips fixations with
/// no depth estimate, keeping the fixation ids of the survivors.
inline std::vector<Patch> extract_scanpath_patches(const GazeRecording& rec,
                                                   const std::vector<Fixation>& fixes,
                                                   const PatchSpec& spec,
                                                   Warnings* warnings = nullptr) {
    spec.validate(rec.intrinsics);
    std::vector<Patch> out;
    out.reserve(fixes.size());
    std::map<std::string, ImageRGB> frame_cache;

    for (std::size_t i = 0; i < fixes.size(); ++i) {
        const Fixation& f = fixes[i];
        double distance = 0.0;
        if (spec.mode == PatchMode::DepthAdaptive) {
            if (!f.depth_m) {
                warn(warnings, "fixation " + std::to_string(i) +
                                   ": no depth estimate, skipped in depth-adaptive mode");
                continue;
            }
            distance = *f.depth_m;
        }
        const PatchSizePx size = patch_size_for(rec.intrinsics, spec, distance, warnings);

        const double mid_t = (f.start_ms + f.end_ms) / 2.0;
        const std::string& file = rec.frame_at(mid_t).frame_file;
        auto it = frame_cache.find(file);
        if (it == frame_cache.end()) it = frame_cache.emplace(file, read_png(rec.root / file)).first;

        Patch p = extract_patch(it->second, f.centroid_x, f.centroid_y, size, spec.canonical_px);
        p.fixation_id = i;
        p.mode = spec.mode;
        out.push_back(std::move(p));
    }
    return out;
}

/// Optional dump for visual inspection: patches/%04d_%s.png
inline void dump_patches(const std::vector<Patch>& patches, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& p : patches) {
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu_%s.png", p.fixation_id, to_string(p.mode));
        write_png(dir / name, p.pixels);
    }
}

}  // namespace gazedepth
