#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "gazedepth/common.hpp"

namespace gazedepth {

/// Pinhole front-camera model: horizontal/vertical field of view in radians
/// plus sensor resolution in pixels.
struct CameraIntrinsics {
    double h_fov = 0.0;
    double v_fov = 0.0;
    int res_x = 0;
    int res_y = 0;

    void validate() const {
        if (!(h_fov > 0.0) || !(h_fov < kPi)) throw std::domain_error("h_fov must be in (0, pi)");
        if (!(v_fov > 0.0) || !(v_fov < kPi)) throw std::domain_error("v_fov must be in (0, pi)");
        if (res_x < 1 || res_y < 1) throw std::domain_error("resolution must be >= 1 px per axis");
    }
};

/// Integer patch dimensions after rounding and clamping to the frame.
/// exceeds_frame is set when the requested extent spilled past an axis.
struct PatchSizePx {
    int width = 1;
    int height = 1;
    bool exceeds_frame = false;

    bool operator==(const PatchSizePx&) const = default;
};

enum class PatchMode { Classic, DepthAdaptive };

inline const char* to_string(PatchMode m) {
    return m == PatchMode::Classic ? "classic" : "adaptive";
}

enum class SizePreset { Small, Mid, Large };

inline const char* to_string(SizePreset p) {
    switch (p) {
        case SizePreset::Small: return "small";
        case SizePreset::Mid: return "mid";
        default: return "large";
    }
}

/// How thumbnails are sized: a fixed visual angle theta (Classic) or a fixed
/// physical side length in meters (DepthAdaptive). canonical_px is the square
/// resize target fed to feature extraction.
struct PatchSpec {
    PatchMode mode = PatchMode::Classic;
    double theta = deg_to_rad(2.0);
    double actual_length = 0.08;
    int canonical_px = 64;

    void validate(const CameraIntrinsics& intr) const {
        if (canonical_px < 8) throw std::domain_error("canonical_px must be >= 8");
        if (mode == PatchMode::Classic) {
            if (!(theta > 0.0) || !(theta < std::min(intr.h_fov, intr.v_fov)))
                throw std::domain_error("theta must be in (0, min(H,V))");
        } else {
            if (!(actual_length > 0.0)) throw std::domain_error("actual_length must be > 0");
        }
    }
};

/// Preset angles and physical lengths for the Small/Mid/Large size categories:
/// theta = 2/5/10 degrees, c = 8/20/40 cm.
inline PatchSpec preset_spec(PatchMode mode, SizePreset preset, int canonical_px = 64) {
    PatchSpec spec;
    spec.mode = mode;
    spec.canonical_px = canonical_px;
    switch (preset) {
        case SizePreset::Small:
            spec.theta = deg_to_rad(2.0);
            spec.actual_length = 0.08;
            break;
        case SizePreset::Mid:
            spec.theta = deg_to_rad(5.0);
            spec.actual_length = 0.20;
            break;
        case SizePreset::Large:
            spec.theta = deg_to_rad(10.0);
            spec.actual_length = 0.40;
            break;
    }
    return spec;
}

/// Physical length subtended by visual angle theta at eye-to-object
/// distance d: c = 2 tan(theta/2) d.
inline double actual_length(double theta, double distance) {
    if (!(theta > 0.0) || !(theta < kPi)) throw std::domain_error("theta must be in (0, pi)");
    if (!(distance > 0.0)) throw std::domain_error("distance must be > 0");
    return 2.0 * std::tan(theta / 2.0) * distance;
}

/// Metric size (s_w, s_h) of the image plane at distance d.
struct PlaneDims {
    double width_m = 0.0;
    double height_m = 0.0;
};

inline PlaneDims image_plane_dimensions(const CameraIntrinsics& intr, double distance) {
    intr.validate();
    return {actual_length(intr.h_fov, distance), actual_length(intr.v_fov, distance)};
}

/// Pre-rounding patch extents in pixels; shared by both sizing modes.
struct PatchExtent {
    double width = 0.0;
    double height = 0.0;
};

/// Fixed-visual-angle patch extent. Depth-independent: the eye-to-object
/// distance cancels out of the tangent ratio.
inline PatchExtent classic_patch_extent(const CameraIntrinsics& intr, double theta) {
    intr.validate();
    if (!(theta > 0.0) || !(theta < kPi)) throw std::domain_error("theta must be in (0, pi)");
    const double t = std::tan(theta / 2.0);
    return {t / std::tan(intr.h_fov / 2.0) * intr.res_x,
            t / std::tan(intr.v_fov / 2.0) * intr.res_y};
}

/// Fixed-physical-length patch extent at eye-to-object distance d.
inline PatchExtent adaptive_patch_extent(const CameraIntrinsics& intr, double length_m,
                                         double distance) {
    intr.validate();
    if (!(length_m > 0.0)) throw std::domain_error("actual length must be > 0");
    if (!(distance > 0.0)) throw std::domain_error("distance must be > 0");
    return {length_m / (2.0 * distance * std::tan(intr.h_fov / 2.0)) * intr.res_x,
            length_m / (2.0 * distance * std::tan(intr.v_fov / 2.0)) * intr.res_y};
}

namespace detail {

inline PatchSizePx round_and_clamp(const PatchExtent& ext, const CameraIntrinsics& intr,
                                   Warnings* warnings, const char* what) {
    PatchSizePx out;
    long w = std::lround(ext.width);
    long h = std::lround(ext.height);
    out.exceeds_frame = w > intr.res_x || h > intr.res_y;
    out.width = static_cast<int>(std::clamp<long>(w, 1, intr.res_x));
    out.height = static_cast<int>(std::clamp<long>(h, 1, intr.res_y));
    if (out.exceeds_frame)
        warn(warnings, std::string(what) + ": patch exceeds frame, clamped to " +
                           std::to_string(out.width) + "x" + std::to_string(out.height));
    return out;
}

}  // namespace detail

/// Rounded, frame-clamped classic patch size. Angles at or past the camera
/// field of view clamp to the full frame on that axis and raise a warning.
inline PatchSizePx classic_patch_size(const CameraIntrinsics& intr, double theta,
                                      Warnings* warnings = nullptr) {
    return detail::round_and_clamp(classic_patch_extent(intr, theta), intr, warnings,
                                   "classic_patch_size");
}

/// Rounded, frame-clamped depth-adaptive patch size. Near objects can demand
/// more pixels than the frame has; that clamps with a warning rather than
/// failing, since close-range clipping is an expected regime.
inline PatchSizePx adaptive_patch_size(const CameraIntrinsics& intr, double length_m,
                                       double distance, Warnings* warnings = nullptr) {
    return detail::round_and_clamp(adaptive_patch_extent(intr, length_m, distance), intr, warnings,
                                   "adaptive_patch_size");
}

/// Patch size for a spec at a given (possibly unused) eye-to-object distance.
inline PatchSizePx patch_size_for(const CameraIntrinsics& intr, const PatchSpec& spec,
                                  double distance, Warnings* warnings = nullptr) {
    if (spec.mode == PatchMode::Classic) return classic_patch_size(intr, spec.theta, warnings);
    return adaptive_patch_size(intr, spec.actual_length, distance, warnings);
}

}  // namespace gazedepth
