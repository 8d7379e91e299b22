#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/geometry.hpp"
#include "gazedepth/image.hpp"
#include "gazedepth/recording.hpp"

namespace gazedepth {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

/// World frame: x right, y up, z forward. The camera sits at `position` and
/// looks straight down +z (participants face the table).
struct CameraPose {
    Vec3 position;
};

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
};

enum class TexturePattern { StripesH, StripesV, StripesDiag, Checker, Blobs, Rings };

/// Upright textured rectangle standing on the table plane (y = 0), facing the
/// camera. extent.z is a nominal thickness for the overlap invariant.
struct SceneObject {
    std::string id;
    Vec3 center;       // (x, h/2, z_face)
    Vec3 extent;       // (width, height, thickness)
    TexturePattern pattern = TexturePattern::Checker;
    Color color_a, color_b;
    double porosity = 0.0;  // fraction of surface cells a ray passes through
};

struct SceneSpec {
    std::vector<SceneObject> objects;
    // table plane y = 0 within these bounds; wall plane z = wall_z
    double table_x_half = 0.75;
    double table_z_min = -0.3;
    double table_z_max = 0.55;
    double wall_z = 5.0;
    double porosity_cell_m = 0.02;

    void validate() const {
        for (const auto& o : objects)
            if (!(o.porosity >= 0.0) || !(o.porosity < 1.0))
                throw std::invalid_argument("scene: porosity must be in [0, 1)");
        for (std::size_t i = 0; i < objects.size(); ++i)
            for (std::size_t j = i + 1; j < objects.size(); ++j) {
                const auto& a = objects[i];
                const auto& b = objects[j];
                const bool apart = std::abs(a.center.x - b.center.x) * 2.0 >= a.extent.x + b.extent.x ||
                                   std::abs(a.center.y - b.center.y) * 2.0 >= a.extent.y + b.extent.y ||
                                   std::abs(a.center.z - b.center.z) * 2.0 >= a.extent.z + b.extent.z;
                if (!apart)
                    throw std::invalid_argument("scene: objects " + a.id + " and " + b.id + " overlap");
            }
    }
};

/// Six objects in a row on the table at alternating depths, ordered
/// V1 R1 R2 V2 R3 V3 from left to right. V1 is porous so gaze rays can pass
/// through it; R2 is the only red-family object, which lets image-space masks
/// isolate it.
inline SceneSpec build_benchmark_scene() {
    SceneSpec scene;
    // Positions keep all six objects inside a 100-degree frame and free of
    // mutual occlusion from every standing distance down to 0.5 m.
    const double near_z = 0.0, far_z = 0.12;
    auto add = [&](std::string id, double x, double z, double w, double h, TexturePattern pat,
                   Color a, Color b, double porosity) {
        SceneObject o;
        o.id = std::move(id);
        o.center = {x, h / 2.0, z};
        o.extent = {w, h, 0.02};
        o.pattern = pat;
        o.color_a = a;
        o.color_b = b;
        o.porosity = porosity;
        scene.objects.push_back(o);
    };
    add("V1", -0.44, near_z, 0.15, 0.34, TexturePattern::Blobs, {40, 120, 50}, {15, 60, 25}, 0.4);
    add("R1", -0.27, far_z, 0.13, 0.26, TexturePattern::StripesDiag, {30, 160, 140}, {10, 80, 70}, 0.0);
    add("R2", -0.02, near_z, 0.24, 0.46, TexturePattern::StripesH, {190, 40, 30}, {230, 110, 50}, 0.0);
    add("V2", 0.21, far_z, 0.13, 0.30, TexturePattern::Rings, {225, 225, 220}, {120, 120, 130}, 0.0);
    add("R3", 0.37, near_z, 0.15, 0.28, TexturePattern::Checker, {45, 45, 50}, {170, 175, 180}, 0.0);
    add("V3", 0.62, far_z, 0.13, 0.30, TexturePattern::StripesV, {40, 70, 190}, {220, 200, 60}, 0.0);
    scene.validate();
    return scene;
}

/// Front-camera model used by the synthetic benchmark.
inline CameraIntrinsics benchmark_intrinsics() {
    return {deg_to_rad(100.0), deg_to_rad(70.0), 640, 480};
}

inline std::size_t benchmark_guitar_index() { return 2; }  // R2

/// R2's texture is the only red-dominant content in the scene.
inline bool is_guitar_red(const std::uint8_t* px) {
    return px[0] >= 100 && px[0] * 10 >= px[1] * 16 && px[0] * 10 >= px[2] * 16;
}

// ---------------------------------------------------------------------------
// Ray casting

struct RayHit {
    double distance = 0.0;   // euclidean eye-to-surface distance
    int object = -1;         // index into scene.objects; -2 table, -3 wall
    double u = 0.0, v = 0.0; // surface coordinates in [0,1]
};

namespace detail {

inline bool porous_void(const SceneSpec& scene, std::size_t obj_idx, double local_x,
                        double local_y) {
    const auto& o = scene.objects[obj_idx];
    if (o.porosity <= 0.0) return false;
    const auto cx = static_cast<std::int64_t>(std::floor(local_x / scene.porosity_cell_m));
    const auto cy = static_cast<std::int64_t>(std::floor(local_y / scene.porosity_cell_m));
    std::uint64_t h = splitmix64(0x5eed0000u + obj_idx);
    h = splitmix64(h ^ static_cast<std::uint64_t>(cx) * 0x9e3779b97f4a7c15ULL);
    h = splitmix64(h ^ static_cast<std::uint64_t>(cy) * 0xc2b2ae3d27d4eb4fULL);
    const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    return unit < o.porosity;
}

}  // namespace detail

/// Nearest surface along origin + t*dir (dir need not be unit length).
inline RayHit trace_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
    RayHit best;
    best.distance = std::numeric_limits<double>::infinity();
    const double dn = norm(dir);

    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& o = scene.objects[i];
        const double z_face = o.center.z;
        if (dir.z <= 0.0) continue;
        const double t = (z_face - origin.z) / dir.z;
        if (t <= 0.0) continue;
        const Vec3 p = origin + dir * t;
        const double lx = p.x - (o.center.x - o.extent.x / 2.0);
        const double ly = p.y;  // objects stand on the table plane
        if (lx < 0.0 || lx > o.extent.x || ly < 0.0 || ly > o.extent.y) continue;
        if (detail::porous_void(scene, i, lx, ly)) continue;
        const double dist = t * dn;
        if (dist < best.distance) {
            best.distance = dist;
            best.object = static_cast<int>(i);
            best.u = lx / o.extent.x;
            best.v = ly / o.extent.y;
        }
    }
    // table
    if (dir.y < 0.0 && origin.y > 0.0) {
        const double t = -origin.y / dir.y;
        const Vec3 p = origin + dir * t;
        if (std::abs(p.x) <= scene.table_x_half && p.z >= scene.table_z_min &&
            p.z <= scene.table_z_max) {
            const double dist = t * dn;
            if (dist < best.distance) {
                best.distance = dist;
                best.object = -2;
                best.u = (p.x + scene.table_x_half) / (2.0 * scene.table_x_half);
                best.v = (p.z - scene.table_z_min) / (scene.table_z_max - scene.table_z_min);
            }
        }
    }
    // wall (infinite plane, catches everything pointing forward)
    if (dir.z > 0.0) {
        const double t = (scene.wall_z - origin.z) / dir.z;
        const Vec3 p = origin + dir * t;
        const double dist = t * dn;
        if (dist < best.distance) {
            best.distance = dist;
            best.object = -3;
            best.u = p.x * 0.25 + 0.5;
            best.v = p.y * 0.25 + 0.5;
        }
    }
    return best;
}

/// Ray direction through a continuous pixel coordinate.
inline Vec3 pixel_ray_dir(const CameraIntrinsics& intr, double px, double py) {
    return {(2.0 * px / intr.res_x - 1.0) * std::tan(intr.h_fov / 2.0),
            (1.0 - 2.0 * py / intr.res_y) * std::tan(intr.v_fov / 2.0), 1.0};
}

/// Projection of a world point to continuous pixel coordinates.
inline std::array<double, 2> project_point(const CameraIntrinsics& intr, const CameraPose& cam,
                                           const Vec3& p) {
    const Vec3 d = p - cam.position;
    if (d.z <= 0.0) throw std::domain_error("project_point: point behind camera");
    const double nx = d.x / (d.z * std::tan(intr.h_fov / 2.0));
    const double ny = d.y / (d.z * std::tan(intr.v_fov / 2.0));
    return {(nx + 1.0) / 2.0 * intr.res_x, (1.0 - ny) / 2.0 * intr.res_y};
}

inline RayHit cast_gaze_hit(const SceneSpec& scene, const CameraPose& cam,
                            const CameraIntrinsics& intr, double px, double py) {
    if (px < 0.0 || px >= intr.res_x || py < 0.0 || py >= intr.res_y)
        throw std::invalid_argument("cast_gaze_ray: pixel outside frame");
    return trace_ray(scene, cam.position, pixel_ray_dir(intr, px, py));
}

/// Eye-to-surface distance for the gaze ray through a pixel. Porous cells on
/// V1-style objects let the ray continue to whatever lies behind.
inline double cast_gaze_ray(const SceneSpec& scene, const CameraPose& cam,
                            const CameraIntrinsics& intr, double px, double py) {
    return cast_gaze_hit(scene, cam, intr, px, py).distance;
}

// ---------------------------------------------------------------------------
// Texturing + frame rendering

namespace detail {

inline double cell_hash01(std::uint64_t salt, double x_m, double y_m, double cell_m) {
    const auto cx = static_cast<std::int64_t>(std::floor(x_m / cell_m));
    const auto cy = static_cast<std::int64_t>(std::floor(y_m / cell_m));
    std::uint64_t h = splitmix64(salt ^ static_cast<std::uint64_t>(cx) * 0x9e3779b97f4a7c15ULL);
    h = splitmix64(h ^ static_cast<std::uint64_t>(cy) * 0xc2b2ae3d27d4eb4fULL);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint8_t shade_channel(int v, int delta) {
    return static_cast<std::uint8_t>(std::clamp(v + delta, 0, 255));
}

// Multi-scale surface finish shared by every material: a sprinkling of a
// neutral tone at 2 cm cells and per-2.5 mm brightness modulation. Windows
// below a few centimeters sample it unstably, wider windows average out to a
// stable histogram, which mirrors how real textures behave across zoom levels.
inline Color finish(Color c, std::uint64_t salt, double wx, double wy) {
    if (cell_hash01(salt ^ 0xde7a11, wx, wy, 0.02) < 0.30) c = Color{168, 164, 158};
    const int delta =
        static_cast<int>((cell_hash01(salt ^ 0x5eed, wx, wy, 0.0025) - 0.5) * 72.0);
    return {shade_channel(c.r, delta), shade_channel(c.g, delta), shade_channel(c.b, delta)};
}

inline Color object_texel(const SceneObject& o, double u, double v) {
    const double wx = u * o.extent.x;  // meters across the face
    const double wy = v * o.extent.y;
    bool pick_a = true;
    switch (o.pattern) {
        case TexturePattern::StripesH:
            pick_a = static_cast<int>(std::floor(wy / 0.05)) % 2 == 0;
            break;
        case TexturePattern::StripesV:
            pick_a = static_cast<int>(std::floor(wx / 0.04)) % 2 == 0;
            break;
        case TexturePattern::StripesDiag:
            pick_a = static_cast<int>(std::floor((wx + wy) / 0.045)) % 2 == 0;
            break;
        case TexturePattern::Checker:
            pick_a = (static_cast<int>(std::floor(wx / 0.05)) +
                      static_cast<int>(std::floor(wy / 0.05))) % 2 == 0;
            break;
        case TexturePattern::Blobs:
            pick_a = cell_hash01(0xb10b5, wx, wy, 0.03) < 0.6;
            break;
        case TexturePattern::Rings: {
            const double dx = u - 0.5, dy = v - 0.5;
            pick_a = static_cast<int>(std::floor(std::sqrt(dx * dx + dy * dy) * 8.0)) % 2 == 0;
            break;
        }
    }
    return finish(pick_a ? o.color_a : o.color_b, fnv1a64(o.id), wx, wy);
}

inline Color surface_color(const SceneSpec& scene, const RayHit& hit) {
    if (hit.object >= 0) return object_texel(scene.objects[hit.object], hit.u, hit.v);
    if (hit.object == -2) {
        // table: wood planks along x
        const double x_m = hit.u * 2.0 * scene.table_x_half;
        const double z_m = hit.v * (scene.table_z_max - scene.table_z_min);
        const bool a = static_cast<int>(std::floor(x_m / 0.12)) % 2 == 0;
        return finish(a ? Color{124, 88, 52} : Color{104, 72, 42}, 0x7ab1e, x_m, z_m);
    }
    // wall: soft vertical gradient with faint grid lines
    const double gx = (hit.u - 0.5) * 4.0, gy = (hit.v - 0.5) * 4.0;  // meters
    std::uint8_t base = static_cast<std::uint8_t>(135 + std::clamp(gy, -1.0, 3.0) * 10.0);
    const double fx = gx - std::floor(gx), fy = gy - std::floor(gy);
    if (fx < 0.02 || fy < 0.02) base = static_cast<std::uint8_t>(base - 18);
    return finish({base, base, static_cast<std::uint8_t>(base + 6)}, 0x0a11, gx, gy);
}

}  // namespace detail

/// Flat-shaded pinhole view of the scene: per pixel, the nearest surface
/// wins, so occlusion ordering matches the gaze rays exactly (porous cells
/// show what lies behind them).
inline ImageRGB render_frame(const SceneSpec& scene, const CameraPose& cam,
                             const CameraIntrinsics& intr) {
    intr.validate();
    ImageRGB img(intr.res_x, intr.res_y);
    parallel_for(static_cast<std::size_t>(intr.res_y), [&](std::size_t y) {
        for (int x = 0; x < intr.res_x; ++x) {
            const RayHit hit =
                trace_ray(scene, cam.position, pixel_ray_dir(intr, x + 0.5, y + 0.5));
            const Color c = detail::surface_color(scene, hit);
            img.set(x, static_cast<int>(y), c.r, c.g, c.b);
        }
    });
    return img;
}

// ---------------------------------------------------------------------------
// Benchmark task recordings

enum class TaskOrder { LR, RL };

inline const char* to_string(TaskOrder o) { return o == TaskOrder::LR ? "LR" : "RL"; }

struct TaskSpec {
    TaskOrder order = TaskOrder::LR;
    double depth_level_m = 0.5;     // camera standing distance from the near object row
    double dwell_ms = 500.0;        // per-object viewing time
    double gaze_noise_deg = 0.1;    // std of per-sample angular jitter
    double sample_rate_hz = 30.0;
    std::uint64_t seed = 0;         // per-sample jitter stream
    std::uint64_t target_seed = 0;  // per-object gaze target offsets; share across
                                    // depth levels to make scanpaths comparable
    std::string participant = "p1";

    void validate(double min_fixation_ms = 100.0) const {
        if (!(depth_level_m > 0.0)) throw std::invalid_argument("task: depth_level must be > 0");
        if (!(dwell_ms >= min_fixation_ms))
            throw std::invalid_argument("task: dwell must be >= the fixation minimum duration");
        if (!(gaze_noise_deg >= 0.0)) throw std::invalid_argument("task: noise must be >= 0");
        if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("task: sample rate must be > 0");
    }
};

inline double benchmark_eye_height() { return 0.2; }

inline CameraPose benchmark_camera(const TaskSpec& task) {
    return {{0.0, benchmark_eye_height(), -task.depth_level_m}};
}

namespace detail {

inline double gauss(std::mt19937_64& rng) {
    // Box-Muller on explicit uniforms keeps the stream reproducible
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace detail

/// Simulate one standing task: the camera is fixed at the depth level and the
/// gaze steps through the six objects in task order, with seeded angular
/// jitter and ray-cast per-sample depth. The returned recording and frames
/// are written to `dir` in the standard recording layout.
inline GazeRecording generate_recording(const SceneSpec& scene, const TaskSpec& task,
                                        const CameraIntrinsics& intr,
                                        const std::filesystem::path& dir) {
    task.validate();
    intr.validate();
    const CameraPose cam = benchmark_camera(task);

    std::vector<std::size_t> visit_order(scene.objects.size());
    for (std::size_t i = 0; i < visit_order.size(); ++i) visit_order[i] = i;
    std::sort(visit_order.begin(), visit_order.end(), [&](std::size_t a, std::size_t b) {
        return scene.objects[a].center.x < scene.objects[b].center.x;
    });
    if (task.order == TaskOrder::RL) std::reverse(visit_order.begin(), visit_order.end());

    std::mt19937_64 jitter_rng(task.seed);
    std::mt19937_64 target_rng(task.target_seed);
    std::vector<Vec3> targets;
    for (std::size_t idx : visit_order) {
        const auto& o = scene.objects[idx];
        // a gaze target somewhere on the object, stable across depth levels
        const double ox = (detail::gauss(target_rng)) * 0.12 * o.extent.x;
        const double oy = (detail::gauss(target_rng)) * 0.12 * o.extent.y;
        targets.push_back({o.center.x + std::clamp(ox, -0.3 * o.extent.x, 0.3 * o.extent.x),
                           o.center.y + std::clamp(oy, -0.3 * o.extent.y, 0.3 * o.extent.y),
                           o.center.z});
    }

    GazeRecording rec;
    rec.intrinsics = intr;
    rec.meta.participant = task.participant;
    rec.meta.condition = to_string(task.order);
    rec.meta.depth_level_m = task.depth_level_m;
    rec.meta.frame_rate_hz = task.sample_rate_hz;
    rec.root = dir;

    const double dt = 1000.0 / task.sample_rate_hz;
    const double sigma_px_x = task.gaze_noise_deg / (rad_to_deg(intr.h_fov) / intr.res_x);
    const double sigma_px_y = task.gaze_noise_deg / (rad_to_deg(intr.v_fov) / intr.res_y);

    const auto n_per_object =
        static_cast<std::size_t>(std::llround(task.dwell_ms / dt));
    for (std::size_t k = 0; k < visit_order.size(); ++k) {
        const auto ideal = project_point(intr, cam, targets[k]);
        for (std::size_t s = 0; s < n_per_object; ++s) {
            GazeSample gs;
            gs.t_ms = (static_cast<double>(k) * n_per_object + s) * dt;
            gs.x_px = ideal[0] + detail::gauss(jitter_rng) * sigma_px_x;
            gs.y_px = ideal[1] + detail::gauss(jitter_rng) * sigma_px_y;
            if (gs.x_px < 0.0 || gs.x_px >= intr.res_x || gs.y_px < 0.0 ||
                gs.y_px >= intr.res_y) {
                gs.x_px = std::clamp(gs.x_px, 0.0, intr.res_x - 1.0);
                gs.y_px = std::clamp(gs.y_px, 0.0, intr.res_y - 1.0);
                gs.valid = false;
            } else {
                gs.depth_m = cast_gaze_ray(scene, cam, intr, gs.x_px, gs.y_px);
            }
            rec.samples.push_back(gs);
        }
    }

    rec.frames.push_back({0.0, "frames/000000.png"});
    const std::vector<ImageRGB> frames{render_frame(scene, cam, intr)};
    save_recording(rec, dir, &frames);
    return rec;
}

/// The walking scenario: the camera dollies from z_start to z_end in front of
/// the guitar analog while the gaze stays on it. Short validity gaps are
/// inserted every `segment_ms` so dispersion-based detection yields one
/// fixation per distance band instead of a single long fixation.
inline GazeRecording generate_approach_recording(const SceneSpec& scene,
                                                 const CameraIntrinsics& intr,
                                                 std::uint64_t seed,
                                                 const std::filesystem::path& dir,
                                                 double depth_start = 3.0, double depth_end = 0.5,
                                                 double speed_m_s = 0.5,
                                                 double sample_rate_hz = 30.0,
                                                 double noise_deg = 0.08,
                                                 double segment_ms = 400.0) {
    intr.validate();
    const auto& guitar = scene.objects[benchmark_guitar_index()];
    const Vec3 target{guitar.center.x, guitar.center.y, guitar.center.z};

    GazeRecording rec;
    rec.intrinsics = intr;
    rec.meta.participant = "walker";
    rec.meta.condition = "approach";
    rec.meta.depth_level_m = depth_start;
    rec.meta.frame_rate_hz = sample_rate_hz;
    rec.root = dir;

    const double duration_ms = (depth_start - depth_end) / speed_m_s * 1000.0;
    const double dt = 1000.0 / sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::floor(duration_ms / dt)) + 1;
    const double sigma_px_x = noise_deg / (rad_to_deg(intr.h_fov) / intr.res_x);
    const double sigma_px_y = noise_deg / (rad_to_deg(intr.v_fov) / intr.res_y);
    const auto seg_len = static_cast<std::size_t>(std::lround(segment_ms / dt));

    std::mt19937_64 rng(seed);
    std::vector<ImageRGB> frames;
    frames.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double t = s * dt;
        const double z = -(depth_start - speed_m_s * t / 1000.0);
        const CameraPose cam{{guitar.center.x, benchmark_eye_height(), z}};

        char name[32];
        std::snprintf(name, sizeof(name), "frames/%06zu.png", s);
        rec.frames.push_back({t, name});
        frames.push_back(render_frame(scene, cam, intr));

        GazeSample gs;
        gs.t_ms = t;
        const auto ideal = project_point(intr, cam, target);
        gs.x_px = std::clamp(ideal[0] + detail::gauss(rng) * sigma_px_x, 0.0, intr.res_x - 1.0);
        gs.y_px = std::clamp(ideal[1] + detail::gauss(rng) * sigma_px_y, 0.0, intr.res_y - 1.0);
        if (seg_len > 2 && s % seg_len >= seg_len - 2) {
            gs.valid = false;  // blink-style gap between distance bands
        } else {
            gs.depth_m = cast_gaze_ray(scene, cam, intr, gs.x_px, gs.y_px);
        }
        rec.samples.push_back(gs);
    }
    save_recording(rec, dir, &frames);
    return rec;
}

}  // namespace gazedepth
