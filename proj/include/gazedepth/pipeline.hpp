#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/alignment.hpp"
#include "gazedepth/common.hpp"
#include "gazedepth/features.hpp"
#include "gazedepth/geometry.hpp"
#include "gazedepth/patches.hpp"
#include "gazedepth/projection.hpp"
#include "gazedepth/recording.hpp"
#include "gazedepth/render.hpp"
#include "gazedepth/simulator.hpp"
#include "gazedepth/stats.hpp"

namespace gazedepth {

struct BenchmarkConfig {
    std::filesystem::path out_dir;
    std::uint64_t seed = 7;
    int scanpaths = 7;  // per condition and depth level
    std::vector<double> depth_levels = {0.5, 1.5, 3.0};
    double dwell_ms = 500.0;
    double noise_deg = 0.1;
    double sample_rate_hz = 30.0;
    double dispersion_deg = 1.0;
    double min_duration_ms = 100.0;
    int canonical_px = 64;
    int tile_px = 64;
    CameraIntrinsics intrinsics = benchmark_intrinsics();

    KeyValueMap to_kv() const {
        KeyValueMap kv;
        kv["seed"] = std::to_string(seed);
        kv["scanpaths"] = std::to_string(scanpaths);
        std::string lv;
        for (double d : depth_levels) lv += (lv.empty() ? "" : ";") + format_double(d);
        kv["depth_levels_m"] = lv;
        kv["dwell_ms"] = format_double(dwell_ms);
        kv["noise_deg"] = format_double(noise_deg);
        kv["sample_rate_hz"] = format_double(sample_rate_hz);
        kv["dispersion_deg"] = format_double(dispersion_deg);
        kv["min_duration_ms"] = format_double(min_duration_ms);
        kv["canonical_px"] = std::to_string(canonical_px);
        kv["tile_px"] = std::to_string(tile_px);
        kv["h_fov_deg"] = format_double(rad_to_deg(intrinsics.h_fov));
        kv["v_fov_deg"] = format_double(rad_to_deg(intrinsics.v_fov));
        kv["res_x"] = std::to_string(intrinsics.res_x);
        kv["res_y"] = std::to_string(intrinsics.res_y);
        return kv;
    }

    void apply_kv(const KeyValueMap& kv) {
        auto get = [&](const char* k) -> const std::string* {
            auto it = kv.find(k);
            return it == kv.end() ? nullptr : &it->second;
        };
        if (auto* v = get("seed")) seed = static_cast<std::uint64_t>(parse_long(*v));
        if (auto* v = get("scanpaths")) scanpaths = static_cast<int>(parse_long(*v));
        if (auto* v = get("depth_levels_m")) {
            depth_levels.clear();
            for (const auto& tok : split(*v, ';')) depth_levels.push_back(parse_double(tok));
        }
        if (auto* v = get("dwell_ms")) dwell_ms = parse_double(*v);
        if (auto* v = get("noise_deg")) noise_deg = parse_double(*v);
        if (auto* v = get("sample_rate_hz")) sample_rate_hz = parse_double(*v);
        if (auto* v = get("dispersion_deg")) dispersion_deg = parse_double(*v);
        if (auto* v = get("min_duration_ms")) min_duration_ms = parse_double(*v);
        if (auto* v = get("canonical_px")) canonical_px = static_cast<int>(parse_long(*v));
        if (auto* v = get("tile_px")) tile_px = static_cast<int>(parse_long(*v));
        if (auto* v = get("h_fov_deg")) intrinsics.h_fov = deg_to_rad(parse_double(*v));
        if (auto* v = get("v_fov_deg")) intrinsics.v_fov = deg_to_rad(parse_double(*v));
        if (auto* v = get("res_x")) intrinsics.res_x = static_cast<int>(parse_long(*v));
        if (auto* v = get("res_y")) intrinsics.res_y = static_cast<int>(parse_long(*v));
    }
};

struct RecordingRef {
    TaskOrder cond = TaskOrder::LR;
    std::size_t depth_idx = 0;
    int rep = 0;
    std::string name;
    std::filesystem::path dir;
};

inline std::string recording_name(TaskOrder cond, double depth_m, int rep) {
    const int cm = static_cast<int>(std::lround(depth_m * 100.0));
    return std::string(to_string(cond)) + "_" + std::to_string(cm) + "cm_rep" + std::to_string(rep);
}

/// Generate the full benchmark set: conditions x depth levels x scanpaths.
/// Gaze targets are seeded per (condition, rep) so the same nominal scanpath
/// is re-viewed from every depth level; jitter is seeded per recording.
inline std::vector<RecordingRef> simulate_benchmark(const BenchmarkConfig& cfg,
                                                    const SceneSpec& scene) {
    std::vector<RecordingRef> refs;
    for (TaskOrder cond : {TaskOrder::LR, TaskOrder::RL}) {
        for (std::size_t di = 0; di < cfg.depth_levels.size(); ++di) {
            for (int rep = 1; rep <= cfg.scanpaths; ++rep) {
                TaskSpec task;
                task.order = cond;
                task.depth_level_m = cfg.depth_levels[di];
                task.dwell_ms = cfg.dwell_ms;
                task.gaze_noise_deg = cfg.noise_deg;
                task.sample_rate_hz = cfg.sample_rate_hz;
                task.participant = "p" + std::to_string(rep);
                const std::string name = recording_name(cond, task.depth_level_m, rep);
                task.seed = seed_for(cfg.seed, "sim/" + name);
                task.target_seed = seed_for(cfg.seed, std::string("target/") + to_string(cond) +
                                                          "/rep" + std::to_string(rep));
                RecordingRef ref;
                ref.cond = cond;
                ref.depth_idx = di;
                ref.rep = rep;
                ref.name = name;
                ref.dir = cfg.out_dir / "bench" / name;
                generate_recording(scene, task, cfg.intrinsics, ref.dir);
                refs.push_back(std::move(ref));
            }
        }
    }
    return refs;
}

inline std::filesystem::path simulate_approach(const BenchmarkConfig& cfg, const SceneSpec& scene) {
    const auto dir = cfg.out_dir / "bench" / "approach";
    generate_approach_recording(scene, cfg.intrinsics, seed_for(cfg.seed, "approach"), dir, 3.0,
                                0.5, 0.5, cfg.sample_rate_hz, 0.08, 400.0);
    return dir;
}

// ---------------------------------------------------------------------------

struct ComparisonCell {
    AlignMethod method = AlignMethod::SmithWaterman;
    SizePreset preset = SizePreset::Small;
    std::size_t depth_a = 0, depth_b = 1;  // indices into cfg.depth_levels
    std::vector<double> classic;           // paired scores, ordered by (condition, rep)
    std::vector<double> adaptive;
    double classic_mean = 0.0;
    double adaptive_mean = 0.0;
    std::optional<TestReport> shapiro_classic, shapiro_adaptive, ttest, wilcoxon;
};

struct ReproduceSummary {
    std::vector<ComparisonCell> cells;
    double cv_classic = 0.0;       // guitar footprint variation across stripe tiles
    double cv_adaptive = 0.0;
    double cohesion_classic = 0.0;  // mean intra-object grid distance in the projection
    double cohesion_adaptive = 0.0;
    std::filesystem::path out_dir;

    const ComparisonCell& cell(AlignMethod m, SizePreset p, std::size_t da, std::size_t db) const {
        for (const auto& c : cells)
            if (c.method == m && c.preset == p && c.depth_a == da && c.depth_b == db) return c;
        throw std::out_of_range("no such comparison cell");
    }
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double coefficient_of_variation(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("coefficient_of_variation: need >= 2 values");
    const double m = mean_of(v);
    if (m == 0.0) throw std::invalid_argument("coefficient_of_variation: zero mean");
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size())) / std::abs(m);
}

/// Red-mask pixel count of one canonical tile; isolates the guitar analog.
inline double guitar_footprint_px(const Patch& p) {
    double count = 0.0;
    for (int y = 0; y < p.pixels.height; ++y)
        for (int x = 0; x < p.pixels.width; ++x)
            if (is_guitar_red(p.pixels.px(x, y))) count += 1.0;
    return count;
}

}  // namespace detail

/// Mean pairwise grid distance among cells holding patches of the same
/// ground-truth object, averaged over objects with at least two patches.
inline double grid_cohesion(const GridLayout& layout, const std::vector<int>& labels) {
    if (layout.assignment.size() != labels.size())
        throw std::invalid_argument("grid_cohesion: label count mismatch");
    std::map<int, std::vector<std::pair<int, int>>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        const int cell = layout.assignment[i];
        groups[labels[i]].emplace_back(cell / layout.cols, cell % layout.cols);
    }
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& [label, cells] : groups) {
        if (cells.size() < 2) continue;
        double s = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < cells.size(); ++i)
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                const double dr = cells[i].first - cells[j].first;
                const double dc = cells[i].second - cells[j].second;
                s += std::sqrt(dr * dr + dc * dc);
                ++pairs;
            }
        total += s / static_cast<double>(pairs);
        ++used;
    }
    if (used == 0) throw std::runtime_error("grid_cohesion: no object with >= 2 patches");
    return total / static_cast<double>(used);
}

// ---------------------------------------------------------------------------

inline ReproduceSummary run_reproduce(BenchmarkConfig cfg, bool verbose = false) {
    namespace fs = std::filesystem;
    if (cfg.out_dir.empty()) throw std::invalid_argument("reproduce: output directory required");
    if (cfg.scanpaths < 2) throw std::invalid_argument("reproduce: need >= 2 scanpaths");
    if (cfg.depth_levels.size() < 2)
        throw std::invalid_argument("reproduce: need >= 2 depth levels");
    fs::create_directories(cfg.out_dir);
    auto log = [&](const std::string& s) {
        if (verbose) std::cout << "[reproduce] " << s << "\n" << std::flush;
    };

    ReproduceSummary summary;
    summary.out_dir = cfg.out_dir;

    KeyValueMap prov = cfg.to_kv();
    prov["tool"] = "gazedepth";
    write_kv_file(cfg.out_dir / "reproduce.meta", prov);
    auto stage_meta = [&](const fs::path& dir, const std::string& stage) {
        fs::create_directories(dir);
        KeyValueMap kv = prov;
        kv["stage"] = stage;
        write_kv_file(dir / "provenance.meta", kv);
    };

    const SceneSpec scene = build_benchmark_scene();

    log("simulating benchmark recordings");
    const auto refs = simulate_benchmark(cfg, scene);
    log("simulating approach recording");
    const auto approach_dir = simulate_approach(cfg, scene);

    constexpr std::array<PatchMode, 2> kModes{PatchMode::Classic, PatchMode::DepthAdaptive};
    constexpr std::array<SizePreset, 3> kPresets{SizePreset::Small, SizePreset::Mid,
                                                 SizePreset::Large};

    // features[cond][depth][rep-1][mode][preset]
    using SeqSlot = std::array<std::array<std::vector<FeatureVector>, 3>, 2>;
    std::vector<std::vector<std::vector<SeqSlot>>> features(
        2, std::vector<std::vector<SeqSlot>>(cfg.depth_levels.size(),
                                             std::vector<SeqSlot>(cfg.scanpaths)));

    log("detecting fixations and extracting features");
    stage_meta(cfg.out_dir / "features", "embed");
    stage_meta(cfg.out_dir / "fixations", "fixations");
    for (const auto& ref : refs) {
        Warnings warnings;
        const GazeRecording rec = load_recording(ref.dir, &warnings);
        const auto fixes = detect_fixations(rec, cfg.dispersion_deg, cfg.min_duration_ms);
        save_fixations(fixes, cfg.out_dir / "fixations" / (ref.name + ".csv"));
        const std::size_t cond_idx = ref.cond == TaskOrder::LR ? 0 : 1;
        for (PatchMode mode : kModes) {
            for (SizePreset preset : kPresets) {
                const PatchSpec spec = preset_spec(mode, preset, cfg.canonical_px);
                const auto patches = extract_scanpath_patches(rec, fixes, spec, &warnings);
                auto feats = embed_patches(patches);
                const auto fpath = cfg.out_dir / "features" /
                                   (ref.name + "_" + to_string(mode) + "_" + to_string(preset) +
                                    ".txt");
                export_features(feats, fpath);
                features[cond_idx][ref.depth_idx][ref.rep - 1]
                        [mode == PatchMode::Classic ? 0 : 1]
                        [preset == SizePreset::Small ? 0 : preset == SizePreset::Mid ? 1 : 2] =
                            std::move(feats);
            }
        }
    }

    log("building pairwise matrices");
    stage_meta(cfg.out_dir / "matrices", "compare");
    for (AlignMethod method : {AlignMethod::SmithWaterman, AlignMethod::Levenshtein}) {
        for (PatchMode mode : kModes) {
            for (SizePreset preset : kPresets) {
                std::vector<std::vector<FeatureVector>> seqs;
                std::vector<std::string> ids;
                const std::size_t mi = mode == PatchMode::Classic ? 0 : 1;
                const std::size_t pi =
                    preset == SizePreset::Small ? 0 : preset == SizePreset::Mid ? 1 : 2;
                for (const auto& ref : refs) {
                    const std::size_t ci = ref.cond == TaskOrder::LR ? 0 : 1;
                    seqs.push_back(features[ci][ref.depth_idx][ref.rep - 1][mi][pi]);
                    ids.push_back(ref.name);
                }
                ScoringScheme scheme;
                const auto mat = pairwise_matrix(seqs, method, scheme, &ids);
                const std::string fname = std::string(method == AlignMethod::SmithWaterman
                                                          ? "sw"
                                                          : "lev") +
                                          "_" + to_string(mode) + "_" + to_string(preset) + ".csv";
                save_matrix_csv(mat, scheme, cfg.out_dir / "matrices" / fname);
            }
        }
    }

    log("scoring depth-level pairs");
    std::vector<std::pair<std::size_t, std::size_t>> depth_pairs;
    for (std::size_t a = 0; a < cfg.depth_levels.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.depth_levels.size(); ++b) depth_pairs.emplace_back(a, b);

    stage_meta(cfg.out_dir / "comparison", "depth-pair-scores");
    std::ofstream scores_csv(cfg.out_dir / "comparison" / "scores.csv", std::ios::binary);
    scores_csv << "method,preset,mode,depth_a_m,depth_b_m,condition,rep,score,normalized\n";

    const ScoringScheme scheme;
    for (AlignMethod method : {AlignMethod::SmithWaterman, AlignMethod::Levenshtein}) {
        for (SizePreset preset : kPresets) {
            const std::size_t pi =
                preset == SizePreset::Small ? 0 : preset == SizePreset::Mid ? 1 : 2;
            for (const auto& [da, db] : depth_pairs) {
                ComparisonCell cell;
                cell.method = method;
                cell.preset = preset;
                cell.depth_a = da;
                cell.depth_b = db;
                for (std::size_t ci = 0; ci < 2; ++ci) {
                    for (int rep = 1; rep <= cfg.scanpaths; ++rep) {
                        for (std::size_t mi = 0; mi < 2; ++mi) {
                            const auto& sa = features[ci][da][rep - 1][mi][pi];
                            const auto& sb = features[ci][db][rep - 1][mi][pi];
                            const AlignmentResult r = method == AlignMethod::SmithWaterman
                                                          ? smith_waterman_score(sa, sb, scheme)
                                                          : levenshtein_distance(sa, sb, scheme);
                            const double score = r.normalized.value_or(r.score);
                            (mi == 0 ? cell.classic : cell.adaptive).push_back(score);
                            scores_csv << to_string(method) << ',' << to_string(preset) << ','
                                       << to_string(mi == 0 ? PatchMode::Classic
                                                            : PatchMode::DepthAdaptive)
                                       << ',' << format_double(cfg.depth_levels[da]) << ','
                                       << format_double(cfg.depth_levels[db]) << ','
                                       << (ci == 0 ? "LR" : "RL") << ',' << rep << ','
                                       << format_double(r.score) << ','
                                       << format_double(score) << '\n';
                        }
                    }
                }
                cell.classic_mean = detail::mean_of(cell.classic);
                cell.adaptive_mean = detail::mean_of(cell.adaptive);
                if (method == AlignMethod::SmithWaterman) {
                    try {
                        cell.shapiro_classic = shapiro_wilk(cell.classic);
                        cell.shapiro_adaptive = shapiro_wilk(cell.adaptive);
                    } catch (const std::exception&) {
                    }
                    try {
                        cell.ttest = paired_t_test(cell.classic, cell.adaptive);
                    } catch (const std::exception&) {
                    }
                    try {
                        cell.wilcoxon = wilcoxon_signed_rank(cell.classic, cell.adaptive);
                    } catch (const std::exception&) {
                    }
                }
                summary.cells.push_back(std::move(cell));
            }
        }
    }
    scores_csv.close();

    log("writing stats report");
    stage_meta(cfg.out_dir / "stats", "stats");
    {
        std::ofstream rep(cfg.out_dir / "stats" / "report.txt", std::ios::binary);
        for (const auto& c : summary.cells) {
            if (c.method != AlignMethod::SmithWaterman) continue;
            const std::string key = std::string(to_string(c.preset)) + "_" +
                                    format_double(cfg.depth_levels[c.depth_a] * 100.0) + "cm_vs_" +
                                    format_double(cfg.depth_levels[c.depth_b] * 100.0) + "cm";
            rep << key << ".n=" << c.classic.size() << "\n";
            rep << key << ".classic_mean=" << format_double(c.classic_mean) << "\n";
            rep << key << ".adaptive_mean=" << format_double(c.adaptive_mean) << "\n";
            if (c.shapiro_classic)
                rep << key << ".shapiro_classic.W=" << format_double(c.shapiro_classic->statistic)
                    << "\n"
                    << key << ".shapiro_classic.p=" << format_double(c.shapiro_classic->p_value)
                    << "\n";
            if (c.shapiro_adaptive)
                rep << key << ".shapiro_adaptive.W=" << format_double(c.shapiro_adaptive->statistic)
                    << "\n"
                    << key << ".shapiro_adaptive.p=" << format_double(c.shapiro_adaptive->p_value)
                    << "\n";
            if (c.ttest)
                rep << key << ".t_test.t=" << format_double(c.ttest->statistic) << "\n"
                    << key << ".t_test.p=" << format_double(c.ttest->p_value) << "\n";
            if (c.wilcoxon)
                rep << key << ".wilcoxon.W=" << format_double(c.wilcoxon->statistic) << "\n"
                    << key << ".wilcoxon.p=" << format_double(c.wilcoxon->p_value) << "\n"
                    << key << ".wilcoxon.exact=" << (c.wilcoxon->exact ? "1" : "0") << "\n";
        }
    }

    log("rendering gaze stripes (approach)");
    stage_meta(cfg.out_dir / "render", "render");
    {
        Warnings warnings;
        const GazeRecording rec = load_recording(approach_dir, &warnings);
        const auto fixes = detect_fixations(rec, cfg.dispersion_deg, cfg.min_duration_ms);
        for (PatchMode mode : kModes) {
            const PatchSpec spec = preset_spec(mode, SizePreset::Large, cfg.canonical_px);
            const auto patches = extract_scanpath_patches(rec, fixes, spec, &warnings);
            if (patches.size() < 2)
                throw std::runtime_error("reproduce: approach recording yielded < 2 patches");
            StripeSequence row;
            row.id = rec.meta.participant;
            for (const auto& p : patches) row.start_ms.push_back(fixes[p.fixation_id].start_ms);
            row.patches = patches;
            const auto stripe = render_gaze_stripes({row}, cfg.tile_px);
            const auto png = cfg.out_dir / "render" /
                             (std::string("stripes_") + to_string(mode) + ".png");
            write_png(png, stripe.image);
            KeyValueMap meta;
            meta["mode"] = to_string(mode);
            meta["preset"] = "large";
            meta["seed"] = std::to_string(cfg.seed);
            meta["bin_ms"] = format_double(stripe.bin_ms);
            meta["tiles"] = std::to_string(patches.size());
            write_render_meta(png, meta);

            std::vector<double> footprints;
            for (const auto& p : patches) footprints.push_back(detail::guitar_footprint_px(p));
            const double cv = detail::coefficient_of_variation(footprints);
            (mode == PatchMode::Classic ? summary.cv_classic : summary.cv_adaptive) = cv;
        }
    }

    log("rendering gridified projections");
    {
        // one participant (rep 1), LR condition, all depth levels
        std::array<std::vector<Patch>, 2> mode_patches;
        std::array<std::vector<int>, 2> mode_labels;
        for (std::size_t di = 0; di < cfg.depth_levels.size(); ++di) {
            const auto name = recording_name(TaskOrder::LR, cfg.depth_levels[di], 1);
            Warnings warnings;
            const GazeRecording rec = load_recording(cfg.out_dir / "bench" / name, &warnings);
            const auto fixes = detect_fixations(rec, cfg.dispersion_deg, cfg.min_duration_ms);
            TaskSpec probe;
            probe.depth_level_m = cfg.depth_levels[di];
            const CameraPose cam = benchmark_camera(probe);
            for (std::size_t mi = 0; mi < 2; ++mi) {
                const PatchSpec spec = preset_spec(kModes[mi], SizePreset::Mid, cfg.canonical_px);
                auto patches = extract_scanpath_patches(rec, fixes, spec, &warnings);
                for (auto& p : patches) {
                    const auto& f = fixes[p.fixation_id];
                    const RayHit hit =
                        cast_gaze_hit(scene, cam, cfg.intrinsics, f.centroid_x, f.centroid_y);
                    mode_labels[mi].push_back(hit.object);
                    mode_patches[mi].push_back(std::move(p));
                }
            }
        }
        const std::size_t n_max = std::max(mode_patches[0].size(), mode_patches[1].size());
        const auto [rows, cols] = grid_auto_dims(n_max);
        for (std::size_t mi = 0; mi < 2; ++mi) {
            if (mode_patches[mi].size() < 2)
                throw std::runtime_error("reproduce: too few patches for the projection figure");
            const auto feats = embed_patches(mode_patches[mi]);
            const auto emb = reduce_2d(feats, ReduceMethod::PCA, seed_for(cfg.seed, "pca"));
            const auto layout = gridify(emb, rows, cols);
            const auto png = cfg.out_dir / "render" /
                             (std::string("projection_") + to_string(kModes[mi]) + ".png");
            write_png(png, render_projection_grid(layout, mode_patches[mi], cfg.tile_px));
            save_layout_csv(layout, emb,
                            cfg.out_dir / "render" /
                                (std::string("projection_") + to_string(kModes[mi]) + ".csv"));
            KeyValueMap meta;
            meta["mode"] = to_string(kModes[mi]);
            meta["preset"] = "mid";
            meta["seed"] = std::to_string(cfg.seed);
            meta["reduction"] = "pca";
            meta["rows"] = std::to_string(rows);
            meta["cols"] = std::to_string(cols);
            write_render_meta(png, meta);
            const double coh = grid_cohesion(layout, mode_labels[mi]);
            (mi == 0 ? summary.cohesion_classic : summary.cohesion_adaptive) = coh;
        }
    }

    log("writing summary");
    {
        KeyValueMap kv;
        kv["cv_classic"] = format_double(summary.cv_classic);
        kv["cv_adaptive"] = format_double(summary.cv_adaptive);
        kv["cohesion_classic"] = format_double(summary.cohesion_classic);
        kv["cohesion_adaptive"] = format_double(summary.cohesion_adaptive);
        write_kv_file(cfg.out_dir / "summary.txt", kv);
    }
    return summary;
}

}  // namespace gazedepth
