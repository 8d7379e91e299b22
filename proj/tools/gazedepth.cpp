// gazedepth: extract fixed-angle and depth-adaptive gaze thumbnails from
// egocentric recordings, compare scanpaths, render the visualizations, and
// regenerate the synthetic benchmark end to end.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gazedepth/alignment.hpp"
#include "gazedepth/pipeline.hpp"
#include "gazedepth/projection.hpp"
#include "gazedepth/recording.hpp"
#include "gazedepth/render.hpp"
#include "gazedepth/simulator.hpp"
#include "gazedepth/stats.hpp"

namespace fs = std::filesystem;
using namespace gazedepth;

namespace {

PatchMode parse_mode(const std::string& s) {
    if (s == "classic") return PatchMode::Classic;
    if (s == "adaptive") return PatchMode::DepthAdaptive;
    throw CLI::ValidationError("--mode", "must be 'classic' or 'adaptive'");
}

SizePreset parse_preset(const std::string& s) {
    if (s == "small") return SizePreset::Small;
    if (s == "mid") return SizePreset::Mid;
    if (s == "large") return SizePreset::Large;
    throw CLI::ValidationError("--preset", "must be 'small', 'mid' or 'large'");
}

Normalize parse_normalize(const std::string& s) {
    if (s == "none") return Normalize::None;
    if (s == "min") return Normalize::ByMinLength;
    if (s == "max") return Normalize::ByMaxLength;
    throw CLI::ValidationError("--normalize", "must be 'none', 'min' or 'max'");
}

std::vector<double> read_numbers(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        out.push_back(parse_double(sv));
    }
    return out;
}

void print_warnings(const Warnings& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

/// Patches dumped by `extract`, in index order.
std::vector<Patch> load_patch_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .png patches in " + dir.string());
    std::vector<Patch> out;
    for (const auto& f : files) {
        Patch p;
        p.pixels = read_png(f);
        p.fixation_id = out.size();
        out.push_back(std::move(p));
    }
    return out;
}

void add_benchmark_flags(CLI::App* cmd, BenchmarkConfig& cfg) {
    cmd->add_option("--seed", cfg.seed, "top-level seed; stages derive their own");
    cmd->add_option("--scanpaths", cfg.scanpaths, "scanpaths per condition and depth level");
    cmd->add_option("--dwell-ms", cfg.dwell_ms, "per-object viewing time");
    cmd->add_option("--noise-deg", cfg.noise_deg, "gaze jitter std in degrees");
    cmd->add_option("--rate-hz", cfg.sample_rate_hz, "gaze sample rate");
    cmd->add_option("--dispersion-deg", cfg.dispersion_deg, "I-DT dispersion threshold");
    cmd->add_option("--min-duration-ms", cfg.min_duration_ms, "I-DT minimum duration");
    cmd->add_option("--canonical", cfg.canonical_px, "canonical patch resolution");
    cmd->add_option("--tile", cfg.tile_px, "render tile resolution");
    cmd->add_option("--res-x", cfg.intrinsics.res_x, "camera resolution x");
    cmd->add_option("--res-y", cfg.intrinsics.res_y, "camera resolution y");
    cmd->add_option(
        "--depths",
        [&cfg](const std::vector<std::string>& vals) {
            cfg.depth_levels.clear();
            for (const auto& v : vals)
                for (const auto& tok : split(v, ';'))
                    if (!tok.empty()) cfg.depth_levels.push_back(parse_double(tok));
            return true;
        },
        "depth levels in meters, ';'-separated (default 0.5;1.5;3)");
}

PatchSpec build_spec(const std::string& mode_s, const std::string& preset_s, double theta_deg,
                     double length_m, int canonical) {
    const PatchMode mode = parse_mode(mode_s);
    PatchSpec spec = preset_spec(mode, parse_preset(preset_s), canonical);
    if (theta_deg > 0.0) spec.theta = deg_to_rad(theta_deg);
    if (length_m > 0.0) spec.actual_length = length_m;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"depth-adaptive gaze thumbnail toolkit"};
    app.require_subcommand(1);

    // the optional config file seeds the defaults; explicit flags override it
    BenchmarkConfig base_cfg;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            base_cfg.apply_kv(read_kv_file(argv[i + 1]));
        }
    }
    std::string config_unused;

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "generate the synthetic benchmark recordings");
    BenchmarkConfig sim_cfg = base_cfg;
    std::string sim_out, sim_task;
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--config", config_unused, "key=value config file");
    sim->add_option("--task", sim_task,
                    "key=value task file for a single recording (order, depth_level_m, "
                    "dwell_ms, noise_deg, sample_rate_hz, seed, participant)");
    add_benchmark_flags(sim, sim_cfg);

    // --- fixations ---
    auto* fix = app.add_subcommand("fixations", "detect fixations in a recording (I-DT)");
    std::string fix_rec, fix_out;
    double fix_disp = 1.0, fix_mindur = 100.0;
    fix->add_option("--rec", fix_rec, "recording directory")->required();
    fix->add_option("--out", fix_out, "fixation CSV path")->required();
    fix->add_option("--dispersion-deg", fix_disp, "dispersion threshold in degrees");
    fix->add_option("--min-duration-ms", fix_mindur, "minimum fixation duration");

    // --- extract ---
    auto* ext = app.add_subcommand("extract", "crop thumbnails around fixations");
    std::string ext_rec, ext_fix, ext_out, ext_mode = "classic", ext_preset = "mid";
    double ext_theta = 0.0, ext_length = 0.0;
    int ext_canonical = 64;
    ext->add_option("--rec", ext_rec, "recording directory")->required();
    ext->add_option("--fixations", ext_fix, "fixation CSV from 'fixations'")->required();
    ext->add_option("--out", ext_out, "patch output directory")->required();
    ext->add_option("--mode", ext_mode, "classic|adaptive");
    ext->add_option("--preset", ext_preset, "small|mid|large");
    ext->add_option("--theta-deg", ext_theta, "override the classic visual angle");
    ext->add_option("--length-m", ext_length, "override the adaptive physical length");
    ext->add_option("--canonical", ext_canonical, "canonical patch resolution");

    // --- embed ---
    auto* emb = app.add_subcommand("embed", "map patches to feature vectors");
    std::string emb_patches, emb_out, emb_import;
    emb->add_option("--patches", emb_patches, "patch directory from 'extract'");
    emb->add_option("--out", emb_out, "feature file path")->required();
    emb->add_option("--features", emb_import,
                    "import precomputed vectors instead of running the built-in embedder");

    // --- compare ---
    auto* cmp = app.add_subcommand("compare", "pairwise scanpath similarity matrix");
    std::vector<std::string> cmp_files;
    std::string cmp_method = "sw", cmp_norm = "max", cmp_out;
    double cmp_gap = 0.5, cmp_indel = 1.0;
    cmp->add_option("files", cmp_files, "feature files, one sequence each")
        ->required()
        ->expected(2, -1);
    cmp->add_option("--method", cmp_method, "sw|lev");
    cmp->add_option("--gap", cmp_gap, "Smith-Waterman gap penalty");
    cmp->add_option("--indel", cmp_indel, "Levenshtein insert/delete cost");
    cmp->add_option("--normalize", cmp_norm, "none|min|max");
    cmp->add_option("--out", cmp_out, "matrix CSV path")->required();

    // --- project ---
    auto* prj = app.add_subcommand("project", "2D embedding plus gridification");
    std::string prj_features, prj_out, prj_render, prj_patches;
    int prj_rows = 0, prj_cols = 0, prj_tile = 64;
    std::uint64_t prj_seed = 0;
    prj->add_option("--features", prj_features, "feature file")->required();
    prj->add_option("--out", prj_out, "layout CSV path")->required();
    prj->add_option("--rows", prj_rows, "grid rows (default: smallest square)");
    prj->add_option("--cols", prj_cols, "grid cols");
    prj->add_option("--seed", prj_seed, "reduction seed (recorded in provenance)");
    prj->add_option("--render", prj_render, "also draw the grid to this PNG");
    prj->add_option("--patches", prj_patches, "patch directory for --render");
    prj->add_option("--tile", prj_tile, "tile resolution for --render");

    // --- stripes ---
    auto* str = app.add_subcommand("stripes", "render Gaze Stripes for recordings");
    std::vector<std::string> str_recs;
    std::string str_out, str_mode = "classic", str_preset = "large";
    int str_tile = 64, str_canonical = 64;
    double str_disp = 1.0, str_mindur = 100.0;
    str->add_option("--rec", str_recs, "recording directory (repeatable)")->required();
    str->add_option("--out", str_out, "output PNG")->required();
    str->add_option("--mode", str_mode, "classic|adaptive");
    str->add_option("--preset", str_preset, "small|mid|large");
    str->add_option("--tile", str_tile, "tile resolution");
    str->add_option("--canonical", str_canonical, "canonical patch resolution");
    str->add_option("--dispersion-deg", str_disp, "I-DT dispersion threshold");
    str->add_option("--min-duration-ms", str_mindur, "I-DT minimum duration");

    // --- stats ---
    auto* sta = app.add_subcommand("stats", "paired test battery over two score lists");
    std::string sta_a, sta_b, sta_out;
    sta->add_option("--a", sta_a, "first score file, one number per line")->required();
    sta->add_option("--b", sta_b, "second score file (paired with the first)")->required();
    sta->add_option("--out", sta_out, "also write the key=value report here");

    // --- reproduce ---
    auto* rep = app.add_subcommand("reproduce", "run the full benchmark pipeline");
    BenchmarkConfig rep_cfg = base_cfg;
    std::string rep_out;
    rep->add_option("--out", rep_out, "output directory")->required();
    rep->add_option("--config", config_unused, "key=value config file");
    add_benchmark_flags(rep, rep_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string step = "startup";
    try {
        if (sim->parsed()) {
            step = "simulate";
            sim_cfg.out_dir = sim_out;
            const SceneSpec scene = build_benchmark_scene();
            if (!sim_task.empty()) {
                const auto kv = read_kv_file(sim_task);
                TaskSpec task;
                if (kv.count("order"))
                    task.order = kv.at("order") == "RL" ? TaskOrder::RL : TaskOrder::LR;
                if (kv.count("depth_level_m"))
                    task.depth_level_m = parse_double(kv.at("depth_level_m"));
                if (kv.count("dwell_ms")) task.dwell_ms = parse_double(kv.at("dwell_ms"));
                if (kv.count("noise_deg")) task.gaze_noise_deg = parse_double(kv.at("noise_deg"));
                if (kv.count("sample_rate_hz"))
                    task.sample_rate_hz = parse_double(kv.at("sample_rate_hz"));
                if (kv.count("seed"))
                    task.seed = static_cast<std::uint64_t>(parse_long(kv.at("seed")));
                if (kv.count("participant")) task.participant = kv.at("participant");
                task.target_seed = seed_for(task.seed, "targets");
                generate_recording(scene, task, sim_cfg.intrinsics, sim_cfg.out_dir);
                std::cout << "wrote " << sim_cfg.out_dir.string() << "\n";
            } else {
                const auto refs = simulate_benchmark(sim_cfg, scene);
                const auto approach = simulate_approach(sim_cfg, scene);
                KeyValueMap prov = sim_cfg.to_kv();
                prov["tool"] = "gazedepth";
                prov["stage"] = "simulate";
                write_kv_file(sim_cfg.out_dir / "bench" / "provenance.meta", prov);
                std::cout << "wrote " << refs.size() << " benchmark recordings and "
                          << approach.string() << "\n";
            }
        } else if (fix->parsed()) {
            step = "fixations";
            Warnings w;
            const auto rec = load_recording(fix_rec, &w);
            print_warnings(w);
            const auto fixes = detect_fixations(rec, fix_disp, fix_mindur);
            save_fixations(fixes, fix_out);
            std::cout << fixes.size() << " fixations -> " << fix_out << "\n";
        } else if (ext->parsed()) {
            step = "extract";
            Warnings w;
            const auto rec = load_recording(ext_rec, &w);
            const auto fixes = load_fixations(ext_fix);
            const PatchSpec spec =
                build_spec(ext_mode, ext_preset, ext_theta, ext_length, ext_canonical);
            const auto patches = extract_scanpath_patches(rec, fixes, spec, &w);
            print_warnings(w);
            dump_patches(patches, ext_out);
            std::cout << patches.size() << " patches -> " << ext_out << "\n";
        } else if (emb->parsed()) {
            step = "embed";
            std::vector<FeatureVector> feats;
            if (!emb_import.empty()) {
                feats = import_features(emb_import);
            } else {
                if (emb_patches.empty())
                    throw std::runtime_error("embed: need --patches or --features");
                feats = embed_patches(load_patch_dir(emb_patches));
            }
            export_features(feats, emb_out);
            std::cout << feats.size() << " vectors -> " << emb_out << "\n";
        } else if (cmp->parsed()) {
            step = "compare";
            std::vector<std::vector<FeatureVector>> seqs;
            std::vector<std::string> ids;
            for (const auto& f : cmp_files) {
                seqs.push_back(import_features(f));
                ids.push_back(fs::path(f).stem().string());
            }
            ScoringScheme scheme;
            scheme.gap_penalty = cmp_gap;
            scheme.indel_cost = cmp_indel;
            scheme.normalize = parse_normalize(cmp_norm);
            const AlignMethod method =
                cmp_method == "lev" ? AlignMethod::Levenshtein : AlignMethod::SmithWaterman;
            const auto mat = pairwise_matrix(seqs, method, scheme, &ids);
            save_matrix_csv(mat, scheme, cmp_out);
            if (seqs.size() == 2)
                std::cout << to_string(method) << " score: " << format_double(mat.at(0, 1)) << "\n";
            std::cout << "matrix -> " << cmp_out << "\n";
        } else if (prj->parsed()) {
            step = "project";
            const auto feats = import_features(prj_features);
            const auto emb2d = reduce_2d(feats, ReduceMethod::PCA, prj_seed);
            int rows = prj_rows, cols = prj_cols;
            if (rows <= 0 || cols <= 0) std::tie(rows, cols) = grid_auto_dims(feats.size());
            const auto layout = gridify(emb2d, rows, cols);
            save_layout_csv(layout, emb2d, prj_out);
            std::cout << "layout (" << rows << "x" << cols << ") -> " << prj_out << "\n";
            if (!prj_render.empty()) {
                if (prj_patches.empty())
                    throw std::runtime_error("project: --render needs --patches");
                const auto patches = load_patch_dir(prj_patches);
                write_png(prj_render, render_projection_grid(layout, patches, prj_tile));
                KeyValueMap meta;
                meta["reduction"] = "pca";
                meta["seed"] = std::to_string(prj_seed);
                meta["rows"] = std::to_string(rows);
                meta["cols"] = std::to_string(cols);
                write_render_meta(prj_render, meta);
                std::cout << "grid -> " << prj_render << "\n";
            }
        } else if (str->parsed()) {
            step = "stripes";
            std::vector<StripeSequence> rows;
            const PatchSpec spec = build_spec(str_mode, str_preset, 0.0, 0.0, str_canonical);
            for (const auto& rdir : str_recs) {
                Warnings w;
                const auto rec = load_recording(rdir, &w);
                print_warnings(w);
                const auto fixes = detect_fixations(rec, str_disp, str_mindur);
                StripeSequence row;
                row.id = rec.meta.participant;
                row.patches = extract_scanpath_patches(rec, fixes, spec, &w);
                for (const auto& p : row.patches)
                    row.start_ms.push_back(fixes[p.fixation_id].start_ms);
                rows.push_back(std::move(row));
            }
            const auto stripe = render_gaze_stripes(rows, str_tile);
            write_png(str_out, stripe.image);
            KeyValueMap meta;
            meta["mode"] = str_mode;
            meta["preset"] = str_preset;
            meta["bin_ms"] = format_double(stripe.bin_ms);
            meta["rows"] = std::to_string(stripe.rows);
            write_render_meta(str_out, meta);
            std::cout << "stripes (" << rows.size() << " rows) -> " << str_out << "\n";
        } else if (sta->parsed()) {
            step = "stats";
            const auto a = read_numbers(sta_a);
            const auto b = read_numbers(sta_b);
            KeyValueMap kv;
            auto put = [&](const std::string& name, const TestReport& r) {
                kv[name + ".statistic"] = format_double(r.statistic);
                kv[name + ".p"] = format_double(r.p_value);
                kv[name + ".n"] = std::to_string(r.n);
                if (r.method == "wilcoxon-signed-rank") kv[name + ".exact"] = r.exact ? "1" : "0";
            };
            put("shapiro_a", shapiro_wilk(a));
            put("shapiro_b", shapiro_wilk(b));
            put("t_test", paired_t_test(a, b));
            put("wilcoxon", wilcoxon_signed_rank(a, b));
            for (const auto& [k, v] : kv) std::cout << k << "=" << v << "\n";
            if (!sta_out.empty()) write_kv_file(sta_out, kv);
        } else if (rep->parsed()) {
            step = "reproduce";
            rep_cfg.out_dir = rep_out;
            const auto summary = run_reproduce(rep_cfg, true);
            std::cout << "cv_classic=" << format_double(summary.cv_classic) << "\n"
                      << "cv_adaptive=" << format_double(summary.cv_adaptive) << "\n"
                      << "cohesion_classic=" << format_double(summary.cohesion_classic) << "\n"
                      << "cohesion_adaptive=" << format_double(summary.cohesion_adaptive) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error in step '" << step << "': " << e.what() << "\n";
        return 1;
    }
    return 0;
}
