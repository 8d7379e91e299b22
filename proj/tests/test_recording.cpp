#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "gazedepth/recording.hpp"

using namespace gazedepth;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / "gazedepth_rec_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CameraIntrinsics test_intr() { return {deg_to_rad(90.0), deg_to_rad(60.0), 640, 480}; }

GazeRecording make_recording(const std::vector<GazeSample>& samples) {
    GazeRecording rec;
    rec.intrinsics = test_intr();
    rec.meta.participant = "p1";
    rec.meta.condition = "LR";
    rec.meta.depth_level_m = 1.5;
    rec.meta.frame_rate_hz = 30.0;
    rec.samples = samples;
    rec.frames.push_back({0.0, "frames/000000.png"});
    return rec;
}

GazeSample sample(double t, double x, double y, double depth = 1.0) {
    GazeSample s;
    s.t_ms = t;
    s.x_px = x;
    s.y_px = y;
    s.depth_m = depth;
    return s;
}

}  // namespace

TEST_CASE("save/load round-trips a recording bit-exactly") {
    std::vector<GazeSample> samples;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xs(0.0, 639.999), ys(0.0, 479.999), ds(0.2, 6.0);
    for (int i = 0; i < 25; ++i) {
        auto s = sample(i * 33.3333333, xs(rng), ys(rng), ds(rng));
        if (i % 7 == 3) s.depth_m.reset();
        samples.push_back(s);
    }
    auto rec = make_recording(samples);
    const auto dir = fresh_dir("roundtrip");
    const std::vector<ImageRGB> frames{ImageRGB(640, 480, 90)};
    save_recording(rec, dir, &frames);

    Warnings w;
    const GazeRecording back = load_recording(dir, &w);
    CHECK(w.empty());
    REQUIRE(back.samples.size() == rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        CHECK(back.samples[i].t_ms == rec.samples[i].t_ms);
        CHECK(back.samples[i].x_px == rec.samples[i].x_px);
        CHECK(back.samples[i].y_px == rec.samples[i].y_px);
        CHECK(back.samples[i].depth_m == rec.samples[i].depth_m);
        CHECK(back.samples[i].valid == rec.samples[i].valid);
    }
    CHECK(back.meta.participant == "p1");
    CHECK(back.meta.condition == "LR");
    CHECK(back.meta.depth_level_m == 1.5);
    CHECK(back.intrinsics.res_x == 640);

    // writing the loaded recording again produces identical files
    const auto dir2 = fresh_dir("roundtrip2");
    save_recording(back, dir2, &frames);
    for (const char* f : {"recording.meta", "gaze.csv", "frames.csv"}) {
        std::ifstream a(dir / f, std::ios::binary), b(dir2 / f, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
}

TEST_CASE("well-formed three-sample manifest loads with three samples") {
    auto rec = make_recording({sample(0, 10, 10), sample(33, 11, 10), sample(66, 12, 10)});
    const auto dir = fresh_dir("three");
    const std::vector<ImageRGB> frames{ImageRGB(640, 480)};
    save_recording(rec, dir, &frames);
    CHECK(load_recording(dir).samples.size() == 3);
}

TEST_CASE("decreasing timestamp is rejected with the offending row") {
    auto rec = make_recording({});
    const auto dir = fresh_dir("nonmono");
    const std::vector<ImageRGB> frames{ImageRGB(640, 480)};
    save_recording(rec, dir, &frames);
    {
        std::ofstream out(dir / "gaze.csv", std::ios::binary);
        out << "t_ms,x_px,y_px,depth_m,valid\n";
        for (int i = 0; i < 6; ++i) out << i * 10 << ",5,5,1,1\n";  // rows 2..7
        out << "12,5,5,1,1\n";                                      // row 8: t drops
    }
    try {
        load_recording(dir);
        FAIL("expected a load error");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 8") != std::string::npos);
        CHECK(msg.find("decreases") != std::string::npos);
    }
}

TEST_CASE("negative depth flags the sample invalid but the load succeeds") {
    auto rec = make_recording({});
    const auto dir = fresh_dir("negdepth");
    const std::vector<ImageRGB> frames{ImageRGB(640, 480)};
    save_recording(rec, dir, &frames);
    {
        std::ofstream out(dir / "gaze.csv", std::ios::binary);
        out << "t_ms,x_px,y_px,depth_m,valid\n";
        out << "0,5,5,1,1\n";
        out << "10,5,5,-1,1\n";
        out << "20,5,5,2,1\n";
    }
    Warnings w;
    const GazeRecording back = load_recording(dir, &w);
    REQUIRE(back.samples.size() == 3);
    CHECK(back.samples[1].valid == false);
    CHECK_FALSE(back.samples[1].depth_m.has_value());
    CHECK(back.samples[0].valid);
    CHECK(back.samples[2].valid);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("row 3") != std::string::npos);
}

TEST_CASE("missing frame files are reported") {
    auto rec = make_recording({sample(0, 5, 5)});
    rec.frames.push_back({100.0, "frames/000001.png"});
    const auto dir = fresh_dir("missingframe");
    const std::vector<ImageRGB> frames{ImageRGB(640, 480), ImageRGB(640, 480)};
    save_recording(rec, dir, &frames);
    fs::remove(dir / "frames/000001.png");
    try {
        load_recording(dir);
        FAIL("expected a load error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("000001.png") != std::string::npos);
    }
}

TEST_CASE("frame_at picks the covering frame") {
    auto rec = make_recording({sample(0, 5, 5)});
    rec.frames = {{0.0, "a.png"}, {100.0, "b.png"}, {200.0, "c.png"}};
    CHECK(rec.frame_at(0.0).frame_file == "a.png");
    CHECK(rec.frame_at(99.9).frame_file == "a.png");
    CHECK(rec.frame_at(100.0).frame_file == "b.png");
    CHECK(rec.frame_at(150.0).frame_file == "b.png");
    CHECK(rec.frame_at(5000.0).frame_file == "c.png");
}

// --- I-DT ------------------------------------------------------------------

TEST_CASE("constant gaze for 200 ms yields exactly one fixation spanning all samples") {
    std::vector<GazeSample> samples;
    for (int i = 0; i <= 10; ++i) samples.push_back(sample(i * 20.0, 100.0, 100.0));
    const auto rec = make_recording(samples);
    const auto fixes = detect_fixations(rec, 1.0, 100.0);
    REQUIRE(fixes.size() == 1);
    CHECK(fixes[0].first_sample == 0);
    CHECK(fixes[0].last_sample == 10);
    CHECK(fixes[0].centroid_x == doctest::Approx(100.0));
    CHECK(fixes[0].start_ms == 0.0);
    CHECK(fixes[0].end_ms == 200.0);
}

TEST_CASE("two clusters far apart yield exactly two fixations") {
    std::vector<GazeSample> samples;
    // 10 degrees apart horizontally: 10 / (90/640) ~ 71 px
    for (int i = 0; i < 8; ++i) samples.push_back(sample(i * 20.0, 100.0, 100.0));
    for (int i = 8; i < 16; ++i) samples.push_back(sample(i * 20.0, 100.0 + 71.1, 100.0));
    const auto rec = make_recording(samples);
    const auto fixes = detect_fixations(rec, 1.0, 100.0);
    REQUIRE(fixes.size() == 2);
    CHECK(fixes[0].last_sample == 7);
    CHECK(fixes[1].first_sample == 8);
}

TEST_CASE("random walk with super-threshold steps yields no fixations") {
    std::vector<GazeSample> samples;
    double x = 320.0, y = 240.0;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        samples.push_back(sample(i * 30.0, x, y));
        // every step jumps more than 1 degree (> 7.1 px horizontally)
        const double step = 12.0 + static_cast<double>(rng() % 5);
        x += (i % 2 ? step : -step);
        y += (i % 3 ? step : -step);
    }
    const auto rec = make_recording(samples);
    CHECK(detect_fixations(rec, 1.0, 100.0).empty());
}

TEST_CASE("invalid samples break fixation windows") {
    std::vector<GazeSample> samples;
    for (int i = 0; i < 20; ++i) {
        auto s = sample(i * 20.0, 100.0, 100.0);
        if (i == 10 || i == 11) s.valid = false;
        samples.push_back(s);
    }
    const auto rec = make_recording(samples);
    const auto fixes = detect_fixations(rec, 1.0, 100.0);
    REQUIRE(fixes.size() == 2);
    CHECK(fixes[0].last_sample == 9);
    CHECK(fixes[1].first_sample == 12);
}

TEST_CASE("fixations are disjoint, ordered, and within dispersion post hoc") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    std::vector<GazeSample> samples;
    double t = 0.0;
    for (int cluster = 0; cluster < 5; ++cluster) {
        const double cx = 60.0 + cluster * 120.0, cy = 200.0 + (cluster % 2) * 80.0;
        const int n = 6 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            samples.push_back(sample(t, cx + jitter(rng), cy + jitter(rng)));
            t += 25.0;
        }
    }
    const auto rec = make_recording(samples);
    const double max_disp = 1.4;
    const auto fixes = detect_fixations(rec, max_disp, 100.0);
    REQUIRE(!fixes.empty());
    const double degpx_x = rad_to_deg(rec.intrinsics.h_fov) / rec.intrinsics.res_x;
    const double degpx_y = rad_to_deg(rec.intrinsics.v_fov) / rec.intrinsics.res_y;
    for (std::size_t k = 0; k < fixes.size(); ++k) {
        const auto& f = fixes[k];
        CHECK(f.end_ms - f.start_ms >= 100.0);
        if (k > 0) CHECK(f.start_ms > fixes[k - 1].end_ms);
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        for (std::size_t i = f.first_sample; i <= f.last_sample; ++i) {
            min_x = std::min(min_x, samples[i].x_px);
            max_x = std::max(max_x, samples[i].x_px);
            min_y = std::min(min_y, samples[i].y_px);
            max_y = std::max(max_y, samples[i].y_px);
        }
        CHECK((max_x - min_x) * degpx_x + (max_y - min_y) * degpx_y <= max_disp + 1e-9);
    }
}

// --- fixation_depth ----------------------------------------------------------

TEST_CASE("median depth rejects the pass-through outlier") {
    std::vector<GazeSample> s{sample(0, 0, 0, 1.2), sample(1, 0, 0, 3.1), sample(2, 0, 0, 1.25)};
    CHECK(fixation_depth(s) == doctest::Approx(1.25));
}

TEST_CASE("median depth singleton and minority outliers") {
    std::vector<GazeSample> one{sample(0, 0, 0, 2.0)};
    CHECK(fixation_depth(one) == doctest::Approx(2.0));
    std::vector<GazeSample> five{sample(0, 0, 0, 1), sample(1, 0, 0, 1), sample(2, 0, 0, 1),
                                 sample(3, 0, 0, 9), sample(4, 0, 0, 9)};
    CHECK(fixation_depth(five) == doctest::Approx(1.0));
}

TEST_CASE("lower median for even counts") {
    std::vector<GazeSample> s{sample(0, 0, 0, 1.0), sample(1, 0, 0, 2.0), sample(2, 0, 0, 3.0),
                              sample(3, 0, 0, 4.0)};
    CHECK(fixation_depth(s) == doctest::Approx(2.0));
}

TEST_CASE("median depth is permutation invariant and bounded under minority corruption") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        std::vector<GazeSample> s;
        for (std::size_t i = 0; i < n; ++i)
            s.push_back(sample(static_cast<double>(i), 0, 0, 1.0 + (rng() % 100) / 100.0));
        const double base = fixation_depth(s);
        std::shuffle(s.begin(), s.end(), rng);
        CHECK(fixation_depth(s) == doctest::Approx(base));
        // corrupt strictly fewer than half of the depths to arbitrary positives
        std::vector<double> sorted;
        for (const auto& gs : s) sorted.push_back(*gs.depth_m);
        std::sort(sorted.begin(), sorted.end());
        auto corrupted = s;
        const std::size_t k = (n - 1) / 2;
        for (std::size_t i = 0; i < k; ++i) corrupted[i].depth_m = 50.0 + static_cast<double>(i);
        const double med = fixation_depth(corrupted);
        CHECK(med >= sorted.front());
        CHECK(med <= sorted.back());
    }
}

TEST_CASE("all-missing depths raise an instructive error") {
    std::vector<GazeSample> s{sample(0, 0, 0), sample(1, 0, 0)};
    s[0].depth_m.reset();
    s[1].depth_m.reset();
    try {
        fixation_depth(s);
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("skip") != std::string::npos);
    }
}

TEST_CASE("fixation CSV round-trips") {
    std::vector<Fixation> fx(3);
    fx[0] = {0.0, 120.0, 55.5, 66.25, 1.25, 0, 5};
    fx[1] = {150.0, 300.0, 200.0, 100.0, std::nullopt, 7, 12};
    fx[2] = {320.0, 500.0, 10.0, 20.0, 3.5, 13, 19};
    const auto dir = fresh_dir("fixcsv");
    save_fixations(fx, dir / "fix.csv");
    const auto back = load_fixations(dir / "fix.csv");
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].start_ms == fx[i].start_ms);
        CHECK(back[i].end_ms == fx[i].end_ms);
        CHECK(back[i].centroid_x == fx[i].centroid_x);
        CHECK(back[i].depth_m == fx[i].depth_m);
        CHECK(back[i].first_sample == fx[i].first_sample);
        CHECK(back[i].last_sample == fx[i].last_sample);
    }
}
