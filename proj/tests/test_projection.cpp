#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "gazedepth/projection.hpp"
#include "oracles.hpp"

using namespace gazedepth;

namespace {

std::vector<FeatureVector> random_features(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> nd;
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) x = nd(rng);
        out.push_back(make_feature(std::move(v)));
    }
    return out;
}

}  // namespace

TEST_CASE("rank-1 data collapses the second coordinate") {
    // points on a line in feature space
    std::vector<FeatureVector> feats;
    for (int i = 0; i < 8; ++i) {
        const double t = i * 0.7 - 2.0;
        feats.push_back(make_feature({3.0 * t + 1.0, -2.0 * t, 0.5 * t + 4.0, t}));
    }
    const auto emb = reduce_2d(feats);
    for (const auto& p : emb.points) CHECK(std::abs(p[1]) < 1e-9);
    // the first coordinate keeps the spread
    double lo = 1e300, hi = -1e300;
    for (const auto& p : emb.points) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    CHECK(hi - lo > 1.0);
}

TEST_CASE("duplicate features map to coincident points") {
    std::mt19937_64 rng(3);
    auto feats = random_features(rng, 6, 5);
    feats.push_back(feats[2]);
    const auto emb = reduce_2d(feats);
    CHECK(emb.points[6][0] == doctest::Approx(emb.points[2][0]).epsilon(1e-10));
    CHECK(emb.points[6][1] == doctest::Approx(emb.points[2][1]).epsilon(1e-10));
}

TEST_CASE("all-identical features collapse to the origin with a warning") {
    std::vector<FeatureVector> feats(5, make_feature({1.0, 2.0, 3.0}));
    Warnings w;
    const auto emb = reduce_2d(feats, ReduceMethod::PCA, 0, &w);
    for (const auto& p : emb.points) {
        CHECK(p[0] == 0.0);
        CHECK(p[1] == 0.0);
    }
    CHECK_FALSE(w.empty());
}

TEST_CASE("projection agrees with an independent eigensolver on a small case") {
    std::mt19937_64 rng(5);
    const auto feats = random_features(rng, 5, 4);
    const std::size_t n = 5, d = 4;

    // oracle: covariance by hand, top-2 eigenpairs by power iteration with
    // deflation (different algorithm from the library's Jacobi solver)
    std::vector<double> mean(d, 0.0);
    for (const auto& f : feats)
        for (std::size_t k = 0; k < d; ++k) mean[k] += f.values[k] / n;
    std::vector<std::vector<double>> xc(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) xc[i][k] = feats[i].values[k] - mean[k];
    std::vector<double> cov(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < d; ++q) cov[p * d + q] += xc[i][p] * xc[i][q];

    auto mat_vec = [&](const std::vector<double>& m, const std::vector<double>& v) {
        std::vector<double> out(d, 0.0);
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < d; ++q) out[p] += m[p * d + q] * v[q];
        return out;
    };
    auto power_top = [&](const std::vector<double>& m) {
        std::vector<double> v(d, 0.0);
        v[0] = 1.0;
        v[1] = 0.5;
        v[2] = -0.25;
        v[3] = 0.125;
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            auto w = mat_vec(m, v);
            double nrm = 0.0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            for (auto& x : w) x /= nrm;
            lambda = nrm;
            v = w;
        }
        return std::make_pair(v, lambda);
    };
    auto [v1, l1] = power_top(cov);
    auto deflated = cov;
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = 0; q < d; ++q) deflated[p * d + q] -= l1 * v1[p] * v1[q];
    auto [v2, l2] = power_top(deflated);

    const auto emb = reduce_2d(feats);
    // library projections must match the oracle up to per-axis sign
    for (int axis = 0; axis < 2; ++axis) {
        const auto& v = axis == 0 ? v1 : v2;
        double dot_same = 0.0, dot_flip = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double proj = 0.0;
            for (std::size_t k = 0; k < d; ++k) proj += xc[i][k] * v[k];
            dot_same += std::abs(proj - emb.points[i][axis]);
            dot_flip += std::abs(proj + emb.points[i][axis]);
        }
        CHECK(std::min(dot_same, dot_flip) < 1e-6);
    }
}

TEST_CASE("reduce_2d is invariant under input permutation and translation") {
    std::mt19937_64 rng(7);
    const auto feats = random_features(rng, 9, 6);
    const auto base = reduce_2d(feats);

    std::vector<std::size_t> perm(feats.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FeatureVector> shuffled;
    for (auto i : perm) shuffled.push_back(feats[i]);
    const auto permuted = reduce_2d(shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(permuted.points[i][0] == doctest::Approx(base.points[perm[i]][0]).epsilon(1e-8));
        CHECK(permuted.points[i][1] == doctest::Approx(base.points[perm[i]][1]).epsilon(1e-8));
    }

    std::vector<FeatureVector> translated;
    for (const auto& f : feats) {
        auto v = f.values;
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += 3.5 - static_cast<double>(k);
        translated.push_back(make_feature(std::move(v)));
    }
    const auto shifted = reduce_2d(translated);
    for (std::size_t i = 0; i < feats.size(); ++i) {
        CHECK(shifted.points[i][0] == doctest::Approx(base.points[i][0]).epsilon(1e-8));
        CHECK(shifted.points[i][1] == doctest::Approx(base.points[i][1]).epsilon(1e-8));
    }
}

TEST_CASE("gram-path and covariance-path agree") {
    // n < d forces the gram path; padding with duplicate dims keeps content
    std::mt19937_64 rng(11);
    const auto wide = random_features(rng, 4, 10);  // gram path (4 < 10)
    const auto emb_wide = reduce_2d(wide);
    // embedding distances must reflect the same geometry as a direct check:
    // pairwise distances in the top-2 subspace are maximal projections; we
    // verify self-consistency via the variance ordering
    double var0 = 0.0, var1 = 0.0;
    for (const auto& p : emb_wide.points) {
        var0 += p[0] * p[0];
        var1 += p[1] * p[1];
    }
    CHECK(var0 >= var1);
}

// --- gridify -----------------------------------------------------------------

TEST_CASE("points already on distinct cell centers stay put at zero cost") {
    Embedding2D emb;
    // 2x3 grid cell centers in scaled coordinates: x in {0,1,2}, y in {0,1}
    emb.points = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}};
    const auto layout = gridify(emb, 2, 3);
    CHECK(layout.total_cost == doctest::Approx(0.0));
    for (std::size_t i = 0; i < emb.points.size(); ++i) {
        const int r = layout.assignment[i] / 3, c = layout.assignment[i] % 3;
        CHECK(c == static_cast<int>(emb.points[i][0]));
        CHECK(r == static_cast<int>(emb.points[i][1]));
    }
}

TEST_CASE("single point on a 1x1 grid") {
    Embedding2D emb;
    emb.points = {{3.7, -2.2}};
    const auto layout = gridify(emb, 1, 1);
    REQUIRE(layout.assignment.size() == 1);
    CHECK(layout.assignment[0] == 0);
}

TEST_CASE("grid smaller than the point count is rejected") {
    Embedding2D emb;
    emb.points = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(gridify(emb, 1, 2), std::invalid_argument);
}

TEST_CASE("assignment is injective and total") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        Embedding2D emb;
        const std::size_t n = 2 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i) emb.points.push_back({coord(rng), coord(rng)});
        const auto [rows, cols] = grid_auto_dims(n);
        const auto layout = gridify(emb, rows, cols);
        REQUIRE(layout.assignment.size() == n);
        std::vector<int> seen;
        for (int cell : layout.assignment) {
            CHECK(cell >= 0);
            CHECK(cell < rows * cols);
            seen.push_back(cell);
        }
        std::sort(seen.begin(), seen.end());
        CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    }
}

TEST_CASE("assignment cost matches factorial brute force") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        Embedding2D emb;
        for (std::size_t i = 0; i < n; ++i) emb.points.push_back({coord(rng), coord(rng)});
        const int rows = 2 + static_cast<int>(rng() % 2);
        const int cols = 3 + static_cast<int>(rng() % 2);
        if (static_cast<std::size_t>(rows) * cols < n) continue;
        const auto layout = gridify(emb, rows, cols);

        // rebuild the scaled cost matrix exactly as the library defines it
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        for (const auto& p : emb.points) {
            min_x = std::min(min_x, p[0]);
            max_x = std::max(max_x, p[0]);
            min_y = std::min(min_y, p[1]);
            max_y = std::max(max_y, p[1]);
        }
        auto scale = [](double v, double lo, double hi, int extent) {
            if (hi - lo < 1e-15) return (extent - 1) / 2.0;
            return (v - lo) / (hi - lo) * (extent - 1);
        };
        const std::size_t m = static_cast<std::size_t>(rows) * cols;
        std::vector<double> cost(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            const double px = scale(emb.points[i][0], min_x, max_x, cols);
            const double py = scale(emb.points[i][1], min_y, max_y, rows);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) {
                    const double dx = px - c, dy = py - r;
                    cost[i * m + static_cast<std::size_t>(r) * cols + c] = dx * dx + dy * dy;
                }
        }
        const double brute = oracle::assignment_brute(cost, n, m);
        CHECK(layout.total_cost == doctest::Approx(brute).epsilon(1e-9));
    }
}

TEST_CASE("auto grid dims cover the point count with a square") {
    CHECK(grid_auto_dims(1) == std::pair<int, int>{1, 1});
    CHECK(grid_auto_dims(4) == std::pair<int, int>{2, 2});
    CHECK(grid_auto_dims(5) == std::pair<int, int>{3, 3});
    CHECK(grid_auto_dims(18) == std::pair<int, int>{5, 5});
}

TEST_CASE("layout csv has the documented shape") {
    Embedding2D emb;
    emb.points = {{0.5, 1.0}, {2.0, -1.0}};
    const auto layout = gridify(emb, 1, 2);
    const auto path = std::filesystem::temp_directory_path() / "gazedepth_layout.csv";
    save_layout_csv(layout, emb, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "point_id,row,col,x2d,y2d");
    std::string line;
    int count = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++count;
    CHECK(count == 2);
}
