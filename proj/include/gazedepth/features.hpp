#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/patches.hpp"

namespace gazedepth {

struct FeatureVector {
    std::vector<double> values;
    double norm = 0.0;
};

inline FeatureVector make_feature(std::vector<double> values) {
    FeatureVector f;
    f.norm = std::sqrt(std::inner_product(values.begin(), values.end(), values.begin(), 0.0));
    f.values = std::move(values);
    return f;
}

inline constexpr int kFeatureDim = 512;

// ---------------------------------------------------------------------------
// Built-in embedder: 4x4 spatial grid over the canonical raster.
//   - per cell, per channel: 8-bin intensity histogram  -> 16*3*8 = 384 dims
//   - per cell: 8-bin gradient orientation histogram    -> 16*8   = 128 dims
// Each 8-bin block is L1-normalized. Gradient votes are magnitude-weighted;
// zero-gradient pixels vote into bin 0 with unit weight so flat cells keep a
// defined signature. Blocks that end up empty stay all-zero.

inline FeatureVector embed_patch(const Patch& patch) {
    const ImageRGB& img = patch.pixels;
    if (img.width < 4 || img.height < 4 || img.width != img.height)
        throw std::invalid_argument("embed_patch: canonical raster missing or too small");

    constexpr int kBins = 8;
    constexpr int kCells = 4;
    const int n = img.width;

    std::vector<double> v(kFeatureDim, 0.0);
    auto cell_of = [&](int coord) { return std::min(coord * kCells / n, kCells - 1); };

    // color histograms
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const int cell = cell_of(y) * kCells + cell_of(x);
            const std::uint8_t* p = img.px(x, y);
            for (int c = 0; c < 3; ++c) {
                const int bin = p[c] >> 5;
                v[(cell * 3 + c) * kBins + bin] += 1.0;
            }
        }
    }
    // gradient orientation histograms
    const int grad_base = kCells * kCells * 3 * kBins;  // 384
    auto gray = [&](int x, int y) {
        const std::uint8_t* p = img.px(std::clamp(x, 0, n - 1), std::clamp(y, 0, n - 1));
        return (p[0] + p[1] + p[2]) / 3.0;
    };
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double gx = (gray(x + 1, y) - gray(x - 1, y)) / 2.0;
            const double gy = (gray(x, y + 1) - gray(x, y - 1)) / 2.0;
            const double mag = std::hypot(gx, gy);
            const int cell = cell_of(y) * kCells + cell_of(x);
            if (mag < 1e-12) {
                v[grad_base + cell * kBins] += 1.0;
            } else {
                int bin = static_cast<int>((std::atan2(gy, gx) + kPi) / (2.0 * kPi) * kBins);
                bin = std::clamp(bin, 0, kBins - 1);
                v[grad_base + cell * kBins + bin] += mag;
            }
        }
    }
    // L1-normalize each 8-bin block
    for (std::size_t b = 0; b < v.size(); b += kBins) {
        double sum = 0.0;
        for (int k = 0; k < kBins; ++k) sum += v[b + k];
        if (sum > 0.0)
            for (int k = 0; k < kBins; ++k) v[b + k] /= sum;
    }
    return make_feature(std::move(v));
}

inline std::vector<FeatureVector> embed_patches(const std::vector<Patch>& patches) {
    std::vector<FeatureVector> out(patches.size());
    parallel_for(patches.size(), [&](std::size_t i) { out[i] = embed_patch(patches[i]); });
    return out;
}

// ---------------------------------------------------------------------------

inline double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                    std::to_string(a.values.size()) + " vs " +
                                    std::to_string(b.values.size()) + ")");
    if (!(a.norm > 0.0) || !(b.norm > 0.0))
        throw std::domain_error("cosine_similarity: zero-norm feature vector");
    if (a.values == b.values) return 1.0;  // exact, despite sqrt round-off in the norms
    const double dot =
        std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0);
    return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Feature file: text header "dim=<D> count=<N>", then N lines of D
// space-separated decimals. Lossless round-trip.

inline void export_features(const std::vector<FeatureVector>& vectors,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const std::size_t dim = vectors.empty() ? 0 : vectors.front().values.size();
    for (const auto& fv : vectors)
        if (fv.values.size() != dim)
            throw std::invalid_argument("export_features: inconsistent dimensions");
    out << "dim=" << dim << " count=" << vectors.size() << "\n";
    for (const auto& fv : vectors) {
        for (std::size_t i = 0; i < fv.values.size(); ++i) {
            if (i) out << ' ';
            out << format_double(fv.values[i]);
        }
        out << '\n';
    }
}

inline std::vector<FeatureVector> import_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty feature file");
    std::size_t dim = 0, count = 0;
    {
        auto fields = split(trim(line), ' ');
        if (fields.size() != 2 || fields[0].rfind("dim=", 0) != 0 || fields[1].rfind("count=", 0) != 0)
            throw std::runtime_error(path.string() + ": expected header 'dim=<D> count=<N>'");
        dim = static_cast<std::size_t>(parse_long(std::string_view(fields[0]).substr(4)));
        count = static_cast<std::size_t>(parse_long(std::string_view(fields[1]).substr(6)));
    }
    std::vector<FeatureVector> out;
    out.reserve(count);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split(sv, ' ');
        if (fields.size() != dim)
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": expected " +
                                     std::to_string(dim) + " values, got " +
                                     std::to_string(fields.size()));
        std::vector<double> vals(dim);
        for (std::size_t i = 0; i < dim; ++i) vals[i] = parse_double(fields[i]);
        out.push_back(make_feature(std::move(vals)));
    }
    if (out.size() != count)
        throw std::runtime_error(path.string() + ": header count=" + std::to_string(count) +
                                 " but file has " + std::to_string(out.size()) + " rows");
    return out;
}

}  // namespace gazedepth
