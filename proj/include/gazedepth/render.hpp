#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/image.hpp"
#include "gazedepth/patches.hpp"
#include "gazedepth/projection.hpp"

namespace gazedepth {

namespace detail {

// 5x7 bitmap glyphs, one byte per row, low 5 bits used.
inline const std::uint8_t* glyph_rows(char c) {
    static const std::map<char, std::array<std::uint8_t, 7>> table = {
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
        {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
        {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
        {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
        {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
        {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
        {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
        {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
        {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
        {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
        {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
        {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
        {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
        {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
        {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
        {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
        {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
        {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
        {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
        {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
        {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
        {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
        {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
        {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
        {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    };
    auto it = table.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (it == table.end()) it = table.find('.');
    return it->second.data();
}

inline void draw_label(ImageRGB& img, int x, int y, const std::string& text, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b) {
    for (char c : text) {
        const std::uint8_t* rows = glyph_rows(c);
        for (int gy = 0; gy < 7; ++gy)
            for (int gx = 0; gx < 5; ++gx)
                if (rows[gy] >> (4 - gx) & 1) {
                    const int px = x + gx, py = y + gy;
                    if (px >= 0 && px < img.width && py >= 0 && py < img.height)
                        img.set(px, py, r, g, b);
                }
        x += 6;
    }
}

inline void blit(ImageRGB& dst, const ImageRGB& src, int x0, int y0) {
    for (int y = 0; y < src.height; ++y) {
        if (y0 + y < 0 || y0 + y >= dst.height) continue;
        for (int x = 0; x < src.width; ++x) {
            if (x0 + x < 0 || x0 + x >= dst.width) continue;
            const std::uint8_t* p = src.px(x, y);
            dst.set(x0 + x, y0 + y, p[0], p[1], p[2]);
        }
    }
}

}  // namespace detail

/// One scanpath row of the stripe image: the thumbnails plus the start time
/// of the fixation each one came from.
struct StripeSequence {
    std::string id;
    std::vector<Patch> patches;
    std::vector<double> start_ms;
};

struct StripeImage {
    ImageRGB image;
    int rows = 0;
    double t0_ms = 0.0;
    double bin_ms = 0.0;
    std::vector<std::vector<int>> slots;  // per row, per patch: time-bin column
};

/// Gaze Stripes: one horizontal strip of thumbnails per recording, tiles
/// placed on a shared time axis by fixation start. Gaps between fixations
/// stay background. bin_ms <= 0 picks the smallest gap between consecutive
/// fixation starts so adjacent tiles keep their order without overlap.
inline StripeImage render_gaze_stripes(const std::vector<StripeSequence>& rows, int tile_px,
                                       double bin_ms = 0.0) {
    if (tile_px < 8) throw std::invalid_argument("render_gaze_stripes: tile_px must be >= 8");
    bool any = false;
    for (const auto& r : rows) {
        if (r.patches.size() != r.start_ms.size())
            throw std::invalid_argument("render_gaze_stripes: patch/start count mismatch");
        any = any || !r.patches.empty();
    }
    if (!any) throw std::invalid_argument("render_gaze_stripes: all sequences empty");

    double t0 = std::numeric_limits<double>::infinity();
    double t1 = -std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.start_ms.size(); ++i) {
            t0 = std::min(t0, r.start_ms[i]);
            t1 = std::max(t1, r.start_ms[i]);
            if (i > 0) min_gap = std::min(min_gap, r.start_ms[i] - r.start_ms[i - 1]);
        }
    }
    if (bin_ms <= 0.0) bin_ms = std::isfinite(min_gap) && min_gap > 1.0 ? min_gap : 1000.0;

    StripeImage out;
    out.rows = static_cast<int>(rows.size());
    out.t0_ms = t0;
    out.bin_ms = bin_ms;

    int n_slots = 1;
    for (const auto& r : rows) {
        std::vector<int> slots;
        int prev = -1;
        for (double s : r.start_ms) {
            int slot = static_cast<int>(std::lround((s - t0) / bin_ms));
            slot = std::max(slot, prev + 1);  // deterministic collision shift
            slots.push_back(slot);
            prev = slot;
            n_slots = std::max(n_slots, slot + 1);
        }
        out.slots.push_back(std::move(slots));
    }

    std::size_t label_chars = 1;
    for (const auto& r : rows) label_chars = std::max(label_chars, r.id.size());
    const int gutter = static_cast<int>(label_chars) * 6 + 10;
    const int row_gap = 4;
    const int axis_h = 16;
    const int width = gutter + n_slots * tile_px + 4;
    const int height = static_cast<int>(rows.size()) * (tile_px + row_gap) + axis_h;

    ImageRGB img(width, height, 245);
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        const int y0 = static_cast<int>(ri) * (tile_px + row_gap);
        detail::draw_label(img, 4, y0 + tile_px / 2 - 3, rows[ri].id, 40, 40, 40);
        for (std::size_t pi = 0; pi < rows[ri].patches.size(); ++pi) {
            const ImageRGB& p = rows[ri].patches[pi].pixels;
            const ImageRGB tile =
                (p.width == tile_px && p.height == tile_px) ? p : resize_bilinear(p, tile_px, tile_px);
            detail::blit(img, tile, gutter + out.slots[ri][pi] * tile_px, y0);
        }
    }
    // time axis: baseline plus a tick and ms label every few slots
    const int axis_y = height - axis_h;
    for (int x = gutter; x < width - 4; ++x) img.set(x, axis_y, 120, 120, 120);
    const int tick_every = std::max(1, n_slots / 8);
    for (int s = 0; s < n_slots; s += tick_every) {
        const int x = gutter + s * tile_px;
        for (int dy = 0; dy < 3; ++dy)
            if (axis_y + dy < height) img.set(x, axis_y + dy, 120, 120, 120);
        const auto ms = static_cast<long long>(std::llround(t0 + s * bin_ms));
        detail::draw_label(img, x + 2, axis_y + 5, std::to_string(ms), 90, 90, 90);
    }
    out.image = std::move(img);
    return out;
}

/// Thumbnails placed at their assigned grid cells; unassigned cells stay a
/// neutral background.
inline ImageRGB render_projection_grid(const GridLayout& layout, const std::vector<Patch>& patches,
                                       int tile_px) {
    if (layout.assignment.size() != patches.size())
        throw std::invalid_argument("render_projection_grid: layout/patch count mismatch");
    if (tile_px < 8) throw std::invalid_argument("render_projection_grid: tile_px must be >= 8");

    const int margin = 4;
    ImageRGB img(layout.cols * tile_px + 2 * margin, layout.rows * tile_px + 2 * margin, 230);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const int cell = layout.assignment[i];
        const int r = cell / layout.cols, c = cell % layout.cols;
        const ImageRGB& p = patches[i].pixels;
        const ImageRGB tile =
            (p.width == tile_px && p.height == tile_px) ? p : resize_bilinear(p, tile_px, tile_px);
        detail::blit(img, tile, margin + c * tile_px, margin + r * tile_px);
    }
    return img;
}

/// Provenance sidecar next to a rendered artifact.
inline void write_render_meta(const std::filesystem::path& png_path, const KeyValueMap& kv) {
    auto p = png_path;
    p += ".meta";
    write_kv_file(p, kv);
}

}  // namespace gazedepth
