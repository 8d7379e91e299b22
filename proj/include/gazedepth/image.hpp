#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace gazedepth {

/// 8-bit RGB raster, row-major, tightly packed.
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // width * height * 3

    ImageRGB() = default;
    ImageRGB(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t* px(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* px(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = px(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }

    bool operator==(const ImageRGB&) const = default;
};

/// Bilinear resize with half-pixel center alignment and edge clamping.
inline ImageRGB resize_bilinear(const ImageRGB& src, int out_w, int out_h) {
    if (src.width < 1 || src.height < 1) throw std::invalid_argument("resize_bilinear: empty source");
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize_bilinear: empty target");
    ImageRGB dst(out_w, out_h);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y1 = y0 + 1;
        y0 = std::clamp(y0, 0, src.height - 1);
        y1 = std::clamp(y1, 0, src.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x1 = x0 + 1;
            x0 = std::clamp(x0, 0, src.width - 1);
            x1 = std::clamp(x1, 0, src.width - 1);
            const std::uint8_t* p00 = src.px(x0, y0);
            const std::uint8_t* p10 = src.px(x1, y0);
            const std::uint8_t* p01 = src.px(x0, y1);
            const std::uint8_t* p11 = src.px(x1, y1);
            std::uint8_t* out = dst.px(x, y);
            for (int c = 0; c < 3; ++c) {
                double top = p00[c] * (1.0 - wx) + p10[c] * wx;
                double bot = p01[c] * (1.0 - wx) + p11[c] * wx;
                double v = top * (1.0 - wy) + bot * wy;
                out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return dst;
}

inline void write_png(const std::filesystem::path& path, const ImageRGB& img) {
    if (img.width < 1 || img.height < 1) throw std::invalid_argument("write_png: empty image");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.data.data(), 0, nullptr))
        throw std::runtime_error("write_png failed: " + path.string() + ": " + png.message);
}

inline ImageRGB read_png(const std::filesystem::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw std::runtime_error("read_png failed: " + path.string() + ": " + png.message);
    png.format = PNG_FORMAT_RGB;
    ImageRGB img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr))
        throw std::runtime_error("read_png failed: " + path.string() + ": " + png.message);
    return img;
}

}  // namespace gazedepth
