#pragma once

// Raster types and the preprocessing chain applied to a scanned page:
// binarize -> sobel_edges -> dilate -> fill_holes.

#include <zocr/error.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace zocr {

struct GrayTag {};
struct BinaryTag {};

/// Row-major 2-D pixel grid. `GrayRaster` holds intensities in [0, 255];
/// `BinaryRaster` holds 0 (background) or 1 (foreground).
template <typename Tag>
class Raster {
public:
    using value_type = std::uint8_t;

    Raster() = default;

    Raster(int width, int height, value_type fill = 0) : width_(width), height_(height)
    {
        check_dims(width, height);
        if constexpr (std::is_same_v<Tag, BinaryTag>) check_binary(fill);
        pixels_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Raster(int width, int height, std::vector<value_type> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels))
    {
        check_dims(width, height);
        if (pixels_.size() != static_cast<std::size_t>(width) * height)
            throw Error("raster pixel count " + std::to_string(pixels_.size()) + " does not match " +
                        std::to_string(width) + "x" + std::to_string(height));
        if constexpr (std::is_same_v<Tag, BinaryTag>)
            for (auto v : pixels_) check_binary(v);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    value_type operator()(int row, int col) const { return pixels_[index(row, col)]; }

    void set(int row, int col, value_type v)
    {
        if constexpr (std::is_same_v<Tag, BinaryTag>) check_binary(v);
        pixels_[index(row, col)] = v;
    }

    bool contains(int row, int col) const
    {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    std::span<const value_type> pixels() const { return pixels_; }

    /// Number of foreground pixels (binary) or sum of intensities (gray).
    std::size_t count() const
    {
        std::size_t n = 0;
        for (auto v : pixels_) n += v;
        return n;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static void check_dims(int width, int height)
    {
        if (width < 1 || height < 1)
            throw Error("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
    static void check_binary(value_type v)
    {
        if (v > 1) throw Error("binary raster pixel must be 0 or 1, got " + std::to_string(v));
    }
    std::size_t index(int row, int col) const
    {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<value_type> pixels_;
};

using GrayRaster = Raster<GrayTag>;
using BinaryRaster = Raster<BinaryTag>;

/// Otsu's global threshold. Foreground is `intensity < t`; returns the
/// smallest t in [1, 255] maximizing between-class variance, or nullopt when
/// no split separates the histogram (uniform image).
inline std::optional<int> otsu_threshold(const GrayRaster& img)
{
    std::array<double, 256> hist{};
    for (auto v : img.pixels()) hist[v] += 1.0;
    const double total = static_cast<double>(img.pixels().size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

    double w0 = 0.0, sum0 = 0.0, best = 0.0;
    std::optional<int> best_t;
    for (int t = 1; t < 256; ++t) {
        // class 0 = intensities [0, t-1]
        w0 += hist[t - 1];
        sum0 += (t - 1) * hist[t - 1];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

/// Dark ink on light paper: foreground iff intensity < threshold. Without an
/// explicit threshold Otsu's method picks one; a uniform image has no ink.
inline BinaryRaster binarize(const GrayRaster& img, std::optional<int> threshold = std::nullopt)
{
    BinaryRaster out(img.width(), img.height());
    const std::optional<int> t = threshold ? threshold : otsu_threshold(img);
    if (!t) return out;
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c)
            if (img(r, c) < *t) out.set(r, c, 1);
    return out;
}

/// 1 where |Gx| + |Gy| of the 3x3 Sobel operator is nonzero; borders replicate.
inline BinaryRaster sobel_edges(const BinaryRaster& img)
{
    const int h = img.height(), w = img.width();
    auto px = [&](int r, int c) -> int {
        r = r < 0 ? 0 : (r >= h ? h - 1 : r);
        c = c < 0 ? 0 : (c >= w ? w - 1 : c);
        return img(r, c);
    };
    BinaryRaster out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                           (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            const int gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                           (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            if (std::abs(gx) + std::abs(gy) > 0) out.set(r, c, 1);
        }
    }
    return out;
}

/// Dilation by a 3x3 square, neighborhood clipped at the border.
inline BinaryRaster dilate(const BinaryRaster& img)
{
    const int h = img.height(), w = img.width();
    BinaryRaster out(w, h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!img(r, c)) continue;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    if (img.contains(r + dr, c + dc)) out.set(r + dr, c + dc, 1);
        }
    }
    return out;
}

/// Sets every background pixel that is not 4-connected to the border.
inline BinaryRaster fill_holes(const BinaryRaster& img)
{
    const int h = img.height(), w = img.width();
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;
    auto seed = [&](int r, int c) {
        auto& o = outside[static_cast<std::size_t>(r) * w + c];
        if (!img(r, c) && !o) {
            o = 1;
            stack.emplace_back(r, c);
        }
    };
    for (int c = 0; c < w; ++c) {
        seed(0, c);
        seed(h - 1, c);
    }
    for (int r = 0; r < h; ++r) {
        seed(r, 0);
        seed(r, w - 1);
    }
    while (!stack.empty()) {
        auto [r, c] = stack.back();
        stack.pop_back();
        if (r > 0) seed(r - 1, c);
        if (r + 1 < h) seed(r + 1, c);
        if (c > 0) seed(r, c - 1);
        if (c + 1 < w) seed(r, c + 1);
    }
    BinaryRaster out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (img(r, c) || !outside[static_cast<std::size_t>(r) * w + c]) out.set(r, c, 1);
    return out;
}

inline BinaryRaster preprocess(const GrayRaster& img, std::optional<int> threshold = std::nullopt)
{
    return fill_holes(dilate(sobel_edges(binarize(img, threshold))));
}

} // namespace zocr
