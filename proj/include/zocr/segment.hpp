#pragma once

// Connected-component segmentation of a preprocessed page and per-character
// normalization to the fixed 90x60 glyph grid.

#include <zocr/error.hpp>
#include <zocr/raster.hpp>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace zocr {

inline constexpr int kGlyphRows = 90;
inline constexpr int kGlyphCols = 60;
inline constexpr int kDefaultMinPixels = 8;

struct Pixel {
    int row = 0;
    int col = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Inclusive bounding box; x is the column axis, y the row axis.
struct Box {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    friend bool operator==(const Box&, const Box&) = default;
};

struct Component {
    int label = 0;
    Box box;
    std::vector<Pixel> pixels;
};

/// One segmented character normalized to 90 rows x 60 columns.
struct GlyphBox {
    int label = 0;
    Box box;
    BinaryRaster glyph;
};

/// 8-connected labelling. Labels run 1..k in order of first encounter during a
/// row-major scan; each component's pixels are listed in discovery order.
inline std::vector<Component> label_components(const BinaryRaster& page)
{
    const int h = page.height(), w = page.width();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
    std::vector<Component> out;
    std::vector<Pixel> queue;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!page(r, c) || labels[static_cast<std::size_t>(r) * w + c]) continue;
            Component comp;
            comp.label = static_cast<int>(out.size()) + 1;
            comp.box = {c, r, c, r};
            labels[static_cast<std::size_t>(r) * w + c] = comp.label;
            queue.assign(1, Pixel{r, c});
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const Pixel p = queue[head];
                comp.box.x0 = std::min(comp.box.x0, p.col);
                comp.box.x1 = std::max(comp.box.x1, p.col);
                comp.box.y0 = std::min(comp.box.y0, p.row);
                comp.box.y1 = std::max(comp.box.y1, p.row);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = p.row + dr, nc = p.col + dc;
                        if (!page.contains(nr, nc) || !page(nr, nc)) continue;
                        int& l = labels[static_cast<std::size_t>(nr) * w + nc];
                        if (l) continue;
                        l = comp.label;
                        queue.push_back({nr, nc});
                    }
                }
            }
            comp.pixels = queue;
            out.push_back(std::move(comp));
        }
    }
    return out;
}

/// True when the vertical extents overlap by at least half the smaller height.
inline bool same_text_line(const Box& a, const Box& b)
{
    const int overlap = std::min(a.y1, b.y1) - std::max(a.y0, b.y0) + 1;
    if (overlap <= 0) return false;
    return 2 * overlap >= std::min(a.height(), b.height());
}

/// Reading order: boxes are grouped into lines (transitive closure of
/// `same_text_line`), lines go top to bottom by their highest top edge, and
/// boxes within a line go left to right.
inline std::vector<Component> order_glyphs(std::vector<Component> components)
{
    const std::size_t n = components.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (same_text_line(components[i].box, components[j].box)) parent[find(i)] = find(j);

    std::vector<std::size_t> line_of(n);
    std::vector<int> root_top(n, 0);
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = line_of[i] = find(i);
        const int top = components[i].box.y0;
        root_top[root] = seen[root] ? std::min(root_top[root], top) : top;
        seen[root] = true;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ba = components[a].box;
        const auto& bb = components[b].box;
        const int ta = root_top[line_of[a]], tb = root_top[line_of[b]];
        if (line_of[a] != line_of[b]) {
            if (ta != tb) return ta < tb;
            return line_of[a] < line_of[b];
        }
        if (ba.x0 != bb.x0) return ba.x0 < bb.x0;
        if (ba.y0 != bb.y0) return ba.y0 < bb.y0;
        return components[a].label < components[b].label;
    });

    std::vector<Component> out;
    out.reserve(n);
    for (auto i : order) out.push_back(std::move(components[i]));
    return out;
}

/// Nearest-neighbor resample of an arbitrary binary raster onto the glyph
/// grid: output (r, c) copies input (floor(r*H/90), floor(c*W/60)).
inline BinaryRaster resample_to_glyph(const BinaryRaster& crop)
{
    const int h = crop.height(), w = crop.width();
    BinaryRaster out(kGlyphCols, kGlyphRows);
    for (int r = 0; r < kGlyphRows; ++r) {
        const int sr = r * h / kGlyphRows;
        for (int c = 0; c < kGlyphCols; ++c) {
            const int sc = c * w / kGlyphCols;
            if (crop(sr, sc)) out.set(r, c, 1);
        }
    }
    return out;
}

/// Crops the component to its bounding box and resamples to 90x60.
inline GlyphBox normalize_glyph(const Component& comp)
{
    if (comp.pixels.empty()) throw Error("empty glyph");
    const Box& b = comp.box;
    if (b.x1 < b.x0 || b.y1 < b.y0) throw Error("invalid glyph bounding box");
    BinaryRaster crop(b.width(), b.height());
    for (const auto& p : comp.pixels) {
        if (p.row < b.y0 || p.row > b.y1 || p.col < b.x0 || p.col > b.x1)
            throw Error("glyph pixel outside its bounding box");
        crop.set(p.row - b.y0, p.col - b.x0, 1);
    }
    return GlyphBox{comp.label, b, resample_to_glyph(crop)};
}

/// Label, drop components below `min_pixels`, order, normalize. Components
/// whose strokes are too thin to survive downsampling are dropped as well.
inline std::vector<GlyphBox> segment_page(const BinaryRaster& page, int min_pixels = kDefaultMinPixels)
{
    if (min_pixels < 1) throw Error("min_pixels must be at least 1");
    std::vector<Component> kept;
    for (auto& comp : label_components(page))
        if (comp.pixels.size() >= static_cast<std::size_t>(min_pixels)) kept.push_back(std::move(comp));

    std::vector<GlyphBox> out;
    for (const auto& comp : order_glyphs(std::move(kept))) {
        GlyphBox g = normalize_glyph(comp);
        if (g.glyph.count() > 0) out.push_back(std::move(g));
    }
    return out;
}

} // namespace zocr
