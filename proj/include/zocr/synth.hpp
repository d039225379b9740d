#pragma once

// Machine-rendered letter corpus built from a 5x7 bitmap font. Used for
// testing the full recognizer without a handwritten dataset.

#include <zocr/error.hpp>
#include <zocr/raster.hpp>
#include <zocr/segment.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace zocr::synth {

inline constexpr int kFontCols = 5;
inline constexpr int kFontRows = 7;

using FontGlyph = std::array<std::string_view, kFontRows>;

inline const FontGlyph& font_glyph(char letter)
{
    static const std::array<FontGlyph, 26> font{{
        {".XXX.", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"}, // A
        {"XXXX.", "X...X", "X...X", "XXXX.", "X...X", "X...X", "XXXX."}, // B
        {".XXX.", "X...X", "X....", "X....", "X....", "X...X", ".XXX."}, // C
        {"XXX..", "X..X.", "X...X", "X...X", "X...X", "X..X.", "XXX.."}, // D
        {"XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "XXXXX"}, // E
        {"XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "X...."}, // F
        {".XXX.", "X...X", "X....", "X.XXX", "X...X", "X...X", ".XXXX"}, // G
        {"X...X", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"}, // H
        {".XXX.", "..X..", "..X..", "..X..", "..X..", "..X..", ".XXX."}, // I
        {"..XXX", "...X.", "...X.", "...X.", "...X.", "X..X.", ".XX.."}, // J
        {"X...X", "X..X.", "X.X..", "XX...", "X.X..", "X..X.", "X...X"}, // K
        {"X....", "X....", "X....", "X....", "X....", "X....", "XXXXX"}, // L
        {"X...X", "XX.XX", "X.X.X", "X.X.X", "X...X", "X...X", "X...X"}, // M
        {"X...X", "X...X", "XX..X", "X.X.X", "X..XX", "X...X", "X...X"}, // N
        {".XXX.", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."}, // O
        {"XXXX.", "X...X", "X...X", "XXXX.", "X....", "X....", "X...."}, // P
        {".XXX.", "X...X", "X...X", "X...X", "X.X.X", "X..X.", ".XX.X"}, // Q
        {"XXXX.", "X...X", "X...X", "XXXX.", "X.X..", "X..X.", "X...X"}, // R
        {".XXXX", "X....", "X....", ".XXX.", "....X", "....X", "XXXX."}, // S
        {"XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "..X.."}, // T
        {"X...X", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."}, // U
        {"X...X", "X...X", "X...X", "X...X", "X...X", ".X.X.", "..X.."}, // V
        {"X...X", "X...X", "X...X", "X.X.X", "X.X.X", "X.X.X", ".X.X."}, // W
        {"X...X", "X...X", ".X.X.", "..X..", ".X.X.", "X...X", "X...X"}, // X
        {"X...X", "X...X", ".X.X.", "..X..", "..X..", "..X..", "..X.."}, // Y
        {"XXXXX", "....X", "...X.", "..X..", ".X...", "X....", "XXXXX"}, // Z
    }};
    if (letter < 'A' || letter > 'Z') throw Error(std::string("no font glyph for '") + letter + "'");
    return font[static_cast<std::size_t>(letter - 'A')];
}

/// Rendering geometry in pixels. Each font cell becomes a cell_w x cell_h
/// block of ink.
struct TextStyle {
    int cell_w = 6;
    int cell_h = 6;
    int letter_gap = 12; // blank columns between letters
    int line_gap = 24;   // blank rows between lines
    int margin = 16;
    std::uint8_t ink = 0;
    std::uint8_t paper = 255;
};

/// Renders lines of A-Z text (separated by '\n'; ' ' leaves a blank slot) as
/// dark ink on light paper.
inline GrayRaster render_text(std::string_view text, const TextStyle& style = {})
{
    std::vector<std::string_view> lines;
    for (std::size_t start = 0;;) {
        const auto nl = text.find('\n', start);
        lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    std::size_t longest = 1;
    for (auto l : lines) longest = std::max(longest, l.size());

    const int glyph_w = kFontCols * style.cell_w;
    const int glyph_h = kFontRows * style.cell_h;
    const int n_cols = static_cast<int>(longest);
    const int n_lines = static_cast<int>(lines.size());
    const int width = 2 * style.margin + n_cols * glyph_w + (n_cols - 1) * style.letter_gap;
    const int height = 2 * style.margin + n_lines * glyph_h + (n_lines - 1) * style.line_gap;
    GrayRaster img(width, height, style.paper);

    for (int li = 0; li < n_lines; ++li) {
        const auto line = lines[static_cast<std::size_t>(li)];
        for (int ci = 0; ci < static_cast<int>(line.size()); ++ci) {
            const char ch = line[static_cast<std::size_t>(ci)];
            if (ch == ' ') continue;
            const FontGlyph& g = font_glyph(ch);
            const int x0 = style.margin + ci * (glyph_w + style.letter_gap);
            const int y0 = style.margin + li * (glyph_h + style.line_gap);
            for (int fr = 0; fr < kFontRows; ++fr)
                for (int fc = 0; fc < kFontCols; ++fc)
                    if (g[static_cast<std::size_t>(fr)][static_cast<std::size_t>(fc)] == 'X')
                        for (int r = 0; r < style.cell_h; ++r)
                            for (int c = 0; c < style.cell_w; ++c)
                                img.set(y0 + fr * style.cell_h + r, x0 + fc * style.cell_w + c, style.ink);
        }
    }
    return img;
}

/// The 26 letters rendered, preprocessed and segmented into clean 90x60
/// glyphs, index 0 = 'A'.
inline std::vector<BinaryRaster> template_glyphs(const TextStyle& style = {})
{
    std::vector<BinaryRaster> out;
    for (char ch = 'A'; ch <= 'Z'; ++ch) {
        auto glyphs = segment_page(preprocess(render_text(std::string(1, ch), style)));
        if (glyphs.size() != 1) throw Error(std::string("template for '") + ch + "' did not segment to one glyph");
        out.push_back(std::move(glyphs.front().glyph));
    }
    return out;
}

/// Shifts the glyph by (dy, dx) in {-1, 0, 1}^2, filling vacated pixels with
/// background, then flips `flip_rate` of all pixels chosen without
/// replacement.
inline BinaryRaster jitter_glyph(const BinaryRaster& glyph, std::mt19937_64& rng, double flip_rate = 0.02)
{
    const int h = glyph.height(), w = glyph.width();
    std::uniform_int_distribution<int> shift(-1, 1);
    const int dy = shift(rng), dx = shift(rng);
    BinaryRaster out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (glyph.contains(r - dy, c - dx) && glyph(r - dy, c - dx)) out.set(r, c, 1);

    std::vector<int> idx(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    const auto flips = static_cast<std::size_t>(flip_rate * static_cast<double>(idx.size()) + 0.5);
    for (std::size_t i = 0; i < flips; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
        const int r = idx[i] / w, c = idx[i] % w;
        out.set(r, c, out(r, c) ? 0 : 1);
    }
    return out;
}

struct LabeledGlyphSample {
    BinaryRaster glyph;
    int label = 0; // 0 = 'A'
};

/// `copies` jittered variants of each template, grouped by copy index so the
/// first k*26 samples hold copies 0..k-1 of every letter.
inline std::vector<LabeledGlyphSample> jittered_corpus(const std::vector<BinaryRaster>& templates, int copies,
                                                       std::uint64_t seed, double flip_rate = 0.02)
{
    std::mt19937_64 rng(seed);
    std::vector<LabeledGlyphSample> out;
    for (int k = 0; k < copies; ++k)
        for (std::size_t c = 0; c < templates.size(); ++c)
            out.push_back({jitter_glyph(templates[c], rng, flip_rate), static_cast<int>(c)});
    return out;
}

/// Gray-level single-letter image with randomized cell size, placement and
/// mild intensity noise; suitable for writing an on-disk dataset.
inline GrayRaster render_letter_variant(char letter, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> cell(5, 7), offset(0, 2), noise(0, 24);
    TextStyle style;
    style.cell_w = cell(rng);
    style.cell_h = cell(rng);
    style.margin = 12 + offset(rng);
    GrayRaster img = render_text(std::string(1, letter), style);
    GrayRaster noisy(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            const int n = noise(rng);
            noisy.set(r, c, static_cast<std::uint8_t>(img(r, c) ? img(r, c) - n : n));
        }
    }
    return noisy;
}

} // namespace zocr::synth
