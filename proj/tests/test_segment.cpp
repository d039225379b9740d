#include "test_support.hpp"

#include <zocr/segment.hpp>
#include <zocr/synth.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace zocr;
using zocr::testing::from_rows;

namespace {

Component make_component(const BinaryRaster& crop, int label = 1)
{
    Component c;
    c.label = label;
    c.box = {0, 0, crop.width() - 1, crop.height() - 1};
    for (int y = 0; y < crop.height(); ++y)
        for (int x = 0; x < crop.width(); ++x)
            if (crop(y, x)) c.pixels.push_back({y, x});
    return c;
}

Component box_only(int label, int x0, int y0, int x1, int y1)
{
    return Component{label, {x0, y0, x1, y1}, {{y0, x0}}};
}

} // namespace

TEST(LabelComponents, Examples)
{
    EXPECT_TRUE(label_components(BinaryRaster(8, 8)).empty());

    const auto two = from_rows({"##...##", "##...##"});
    EXPECT_EQ(label_components(two).size(), 2u);

    const auto diag = from_rows({"#.", ".#"});
    const auto comps = label_components(diag);
    ASSERT_EQ(comps.size(), 1u);
    EXPECT_EQ(comps[0].pixels.size(), 2u);
}

TEST(LabelComponents, LabelsFollowFirstEncounterOrder)
{
    const auto page = from_rows({"....#", "#....", "#..##"});
    const auto comps = label_components(page);
    ASSERT_EQ(comps.size(), 3u);
    EXPECT_EQ(comps[0].label, 1);
    EXPECT_EQ(comps[0].box, (Box{4, 0, 4, 0}));
    EXPECT_EQ(comps[1].box, (Box{0, 1, 0, 2}));
    EXPECT_EQ(comps[2].box, (Box{3, 2, 4, 2}));
}

TEST(LabelComponents, PartitionsForegroundAndMatchesFloodFillCount)
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const auto page = zocr::testing::random_binary(rng, 24);
        const auto comps = label_components(page);
        EXPECT_EQ(static_cast<int>(comps.size()), zocr::testing::count_components_oracle(page));
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            EXPECT_EQ(comps[i].label, static_cast<int>(i) + 1);
            for (const auto& p : comps[i].pixels) {
                EXPECT_EQ(page(p.row, p.col), 1);
                EXPECT_TRUE(seen.insert({p.row, p.col}).second) << "pixel in two components";
                EXPECT_GE(p.col, comps[i].box.x0);
                EXPECT_LE(p.col, comps[i].box.x1);
                EXPECT_GE(p.row, comps[i].box.y0);
                EXPECT_LE(p.row, comps[i].box.y1);
            }
        }
        EXPECT_EQ(seen.size(), page.count());
    }
}

TEST(LabelComponents, TranslationInvariant)
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const auto page = zocr::testing::random_binary(rng, 16);
        BinaryRaster shifted(page.width() + 3, page.height() + 2);
        for (int y = 0; y < page.height(); ++y)
            for (int x = 0; x < page.width(); ++x)
                if (page(y, x)) shifted.set(y + 2, x + 3, 1);
        const auto a = label_components(page);
        const auto b = label_components(shifted);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].pixels.size(), b[i].pixels.size());
            EXPECT_EQ(b[i].box, (Box{a[i].box.x0 + 3, a[i].box.y0 + 2, a[i].box.x1 + 3, a[i].box.y1 + 2}));
        }
    }
}

TEST(OrderGlyphs, Examples)
{
    auto one = order_glyphs({box_only(1, 5, 5, 9, 9)});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].label, 1);

    auto row = order_glyphs({box_only(1, 40, 0, 45, 10), box_only(2, 10, 0, 15, 10), box_only(3, 25, 1, 30, 11)});
    ASSERT_EQ(row.size(), 3u);
    EXPECT_EQ(row[0].box.x0, 10);
    EXPECT_EQ(row[1].box.x0, 25);
    EXPECT_EQ(row[2].box.x0, 40);

    auto lines = order_glyphs({box_only(1, 0, 20, 5, 30), box_only(2, 50, 0, 55, 10)});
    EXPECT_EQ(lines[0].label, 2);
    EXPECT_EQ(lines[1].label, 1);
}

TEST(OrderGlyphs, HalfHeightOverlapRule)
{
    // heights 10 and 10; overlap of 5 rows is exactly half: same line
    EXPECT_TRUE(same_text_line({0, 0, 1, 9}, {0, 5, 1, 14}));
    // overlap of 4 rows: different lines
    EXPECT_FALSE(same_text_line({0, 0, 1, 9}, {0, 6, 1, 15}));
    // small box fully inside a tall one's extent
    EXPECT_TRUE(same_text_line({0, 0, 1, 40}, {0, 10, 1, 12}));
}

TEST(NormalizeGlyph, IdentityAtTargetSize)
{
    std::mt19937_64 rng(7);
    const auto crop = zocr::testing::random_binary(rng, kGlyphCols, kGlyphRows, 0.4);
    auto comp = make_component(crop);
    comp.box = {0, 0, kGlyphCols - 1, kGlyphRows - 1};
    EXPECT_EQ(normalize_glyph(comp).glyph, crop);
}

TEST(NormalizeGlyph, UpsamplingReplicatesTwoByTwoBlocks)
{
    std::mt19937_64 rng(8);
    auto crop = zocr::testing::random_binary(rng, 30, 45, 0.5);
    crop.set(0, 0, 1);
    auto comp = make_component(crop);
    comp.box = {0, 0, 29, 44};
    const auto g = normalize_glyph(comp).glyph;
    ASSERT_EQ(g.height(), 90);
    ASSERT_EQ(g.width(), 60);
    for (int r = 0; r < 90; ++r)
        for (int c = 0; c < 60; ++c) EXPECT_EQ(g(r, c), crop(r / 2, c / 2));
}

TEST(NormalizeGlyph, DownsamplingTakesEverySecondPixel)
{
    std::mt19937_64 rng(9);
    auto crop = zocr::testing::random_binary(rng, 120, 180, 0.5);
    crop.set(0, 0, 1);
    crop.set(179, 119, 1);
    auto comp = make_component(crop);
    comp.box = {0, 0, 119, 179};
    const auto g = normalize_glyph(comp).glyph;
    for (int r = 0; r < 90; ++r)
        for (int c = 0; c < 60; ++c) EXPECT_EQ(g(r, c), crop(2 * r, 2 * c));
}

TEST(NormalizeGlyph, EmptyComponentIsAnError)
{
    Component c;
    c.box = {0, 0, 3, 3};
    try {
        normalize_glyph(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "empty glyph");
    }
}

TEST(NormalizeGlyph, SmallCropsNeverVanish)
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const auto page = zocr::testing::random_binary(rng, 40);
        for (const auto& comp : label_components(page)) {
            const auto g = normalize_glyph(comp);
            EXPECT_GT(g.glyph.count(), 0u);
            EXPECT_EQ(g.glyph.height(), kGlyphRows);
            EXPECT_EQ(g.glyph.width(), kGlyphCols);
        }
    }
}

TEST(SegmentPage, EmptyPage)
{
    EXPECT_TRUE(segment_page(BinaryRaster(50, 50)).empty());
    EXPECT_THROW(segment_page(BinaryRaster(5, 5), 0), Error);
}

TEST(SegmentPage, FiveLettersInReadingOrder)
{
    const auto page = preprocess(synth::render_text("QUICK"));
    const int expected = zocr::testing::count_components_oracle(page);
    ASSERT_EQ(expected, 5);
    const auto glyphs = segment_page(page);
    ASSERT_EQ(glyphs.size(), 5u);
    for (std::size_t i = 1; i < glyphs.size(); ++i) EXPECT_LT(glyphs[i - 1].box.x1, glyphs[i].box.x0);
    for (const auto& g : glyphs) {
        EXPECT_EQ(g.glyph.height(), 90);
        EXPECT_EQ(g.glyph.width(), 60);
        EXPECT_GT(g.glyph.count(), 0u);
    }
}

TEST(SegmentPage, TwoLinesReadTopToBottom)
{
    const auto page = preprocess(synth::render_text("TO\nAB"));
    const auto glyphs = segment_page(page);
    ASSERT_EQ(glyphs.size(), 4u);
    EXPECT_LT(glyphs[0].box.x0, glyphs[1].box.x0);
    EXPECT_LT(glyphs[1].box.y1, glyphs[2].box.y0);
    EXPECT_LT(glyphs[2].box.x0, glyphs[3].box.x0);
}

TEST(SegmentPage, SpeckBelowMinPixelsIsDropped)
{
    BinaryRaster page(20, 20);
    page.set(3, 3, 1);
    page.set(3, 4, 1);
    EXPECT_TRUE(segment_page(page, 10).empty());
    EXPECT_EQ(segment_page(page, 2).size(), 1u);
}

TEST(SegmentPage, SingleGlyphSizedComponentReproducedExactly)
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> run(0, 59);
    // frame plus left-anchored runs of random length: one component with a
    // tight 90x60 bounding box
    BinaryRaster glyph(60, 90);
    for (int r = 0; r < 90; ++r)
        for (int c = 0, n = run(rng); c < n; ++c) glyph.set(r, c, 1);
    for (int r = 0; r < 90; ++r) {
        glyph.set(r, 0, 1);
        glyph.set(r, 59, 1);
    }
    for (int c = 0; c < 60; ++c) {
        glyph.set(0, c, 1);
        glyph.set(89, c, 1);
    }
    BinaryRaster page(100, 130);
    for (int r = 0; r < 90; ++r)
        for (int c = 0; c < 60; ++c)
            if (glyph(r, c)) page.set(r + 20, c + 17, 1);
    const auto glyphs = segment_page(page);
    ASSERT_EQ(glyphs.size(), 1u);
    EXPECT_EQ(glyphs[0].glyph, glyph);
    EXPECT_EQ(glyphs[0].box, (Box{17, 20, 76, 109}));
}
