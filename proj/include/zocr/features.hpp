#pragma once

// Zonal feature extraction. A 90x60 glyph is split into a 9x6 grid of 10x10
// zones; each zone contributes the average of its per-line foreground counts
// along one of three line families. Optional row/column aggregates extend the
// 54 zone features to 69.

#include <zocr/error.hpp>
#include <zocr/raster.hpp>
#include <zocr/segment.hpp>

#include <algorithm>
#include <array>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zocr {

inline constexpr int kZoneSize = 10;
inline constexpr int kZoneRows = kGlyphRows / kZoneSize; // 9
inline constexpr int kZoneCols = kGlyphCols / kZoneSize; // 6
inline constexpr int kZoneCount = kZoneRows * kZoneCols; // 54
inline constexpr int kAggregateCount = kZoneRows + kZoneCols; // 15
inline constexpr int kDiagonalLines = 2 * kZoneSize - 1; // 19

enum class Orientation { Diagonal, Horizontal, Vertical };

/// How per-line counts are averaged into one zone value.
enum class AveragingMode {
    AllLines,      // divide by the number of lines in the family
    NonEmptyLines, // divide by the number of lines with at least one pixel
};

inline std::string_view to_string(Orientation o)
{
    switch (o) {
    case Orientation::Diagonal: return "diagonal";
    case Orientation::Horizontal: return "horizontal";
    case Orientation::Vertical: return "vertical";
    }
    return "?";
}

inline std::string_view to_string(AveragingMode m)
{
    return m == AveragingMode::AllLines ? "all-lines" : "non-empty";
}

inline Orientation parse_orientation(std::string_view s)
{
    if (s == "diagonal") return Orientation::Diagonal;
    if (s == "horizontal") return Orientation::Horizontal;
    if (s == "vertical") return Orientation::Vertical;
    throw Error("unknown orientation '" + std::string(s) + "'");
}

inline AveragingMode parse_averaging_mode(std::string_view s)
{
    if (s == "all-lines") return AveragingMode::AllLines;
    if (s == "non-empty") return AveragingMode::NonEmptyLines;
    throw Error("unknown averaging mode '" + std::string(s) + "'");
}

/// Which extractor produced a vector, and therefore its length.
struct FeatureSpec {
    Orientation orientation = Orientation::Diagonal;
    bool with_aggregates = true;
    AveragingMode mode = AveragingMode::AllLines;

    int dimension() const { return with_aggregates ? kZoneCount + kAggregateCount : kZoneCount; }
    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// values[0..53]: zone (zr, zc) at 6*zr + zc; values[54..62]: row aggregates
/// top to bottom; values[63..68]: column aggregates left to right.
struct FeatureVector {
    Orientation orientation = Orientation::Diagonal;
    bool with_aggregates = false;
    std::vector<double> values;
};

/// The 54 zones of a glyph in zone-row-major order.
class ZoneGrid {
public:
    explicit ZoneGrid(std::vector<BinaryRaster> zones) : zones_(std::move(zones)) {}

    const BinaryRaster& zone(int zone_row, int zone_col) const
    {
        return zones_.at(static_cast<std::size_t>(zone_row * kZoneCols + zone_col));
    }
    std::span<const BinaryRaster> zones() const { return zones_; }

private:
    std::vector<BinaryRaster> zones_;
};

/// Zone (zr, zc) covers rows [10*zr, 10*zr + 9] and columns [10*zc, 10*zc + 9].
inline ZoneGrid zone_partition(const BinaryRaster& glyph)
{
    if (glyph.height() != kGlyphRows || glyph.width() != kGlyphCols)
        throw Error("glyph not 90x60 (got " + std::to_string(glyph.height()) + "x" +
                    std::to_string(glyph.width()) + ")");
    std::vector<BinaryRaster> zones;
    zones.reserve(kZoneCount);
    for (int zr = 0; zr < kZoneRows; ++zr) {
        for (int zc = 0; zc < kZoneCols; ++zc) {
            BinaryRaster z(kZoneSize, kZoneSize);
            for (int r = 0; r < kZoneSize; ++r)
                for (int c = 0; c < kZoneSize; ++c)
                    z.set(r, c, glyph(zr * kZoneSize + r, zc * kZoneSize + c));
            zones.push_back(std::move(z));
        }
    }
    return ZoneGrid(std::move(zones));
}

/// Per-line foreground counts. Diagonal lines run top-left to bottom-right and
/// line k holds the pixels with col - row + 9 == k (19 lines); horizontal line
/// k is row k and vertical line k is column k (10 lines each).
inline std::vector<int> zone_sub_features(const BinaryRaster& zone, Orientation orientation)
{
    if (zone.height() != kZoneSize || zone.width() != kZoneSize)
        throw Error("zone not 10x10 (got " + std::to_string(zone.height()) + "x" +
                    std::to_string(zone.width()) + ")");
    const int lines = orientation == Orientation::Diagonal ? kDiagonalLines : kZoneSize;
    std::vector<int> sums(static_cast<std::size_t>(lines), 0);
    for (int r = 0; r < kZoneSize; ++r) {
        for (int c = 0; c < kZoneSize; ++c) {
            if (!zone(r, c)) continue;
            switch (orientation) {
            case Orientation::Diagonal: ++sums[static_cast<std::size_t>(c - r + kZoneSize - 1)]; break;
            case Orientation::Horizontal: ++sums[static_cast<std::size_t>(r)]; break;
            case Orientation::Vertical: ++sums[static_cast<std::size_t>(c)]; break;
            }
        }
    }
    return sums;
}

inline double zone_feature(const BinaryRaster& zone, Orientation orientation,
                           AveragingMode mode = AveragingMode::AllLines)
{
    const auto sums = zone_sub_features(zone, orientation);
    int total = 0, nonempty = 0;
    for (int s : sums) {
        total += s;
        nonempty += s > 0;
    }
    if (mode == AveragingMode::AllLines) return static_cast<double>(total) / static_cast<double>(sums.size());
    return nonempty ? static_cast<double>(total) / nonempty : 0.0;
}

inline FeatureVector extract_features(const BinaryRaster& glyph, const FeatureSpec& spec)
{
    const ZoneGrid grid = zone_partition(glyph);
    FeatureVector fv{spec.orientation, spec.with_aggregates, {}};
    fv.values.reserve(static_cast<std::size_t>(spec.dimension()));
    for (const auto& z : grid.zones()) fv.values.push_back(zone_feature(z, spec.orientation, spec.mode));
    if (!spec.with_aggregates) return fv;

    for (int zr = 0; zr < kZoneRows; ++zr) {
        double s = 0.0;
        for (int zc = 0; zc < kZoneCols; ++zc) s += fv.values[static_cast<std::size_t>(zr * kZoneCols + zc)];
        fv.values.push_back(s / kZoneCols);
    }
    for (int zc = 0; zc < kZoneCols; ++zc) {
        double s = 0.0;
        for (int zr = 0; zr < kZoneRows; ++zr) s += fv.values[static_cast<std::size_t>(zr * kZoneCols + zc)];
        fv.values.push_back(s / kZoneRows);
    }
    return fv;
}

inline FeatureVector extract_features(const GlyphBox& glyph, const FeatureSpec& spec)
{
    return extract_features(glyph.glyph, spec);
}

/// Per-dimension min-max scaling onto [0, 1]. Constant dimensions map to 0.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;

    static MinMaxScaler fit(std::span<const std::vector<double>> rows)
    {
        if (rows.empty()) throw Error("cannot fit scaler on an empty set");
        MinMaxScaler s{rows.front(), rows.front()};
        for (const auto& row : rows) {
            if (row.size() != s.min.size()) throw Error("inconsistent feature dimensions");
            for (std::size_t i = 0; i < row.size(); ++i) {
                s.min[i] = std::min(s.min[i], row[i]);
                s.max[i] = std::max(s.max[i], row[i]);
            }
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> x) const
    {
        if (x.size() != min.size())
            throw Error("scaler expects " + std::to_string(min.size()) + " features, got " +
                        std::to_string(x.size()));
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double range = max[i] - min[i];
            out[i] = range > 0.0 ? (x[i] - min[i]) / range : 0.0;
        }
        return out;
    }
};

/// Debug export: one tab-separated vector per line, preceded by `#` header
/// lines naming the orientation and layout. A label column is prepended when
/// labels are supplied.
inline void write_feature_table(std::ostream& out, const FeatureSpec& spec,
                                std::span<const FeatureVector> vectors,
                                std::span<const std::string> labels = {})
{
    out << "# orientation=" << to_string(spec.orientation) << " mode=" << to_string(spec.mode)
        << " aggregates=" << (spec.with_aggregates ? 1 : 0) << " dim=" << spec.dimension() << '\n';
    out << "# layout: zone[0..53] row-major (index 6*zone_row+zone_col)";
    if (spec.with_aggregates) out << ", row_agg[54..62], col_agg[63..68]";
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        bool first = true;
        if (!labels.empty()) {
            out << labels[i];
            first = false;
        }
        for (double v : vectors[i].values) {
            out << (first ? "" : "\t") << v;
            first = false;
        }
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace zocr
