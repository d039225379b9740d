#pragma once

// A trained recognizer (feature extractor settings, optional input scaling,
// network parameters, class labels) and its versioned text file format:
//
//   ZOCR-MLP v1
//   <orientation> <mode> <aggregates 0|1> none | minmax <d mins> <d maxs>
//   <d> <h1> <h2> <n>
//   W1 rows, b1, W2 rows, b2, W3 rows, b3   (one line each, %.17g)
//   labels <n tokens>

#include <zocr/error.hpp>
#include <zocr/features.hpp>
#include <zocr/mlp.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace zocr {

inline constexpr const char* kModelMagic = "ZOCR-MLP v1";

struct Model {
    FeatureSpec features;
    std::optional<MinMaxScaler> scaler;
    NetworkParams params;
    std::vector<std::string> labels;

    /// Network input for one glyph: extracted features, scaled if configured.
    std::vector<double> network_input(const BinaryRaster& glyph) const
    {
        auto fv = extract_features(glyph, features);
        check_dimension(static_cast<int>(fv.values.size()));
        return scaler ? scaler->apply(fv.values) : std::move(fv.values);
    }

    void check_dimension(int feature_dim) const
    {
        if (feature_dim != params.input_dim())
            throw Error("feature dimension mismatch: model expects " + std::to_string(params.input_dim()) +
                        " inputs, extractor produces " + std::to_string(feature_dim));
    }

    int classify_glyph(const BinaryRaster& glyph) const { return classify(params, network_input(glyph)); }
};

namespace detail {

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) throw Error("bad number '" + tok + "' in model file");
    return v;
}

inline void write_row(std::ostream& out, const double* data, Eigen::Index n)
{
    for (Eigen::Index i = 0; i < n; ++i) out << (i ? " " : "") << format_double(data[i]);
    out << '\n';
}

inline std::vector<double> read_row(std::istream& in, Eigen::Index expected, const char* what)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(std::string("model file truncated while reading ") + what);
    std::istringstream ls(line);
    std::vector<double> out;
    std::string tok;
    while (ls >> tok) out.push_back(parse_double(tok));
    if (static_cast<Eigen::Index>(out.size()) != expected)
        throw Error(std::string("model file: ") + what + " has " + std::to_string(out.size()) +
                    " values, expected " + std::to_string(expected));
    return out;
}

} // namespace detail

inline void save_model(std::ostream& out, const Model& m)
{
    const auto& dims = m.params.dims();
    if (static_cast<int>(m.labels.size()) != dims[3])
        throw Error("model has " + std::to_string(m.labels.size()) + " labels for " + std::to_string(dims[3]) +
                    " outputs");
    out << kModelMagic << '\n';
    out << to_string(m.features.orientation) << ' ' << to_string(m.features.mode) << ' '
        << (m.features.with_aggregates ? 1 : 0);
    if (m.scaler) {
        out << " minmax";
        for (double v : m.scaler->min) out << ' ' << detail::format_double(v);
        for (double v : m.scaler->max) out << ' ' << detail::format_double(v);
    } else {
        out << " none";
    }
    out << '\n' << dims[0] << ' ' << dims[1] << ' ' << dims[2] << ' ' << dims[3] << '\n';
    for (int layer = 0; layer < 3; ++layer) {
        const auto w = m.params.weight(layer);
        for (Eigen::Index r = 0; r < w.rows(); ++r) detail::write_row(out, w.row(r).data(), w.cols());
        const auto b = m.params.bias(layer);
        detail::write_row(out, b.data(), b.size());
    }
    out << "labels";
    for (const auto& l : m.labels) out << ' ' << l;
    out << '\n';
}

inline Model load_model(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kModelMagic)
        throw Error("not a model file (expected first line '" + std::string(kModelMagic) + "')");

    Model m;
    if (!std::getline(in, line)) throw Error("model file truncated in header");
    std::istringstream hs(line);
    std::string orient, mode, scaling;
    int aggregates = -1;
    if (!(hs >> orient >> mode >> aggregates >> scaling) || (aggregates != 0 && aggregates != 1))
        throw Error("malformed model header line: '" + line + "'");
    m.features = {parse_orientation(orient), aggregates == 1, parse_averaging_mode(mode)};

    std::array<int, 4> dims{};
    if (!std::getline(in, line)) throw Error("model file truncated in dimensions");
    std::istringstream ds(line);
    if (!(ds >> dims[0] >> dims[1] >> dims[2] >> dims[3])) throw Error("malformed dimension line: '" + line + "'");
    if (dims[0] != m.features.dimension())
        throw Error("model input dimension " + std::to_string(dims[0]) + " disagrees with its feature settings (" +
                    std::to_string(m.features.dimension()) + ")");
    m.params = NetworkParams(dims);

    if (scaling == "minmax") {
        std::vector<std::string> toks;
        std::string tok;
        while (hs >> tok) toks.push_back(tok);
        if (toks.size() != 2 * static_cast<std::size_t>(dims[0]))
            throw Error("model scaling constants: expected " + std::to_string(2 * dims[0]) + " values");
        MinMaxScaler s;
        for (std::size_t i = 0; i < toks.size(); ++i)
            (i < toks.size() / 2 ? s.min : s.max).push_back(detail::parse_double(toks[i]));
        m.scaler = std::move(s);
    } else if (scaling != "none") {
        throw Error("unknown input scaling '" + scaling + "' in model file");
    }

    for (int layer = 0; layer < 3; ++layer) {
        auto w = m.params.weight(layer);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            auto row = detail::read_row(in, w.cols(), "weight row");
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)];
        }
        auto b = m.params.bias(layer);
        auto row = detail::read_row(in, b.size(), "bias");
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = row[static_cast<std::size_t>(i)];
    }
    if (!m.params.all_finite()) throw Error("model file holds non-finite parameters");

    if (!std::getline(in, line)) throw Error("model file truncated before labels");
    std::istringstream ls(line);
    std::string tag, label;
    if (!(ls >> tag) || tag != "labels") throw Error("model file: expected labels line");
    while (ls >> label) m.labels.push_back(label);
    if (static_cast<int>(m.labels.size()) != dims[3])
        throw Error("model file lists " + std::to_string(m.labels.size()) + " labels for " +
                    std::to_string(dims[3]) + " outputs");
    return m;
}

inline void save_model(const std::filesystem::path& path, const Model& m)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model '" + path.string() + "'");
    save_model(out, m);
    if (!out) throw Error("failed writing model '" + path.string() + "'");
}

inline Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model '" + path.string() + "'");
    return load_model(in);
}

} // namespace zocr
