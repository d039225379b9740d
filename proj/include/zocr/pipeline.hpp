#pragma once

// Dataset ingestion, train/evaluate orchestration, the six-network
// orientation x feature-length comparison, and report writers.

#include <zocr/error.hpp>
#include <zocr/features.hpp>
#include <zocr/mlp.hpp>
#include <zocr/model.hpp>
#include <zocr/pgm.hpp>
#include <zocr/raster.hpp>
#include <zocr/segment.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace zocr {

namespace fs = std::filesystem;

struct ManifestEntry {
    fs::path image;
    std::string label;
};

/// Images with their class labels; `class_map` sends each distinct label to
/// its index in lexicographic order.
struct DatasetManifest {
    fs::path root;
    std::vector<ManifestEntry> entries;
    std::map<std::string, int> class_map;

    std::vector<std::string> labels() const
    {
        std::vector<std::string> out(class_map.size());
        for (const auto& [label, idx] : class_map) out[static_cast<std::size_t>(idx)] = label;
        return out;
    }
};

namespace detail {

inline void check_label(const std::string& label)
{
    if (label.empty()) throw Error("empty class label");
    for (unsigned char ch : label)
        if (std::isspace(ch)) throw Error("class label '" + label + "' contains whitespace");
}

inline void build_class_map(DatasetManifest& m)
{
    m.class_map.clear();
    for (const auto& e : m.entries) m.class_map.emplace(e.label, 0);
    int i = 0;
    for (auto& [label, idx] : m.class_map) idx = i++;
    if (m.class_map.size() < 2)
        throw Error("dataset '" + m.root.string() + "' needs at least 2 classes, found " +
                    std::to_string(m.class_map.size()));
}

} // namespace detail

/// `root/<label>/<image>.pgm`, labels and files visited in sorted order.
inline DatasetManifest scan_dataset(const fs::path& root)
{
    if (!fs::is_directory(root)) throw Error("dataset root '" + root.string() + "' is not a directory");
    DatasetManifest m{root, {}, {}};
    std::vector<fs::path> dirs;
    for (const auto& d : fs::directory_iterator(root))
        if (d.is_directory()) dirs.push_back(d.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        const std::string label = dir.filename().string();
        detail::check_label(label);
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(dir))
            if (f.is_regular_file() && f.path().extension() == ".pgm") files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files) m.entries.push_back({std::move(f), label});
    }
    detail::build_class_map(m);
    return m;
}

/// One `path<TAB>label` per line; relative paths resolve against the
/// manifest's directory. Blank lines and `#` comments are skipped.
inline DatasetManifest read_manifest(const fs::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw Error("cannot open manifest '" + manifest_path.string() + "'");
    DatasetManifest m{manifest_path.parent_path(), {}, {}};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw Error(manifest_path.string() + ":" + std::to_string(line_no) + ": expected 'path<TAB>label'");
        fs::path p = line.substr(0, tab);
        std::string label = line.substr(tab + 1);
        detail::check_label(label);
        if (p.is_relative()) p = m.root / p;
        m.entries.push_back({std::move(p), std::move(label)});
    }
    detail::build_class_map(m);
    return m;
}

/// A directory is scanned; a regular file is read as a manifest.
inline DatasetManifest open_dataset(const fs::path& path)
{
    return fs::is_directory(path) ? scan_dataset(path) : read_manifest(path);
}

struct LabeledGlyph {
    BinaryRaster glyph;
    int label = 0;
    std::string source;
};

struct EntryError {
    fs::path image;
    std::string message;
};

struct LoadedDataset {
    std::vector<LabeledGlyph> glyphs;
    std::vector<EntryError> errors;
    std::vector<std::string> warnings;
};

/// Fraction of entries that may fail before loading is abandoned.
inline constexpr double kMaxLoadFailureRate = 0.10;

/// The single glyph of a character image: the largest component above the
/// noise threshold (warning when there are several).
inline GlyphBox single_glyph(const BinaryRaster& page, int min_pixels, std::vector<std::string>* warnings = nullptr,
                             const std::string& source = {})
{
    std::vector<Component> comps;
    for (auto& c : label_components(page))
        if (c.pixels.size() >= static_cast<std::size_t>(min_pixels)) comps.push_back(std::move(c));
    if (comps.empty()) throw Error("no components");
    auto largest = std::max_element(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        return a.pixels.size() < b.pixels.size();
    });
    if (comps.size() > 1 && warnings)
        warnings->push_back(source + ": " + std::to_string(comps.size()) +
                            " components, keeping the largest (" + std::to_string(largest->pixels.size()) +
                            " pixels)");
    GlyphBox g = normalize_glyph(*largest);
    if (g.glyph.count() == 0) throw Error("glyph vanished when resampled to 90x60");
    return g;
}

/// Reads, preprocesses and segments every entry in manifest order. Labels
/// are indexed through `class_map` (the training map when loading a test
/// set). Per-entry failures are collected; more than 10% aborts.
inline LoadedDataset load_dataset(const DatasetManifest& manifest, const std::map<std::string, int>& class_map,
                                  int min_pixels = kDefaultMinPixels)
{
    LoadedDataset out;
    for (const auto& e : manifest.entries) {
        try {
            auto it = class_map.find(e.label);
            if (it == class_map.end()) throw Error("label '" + e.label + "' is not a known class");
            const BinaryRaster page = preprocess(read_pgm(e.image));
            GlyphBox g = single_glyph(page, min_pixels, &out.warnings, e.image.string());
            out.glyphs.push_back({std::move(g.glyph), it->second, e.image.string()});
        } catch (const Error& err) {
            out.errors.push_back({e.image, err.what()});
        }
    }
    const auto total = manifest.entries.size();
    if (total == 0) throw Error("dataset '" + manifest.root.string() + "' has no images");
    if (static_cast<double>(out.errors.size()) > kMaxLoadFailureRate * static_cast<double>(total)) {
        std::string msg = std::to_string(out.errors.size()) + " of " + std::to_string(total) +
                          " dataset entries failed (limit 10%); first: " + out.errors.front().image.string() + ": " +
                          out.errors.front().message;
        throw Error(msg);
    }
    return out;
}

inline LoadedDataset load_dataset(const DatasetManifest& manifest, int min_pixels = kDefaultMinPixels)
{
    return load_dataset(manifest, manifest.class_map, min_pixels);
}

inline std::vector<std::vector<double>> extract_all(std::span<const LabeledGlyph> glyphs, const FeatureSpec& spec)
{
    std::vector<std::vector<double>> rows;
    rows.reserve(glyphs.size());
    for (const auto& g : glyphs) rows.push_back(extract_features(g.glyph, spec).values);
    return rows;
}

inline std::vector<int> labels_of(std::span<const LabeledGlyph> glyphs)
{
    std::vector<int> out;
    out.reserve(glyphs.size());
    for (const auto& g : glyphs) out.push_back(g.label);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

/// confusion[true][predicted].
struct EvalReport {
    int classes = 0;
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<double> precision;
    std::vector<double> recall;
    double recognition_rate = 0.0; // percent
    std::size_t samples = 0;

    std::size_t correct() const
    {
        std::size_t t = 0;
        for (int i = 0; i < classes; ++i) t += confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        return t;
    }
};

inline EvalReport make_report(std::span<const int> truth, std::span<const int> predicted, int classes)
{
    if (truth.empty()) throw Error("empty evaluation set");
    if (truth.size() != predicted.size()) throw Error("truth and prediction counts differ");
    EvalReport r;
    r.classes = classes;
    r.samples = truth.size();
    r.confusion.assign(static_cast<std::size_t>(classes), std::vector<std::size_t>(static_cast<std::size_t>(classes), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes)
            throw Error("class index out of range in evaluation");
        ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    }
    r.precision.assign(static_cast<std::size_t>(classes), 0.0);
    r.recall.assign(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t c = 0; c < static_cast<std::size_t>(classes); ++c) {
        std::size_t row = 0, col = 0;
        for (std::size_t k = 0; k < static_cast<std::size_t>(classes); ++k) {
            row += r.confusion[c][k];
            col += r.confusion[k][c];
        }
        const double tp = static_cast<double>(r.confusion[c][c]);
        r.recall[c] = row ? tp / static_cast<double>(row) : 0.0;
        r.precision[c] = col ? tp / static_cast<double>(col) : 0.0;
    }
    r.recognition_rate = 100.0 * static_cast<double>(r.correct()) / static_cast<double>(r.samples);
    return r;
}

/// Classifies already-prepared network inputs.
inline EvalReport evaluate(const NetworkParams& params, std::span<const std::vector<double>> inputs,
                           std::span<const int> truth)
{
    if (inputs.empty()) throw Error("empty evaluation set");
    std::vector<int> predicted;
    predicted.reserve(inputs.size());
    for (const auto& x : inputs) predicted.push_back(classify(params, x));
    return make_report(truth, predicted, params.output_dim());
}

inline EvalReport evaluate(const Model& model, std::span<const LabeledGlyph> glyphs)
{
    if (glyphs.empty()) throw Error("empty evaluation set");
    std::vector<int> predicted;
    predicted.reserve(glyphs.size());
    for (const auto& g : glyphs) predicted.push_back(model.classify_glyph(g.glyph));
    return make_report(labels_of(glyphs), predicted, model.params.output_dim());
}

// ---------------------------------------------------------------------------
// Training runs

struct RunConfig {
    NetworkConfig net;   // input/output dims are filled in per run
    TrainConfig train;
    AveragingMode mode = AveragingMode::AllLines;
};

struct VariantResult {
    Model model;
    EvalReport report;
    std::vector<EpochRecord> trace;
    double initial_mse = 0.0;
    StopReason stop = StopReason::MaxEpochs;
    std::vector<std::string> warnings;

    std::size_t epochs() const { return trace.size(); }
    double final_mse() const { return trace.empty() ? initial_mse : trace.back().mse; }
};

/// Extracts features per `spec`, trains a fresh network and returns the
/// model with its training trace. Samples are expected to be non-empty.
inline VariantResult train_variant(std::span<const LabeledGlyph> train_set, std::vector<std::string> labels,
                                   const FeatureSpec& spec, const RunConfig& cfg, const EpochObserver& observer = {})
{
    if (train_set.empty()) throw Error("empty training set");
    VariantResult out;
    const int classes = static_cast<int>(labels.size());
    std::vector<std::size_t> per_class(labels.size(), 0);
    for (const auto& g : train_set) ++per_class.at(static_cast<std::size_t>(g.label));
    for (std::size_t c = 0; c < per_class.size(); ++c)
        if (per_class[c] == 0) out.warnings.push_back("class '" + labels[c] + "' has no training samples");

    auto rows = extract_all(train_set, spec);
    std::optional<MinMaxScaler> scaler;
    if (cfg.train.normalize_inputs) {
        scaler = MinMaxScaler::fit(rows);
        for (auto& r : rows) r = scaler->apply(r);
    }
    const auto truth = labels_of(train_set);
    const Batch batch = make_batch(rows, truth, classes, cfg.train.targets());

    NetworkConfig net = cfg.net;
    net.input_dim = spec.dimension();
    net.output_dim = classes;
    TrainResult tr = train(net, cfg.train, batch, observer);

    out.model = Model{spec, std::move(scaler), std::move(tr.params), std::move(labels)};
    out.trace = std::move(tr.state.history);
    out.initial_mse = tr.state.initial_mse;
    out.stop = tr.stop;
    return out;
}

/// Train on `train_set`, then evaluate on `test_set`.
inline VariantResult run_variant(std::span<const LabeledGlyph> train_set, std::span<const LabeledGlyph> test_set,
                                 std::vector<std::string> labels, const FeatureSpec& spec, const RunConfig& cfg,
                                 const EpochObserver& observer = {})
{
    if (test_set.empty()) throw Error("empty test set");
    VariantResult out = train_variant(train_set, std::move(labels), spec, cfg, observer);
    out.report = evaluate(out.model, test_set);
    return out;
}

/// The six networks in summary order: 54 features (vertical, horizontal,
/// diagonal) followed by 69 features in the same orientation order.
inline std::vector<FeatureSpec> comparison_variants(AveragingMode mode = AveragingMode::AllLines)
{
    std::vector<FeatureSpec> out;
    for (bool agg : {false, true})
        for (auto o : {Orientation::Vertical, Orientation::Horizontal, Orientation::Diagonal})
            out.push_back({o, agg, mode});
    return out;
}

inline std::string variant_name(const FeatureSpec& spec)
{
    return std::string(to_string(spec.orientation)) + "-" + std::to_string(spec.dimension());
}

struct VariantOutcome {
    FeatureSpec spec;
    std::optional<VariantResult> result;
    std::string error;
};

/// Every variant trains from the same seed and hyperparameters. A failing
/// variant records its error and the rest still run.
inline std::vector<VariantOutcome> run_comparison(std::span<const LabeledGlyph> train_set,
                                                  std::span<const LabeledGlyph> test_set,
                                                  const std::vector<std::string>& labels, const RunConfig& cfg)
{
    std::vector<VariantOutcome> out;
    for (const auto& spec : comparison_variants(cfg.mode)) {
        VariantOutcome o{spec, std::nullopt, {}};
        try {
            o.result = run_variant(train_set, test_set, labels, spec, cfg);
        } catch (const Error& e) {
            o.error = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report writers

inline void write_trace_csv(std::ostream& out, std::span<const EpochRecord> trace)
{
    out << "epoch,mse,lr,accepted\n";
    for (const auto& r : trace)
        out << r.epoch << ',' << detail::format_double(r.mse) << ',' << detail::format_double(r.lr) << ','
            << (r.accepted ? 1 : 0) << '\n';
}

/// Header row of predicted labels; each following row starts with the true
/// label.
inline void write_confusion_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> labels)
{
    out << "true\\predicted";
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < report.confusion.size(); ++i) {
        out << labels[i];
        for (auto v : report.confusion[i]) out << ',' << v;
        out << '\n';
    }
}

namespace detail {
inline std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}
inline std::string capitalized(std::string_view s)
{
    std::string out(s);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}
} // namespace detail

/// Tab-separated table with one column per network.
inline void write_summary_table(std::ostream& out, std::span<const VariantOutcome> outcomes, const RunConfig& cfg,
                                int classes)
{
    auto row = [&](const std::string& name, auto&& cell) {
        out << name;
        for (std::size_t i = 0; i < outcomes.size(); ++i) out << '\t' << cell(outcomes[i]);
        out << '\n';
    };
    auto ok_or = [](const VariantOutcome& o, auto&& f) -> std::string { return o.result ? f(*o.result) : "failed"; };

    std::size_t idx = 0;
    row("Networks", [&](const VariantOutcome&) { return std::to_string(++idx); });
    row("Feature Extraction type",
        [](const VariantOutcome& o) { return detail::capitalized(to_string(o.spec.orientation)); });
    row("Number of nodes in input layer", [](const VariantOutcome& o) { return std::to_string(o.spec.dimension()); });
    row("Number of nodes in 1st hidden layer", [&](const VariantOutcome&) { return std::to_string(cfg.net.hidden[0]); });
    row("Number of nodes in 2nd hidden layer", [&](const VariantOutcome&) { return std::to_string(cfg.net.hidden[1]); });
    row("Number of nodes in output layer", [&](const VariantOutcome&) { return std::to_string(classes); });
    row("Training epochs",
        [&](const VariantOutcome& o) { return ok_or(o, [](const VariantResult& r) { return std::to_string(r.epochs()); }); });
    row("Final MSE", [&](const VariantOutcome& o) {
        return ok_or(o, [](const VariantResult& r) { return detail::format_double(r.final_mse()); });
    });
    row("Recognition rate percentage", [&](const VariantOutcome& o) {
        return ok_or(o, [](const VariantResult& r) { return detail::fixed(r.report.recognition_rate, 2); });
    });
}

} // namespace zocr
