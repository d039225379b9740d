#pragma once

// Command-line front end. Subcommands mirror the recognizer's processing
// steps: preprocess, extract, train, recognize, plus the six-network compare.
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <zocr/error.hpp>
#include <zocr/features.hpp>
#include <zocr/mlp.hpp>
#include <zocr/model.hpp>
#include <zocr/pgm.hpp>
#include <zocr/pipeline.hpp>
#include <zocr/raster.hpp>
#include <zocr/segment.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace zocr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CliConfig {
    std::string input;
    std::string second_input; // test root for compare, image for recognize
    std::string output;
    std::string trace_path;
    std::string orientation = "diagonal";
    bool aggregates = false;
    std::string mode = "all-lines";
    std::optional<int> threshold;
    int min_pixels = kDefaultMinPixels;
    std::uint64_t seed = 1;
    std::vector<int> hidden{100, 100};
    TrainConfig train;
    int verbosity = 0;

    FeatureSpec feature_spec() const
    {
        return {parse_orientation(orientation), aggregates, parse_averaging_mode(mode)};
    }

    RunConfig run_config(const FeatureSpec& spec) const
    {
        RunConfig rc;
        rc.net.hidden = {hidden.at(0), hidden.at(1)};
        rc.net.seed = seed;
        rc.train = train;
        rc.mode = spec.mode;
        return rc;
    }
};

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw Error("failed writing '" + path.string() + "'");
}

inline LoadedDataset load_reporting(const DatasetManifest& m, const std::map<std::string, int>& class_map,
                                    int min_pixels, std::ostream& err)
{
    LoadedDataset ds = load_dataset(m, class_map, min_pixels);
    for (const auto& e : ds.errors) err << "warning: skipped " << e.image.string() << ": " << e.message << '\n';
    for (const auto& w : ds.warnings) err << "warning: " << w << '\n';
    return ds;
}

inline void print_feature_header(std::ostream& out, const CliConfig& c, const FeatureSpec& spec)
{
    out << "orientation=" << to_string(spec.orientation) << " aggregates=" << (spec.with_aggregates ? 1 : 0)
        << " mode=" << to_string(spec.mode) << " input_nodes=" << spec.dimension() << " hidden=" << c.hidden[0]
        << ',' << c.hidden[1] << " seed=" << c.seed << '\n';
}

inline void print_train_header(std::ostream& out, const CliConfig& c)
{
    const auto& t = c.train;
    out << "goal_mse=" << t.goal_mse << " max_epochs=" << t.max_epochs << " lr0=" << t.lr0
        << " momentum=" << t.momentum << " lr_inc=" << t.lr_inc << " lr_dec=" << t.lr_dec
        << " max_perf_inc=" << t.max_perf_inc << " normalize=" << (t.normalize_inputs ? 1 : 0)
        << " soft_targets=" << (t.soft_targets ? 1 : 0) << '\n';
}

inline EpochObserver progress_observer(const CliConfig& c, std::ostream& err)
{
    if (c.verbosity < 1) return {};
    return [&err](const EpochRecord& r) {
        if (r.epoch % 100 == 0)
            err << "epoch " << r.epoch << " mse " << r.mse << " lr " << r.lr << '\n';
    };
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& image)
{
    auto p = image;
    p.replace_extension(".txt");
    return p;
}

} // namespace detail

inline int cmd_preprocess(const CliConfig& c, std::ostream& out, std::ostream&)
{
    const GrayRaster img = read_pgm(std::filesystem::path(c.input));
    write_pgm(std::filesystem::path(c.output), to_gray(preprocess(img, c.threshold)));
    out << "wrote " << c.output << '\n';
    return kExitOk;
}

/// Features of every dataset image (label column first) or of every glyph on
/// a single page image (glyph index column first).
inline int cmd_extract(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    const FeatureSpec spec = c.feature_spec();
    std::vector<FeatureVector> vectors;
    std::vector<std::string> tags;
    const std::filesystem::path in(c.input);
    if (std::filesystem::is_regular_file(in) && in.extension() == ".pgm") {
        const auto glyphs = segment_page(preprocess(read_pgm(in)), c.min_pixels);
        for (std::size_t i = 0; i < glyphs.size(); ++i) {
            vectors.push_back(extract_features(glyphs[i], spec));
            tags.push_back(std::to_string(i));
        }
    } else {
        const DatasetManifest m = open_dataset(in);
        const auto labels = m.labels();
        const LoadedDataset ds = detail::load_reporting(m, m.class_map, c.min_pixels, err);
        for (const auto& g : ds.glyphs) {
            vectors.push_back(extract_features(g.glyph, spec));
            tags.push_back(labels[static_cast<std::size_t>(g.label)]);
        }
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw Error("cannot write '" + c.output + "'");
    write_feature_table(f, spec, vectors, tags);
    out << "wrote " << vectors.size() << " feature vectors of length " << spec.dimension() << " to " << c.output
        << '\n';
    return kExitOk;
}

inline int cmd_train(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    const FeatureSpec spec = c.feature_spec();
    const DatasetManifest m = open_dataset(std::filesystem::path(c.input));
    detail::print_feature_header(out, c, spec);
    detail::print_train_header(out, c);
    const LoadedDataset ds = detail::load_reporting(m, m.class_map, c.min_pixels, err);
    out << "training on " << ds.glyphs.size() << " glyphs, " << m.class_map.size() << " classes\n";

    VariantResult r = train_variant(ds.glyphs, m.labels(), spec, c.run_config(spec), detail::progress_observer(c, err));
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';

    save_model(std::filesystem::path(c.output), r.model);
    const std::string trace = c.trace_path.empty() ? c.output + ".trace.csv" : c.trace_path;
    std::ofstream tf(trace, std::ios::binary);
    if (!tf) throw Error("cannot write '" + trace + "'");
    write_trace_csv(tf, r.trace);

    out << "stop: " << to_string(r.stop) << " after " << r.epochs() << " epochs, final MSE "
        << zocr::detail::format_double(r.final_mse()) << '\n'
        << "wrote model " << c.output << " and trace " << trace << '\n';
    return kExitOk;
}

/// Feature flags given on the command line override the model's settings;
/// a resulting input length that differs from the model's is an error.
inline int cmd_recognize(const CliConfig& c, const CLI::App& sub, std::ostream& out, std::ostream& err)
{
    Model model = load_model(std::filesystem::path(c.input));
    FeatureSpec spec = model.features;
    if (sub.count("--orientation")) spec.orientation = parse_orientation(c.orientation);
    if (sub.count("--aggregates")) spec.with_aggregates = c.aggregates;
    if (sub.count("--mode")) spec.mode = parse_averaging_mode(c.mode);
    model.check_dimension(spec.dimension());
    model.features = spec;

    const std::filesystem::path image(c.second_input);
    const auto glyphs = segment_page(preprocess(read_pgm(image)), c.min_pixels);
    std::string text;
    for (const auto& g : glyphs) text += model.labels[static_cast<std::size_t>(model.classify_glyph(g.glyph))];
    if (glyphs.empty()) err << "warning: no glyphs found in " << image.string() << '\n';

    const std::filesystem::path sidecar = c.output.empty() ? detail::sidecar_path(image) : std::filesystem::path(c.output);
    detail::write_text_file(sidecar, text.empty() ? text : text + '\n');
    if (!text.empty()) out << text << '\n';
    return kExitOk;
}

inline int cmd_compare(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    const FeatureSpec base = c.feature_spec();
    const DatasetManifest train_m = open_dataset(std::filesystem::path(c.input));
    const DatasetManifest test_m = open_dataset(std::filesystem::path(c.second_input));
    const RunConfig rc = c.run_config(base);
    out << "variants=6 mode=" << to_string(base.mode) << " hidden=" << c.hidden[0] << ',' << c.hidden[1]
        << " seed=" << c.seed << '\n';
    detail::print_train_header(out, c);
    const auto labels = train_m.labels();
    const LoadedDataset train_ds = detail::load_reporting(train_m, train_m.class_map, c.min_pixels, err);
    const LoadedDataset test_ds = detail::load_reporting(test_m, train_m.class_map, c.min_pixels, err);

    const auto outcomes = run_comparison(train_ds.glyphs, test_ds.glyphs, labels, rc);

    const std::filesystem::path dir(c.output);
    std::filesystem::create_directories(dir);
    bool failed = false;
    for (const auto& o : outcomes) {
        const std::string name = variant_name(o.spec);
        if (!o.result) {
            err << "error: variant " << name << " failed: " << o.error << '\n';
            failed = true;
            continue;
        }
        std::ofstream rf(dir / ("report_" + name + ".csv"), std::ios::binary);
        write_confusion_csv(rf, o.result->report, labels);
        std::ofstream tf(dir / ("trace_" + name + ".csv"), std::ios::binary);
        write_trace_csv(tf, o.result->trace);
        if (!rf || !tf) throw Error("failed writing reports for " + name);
    }
    std::ostringstream table;
    write_summary_table(table, outcomes, rc, static_cast<int>(labels.size()));
    detail::write_text_file(dir / "summary.txt", table.str());
    out << table.str();
    return failed ? kExitFailure : kExitOk;
}

namespace detail {

inline void add_feature_flags(CLI::App* app, CliConfig& c)
{
    app->add_option("--orientation", c.orientation, "Line family for zone features")
        ->check(CLI::IsMember({"diagonal", "horizontal", "vertical"}));
    app->add_flag("--aggregates", c.aggregates, "Append 9 row + 6 column aggregates (69 features)");
    app->add_option("--mode", c.mode, "Zone averaging: all-lines or non-empty")
        ->check(CLI::IsMember({"all-lines", "non-empty"}));
    app->add_option("--min-pixels", c.min_pixels, "Discard components smaller than this")
        ->check(CLI::Range(1, 1 << 30));
}

inline void add_train_flags(CLI::App* app, CliConfig& c)
{
    app->add_option("--seed", c.seed, "Initialization seed");
    app->add_option("--hidden", c.hidden, "Two hidden layer widths")->expected(2)->check(CLI::PositiveNumber);
    app->add_option("--goal-mse", c.train.goal_mse, "Stop when the training MSE reaches this")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-epochs", c.train.max_epochs, "Epoch cap");
    app->add_option("--lr0", c.train.lr0, "Initial learning rate")->check(CLI::PositiveNumber);
    app->add_option("--momentum", c.train.momentum, "Momentum constant in [0, 1)")->check(CLI::Range(0.0, 1.0));
    app->add_option("--lr-inc", c.train.lr_inc, "Learning-rate growth factor (> 1)");
    app->add_option("--lr-dec", c.train.lr_dec, "Learning-rate shrink factor (< 1)");
    app->add_option("--max-perf-inc", c.train.max_perf_inc, "Largest tolerated error growth ratio");
    app->add_flag("--normalize", c.train.normalize_inputs, "Min-max scale every feature to [0, 1]");
    app->add_flag("--soft-targets", c.train.soft_targets, "Train against 0.05/0.95 instead of 0/1");
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CliConfig c;
    CLI::App app{"Zonal-feature handwritten character recognizer"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("-v,--verbose", c.verbosity, "Print training progress");

    auto* pre = app.add_subcommand("preprocess", "Binarize, edge-detect, dilate and hole-fill a PGM image");
    pre->add_option("input", c.input, "Input PGM")->required();
    pre->add_option("output", c.output, "Output PGM (ink 0, paper 255)")->required();
    pre->add_option("--threshold", c.threshold, "Fixed global threshold instead of Otsu")->check(CLI::Range(0, 256));

    auto* ext = app.add_subcommand("extract", "Write feature vectors as tab-separated text");
    ext->add_option("input", c.input, "Dataset directory, manifest file, or a page PGM")->required();
    ext->add_option("output", c.output, "Output text file")->required();
    detail::add_feature_flags(ext, c);

    auto* trn = app.add_subcommand("train", "Train a network on a labeled dataset");
    trn->add_option("train_root", c.input, "Dataset directory or manifest")->required();
    trn->add_option("model", c.output, "Model file to write")->required();
    trn->add_option("--trace", c.trace_path, "MSE trace CSV (default <model>.trace.csv)");
    detail::add_feature_flags(trn, c);
    detail::add_train_flags(trn, c);

    auto* rec = app.add_subcommand("recognize", "Recognize the characters on a page image");
    rec->add_option("model", c.input, "Model file")->required();
    rec->add_option("image", c.second_input, "Page PGM")->required();
    rec->add_option("--out", c.output, "Text output (default: image path with .txt)");
    detail::add_feature_flags(rec, c);

    auto* cmp = app.add_subcommand("compare", "Train and test all six orientation x length networks");
    cmp->add_option("train_root", c.input, "Training dataset")->required();
    cmp->add_option("test_root", c.second_input, "Test dataset")->required();
    cmp->add_option("out_dir", c.output, "Directory for reports, traces and summary")->required();
    cmp->add_option("--mode", c.mode, "Zone averaging: all-lines or non-empty")
        ->check(CLI::IsMember({"all-lines", "non-empty"}));
    cmp->add_option("--min-pixels", c.min_pixels, "Discard components smaller than this")
        ->check(CLI::Range(1, 1 << 30));
    detail::add_train_flags(cmp, c);

    try {
        app.parse(argc, argv);
        c.train.validate();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const Error& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    try {
        if (pre->parsed()) return cmd_preprocess(c, out, err);
        if (ext->parsed()) return cmd_extract(c, out, err);
        if (trn->parsed()) return cmd_train(c, out, err);
        if (rec->parsed()) return cmd_recognize(c, *rec, out, err);
        if (cmp->parsed()) return cmd_compare(c, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace zocr::cli
