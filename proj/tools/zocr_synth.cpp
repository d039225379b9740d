// Writes machine-rendered letter datasets and text pages as PGM files.

#include <zocr/pgm.hpp>
#include <zocr/synth.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <string>

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"Synthetic A-Z dataset and page generator"};
    app.require_subcommand(1);

    std::string root;
    int copies = 10;
    std::uint64_t seed = 1;
    auto* corpus = app.add_subcommand("corpus", "Write root/<letter>/<letter>_<k>.pgm for every letter");
    corpus->add_option("root", root, "Output dataset directory")->required();
    corpus->add_option("--copies", copies, "Images per letter")->check(CLI::PositiveNumber);
    corpus->add_option("--seed", seed, "Rendering seed");

    std::string text, out_path;
    zocr::synth::TextStyle style;
    auto* page = app.add_subcommand("page", "Render A-Z text ('|' separates lines) to a PGM page");
    page->add_option("text", text, "Letters to render")->required();
    page->add_option("output", out_path, "Output PGM")->required();
    page->add_option("--cell", style.cell_w, "Font cell size in pixels")->check(CLI::Range(1, 64));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (corpus->parsed()) {
            std::mt19937_64 rng(seed);
            for (char ch = 'A'; ch <= 'Z'; ++ch) {
                const fs::path dir = fs::path(root) / std::string(1, ch);
                fs::create_directories(dir);
                for (int k = 0; k < copies; ++k)
                    zocr::write_pgm(dir / (std::string(1, ch) + "_" + std::to_string(k) + ".pgm"),
                                    zocr::synth::render_letter_variant(ch, rng));
            }
            std::cout << "wrote " << 26 * copies << " images under " << root << '\n';
        } else if (page->parsed()) {
            for (auto& ch : text)
                if (ch == '|') ch = '\n';
            style.cell_h = style.cell_w;
            zocr::write_pgm(fs::path(out_path), zocr::synth::render_text(text, style));
            std::cout << "wrote " << out_path << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
