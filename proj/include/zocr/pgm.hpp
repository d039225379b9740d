#pragma once

// PGM (P2 ASCII / P5 binary) reader and writer.

#include <zocr/error.hpp>
#include <zocr/raster.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace zocr {

namespace detail {

inline void skip_pgm_space(std::istream& in)
{
    for (;;) {
        int ch = in.peek();
        if (ch == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (ch != EOF && std::isspace(ch)) {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_pgm_int(std::istream& in, const char* what)
{
    skip_pgm_space(in);
    int value = -1;
    if (!(in >> value)) throw Error(std::string("malformed PGM header: cannot read ") + what);
    return value;
}

inline std::string printable_magic(const std::string& magic)
{
    std::ostringstream os;
    for (unsigned char ch : magic) {
        if (std::isprint(ch))
            os << ch;
        else
            os << "\\x" << std::hex << static_cast<int>(ch) << std::dec;
    }
    return os.str();
}

} // namespace detail

/// Parses a P2 or P5 stream. Samples are rescaled to [0, 255] when maxval < 255.
inline GrayRaster read_pgm(std::istream& in)
{
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    magic.resize(static_cast<std::size_t>(in.gcount()));
    if (magic != "P2" && magic != "P5")
        throw Error("unsupported image format: expected PGM magic P2 or P5, found '" +
                    detail::printable_magic(magic) + "'");

    const int width = detail::read_pgm_int(in, "width");
    const int height = detail::read_pgm_int(in, "height");
    const int maxval = detail::read_pgm_int(in, "maxval");
    if (width < 1 || height < 1) throw Error("malformed PGM header: non-positive dimensions");
    if (maxval < 1 || maxval > 255)
        throw Error("unsupported PGM maxval " + std::to_string(maxval) + " (must be 1..255)");

    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<std::uint8_t> pixels(n);
    if (magic == "P5") {
        // exactly one whitespace byte separates the header from the raster
        in.get();
        in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) throw Error("truncated PGM raster");
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            int v = -1;
            if (!(in >> v)) throw Error("truncated PGM raster");
            if (v < 0 || v > maxval) throw Error("PGM sample exceeds maxval");
            pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    for (auto& v : pixels) {
        if (v > maxval) throw Error("PGM sample exceeds maxval");
        if (maxval != 255) v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    }
    return GrayRaster(width, height, std::move(pixels));
}

inline GrayRaster read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open image '" + path.string() + "'");
    try {
        return read_pgm(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

inline void write_pgm(std::ostream& out, const GrayRaster& img, bool binary = true)
{
    out << (binary ? "P5" : "P2") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    if (binary) {
        out.write(reinterpret_cast<const char*>(img.pixels().data()),
                  static_cast<std::streamsize>(img.pixels().size()));
    } else {
        for (int r = 0; r < img.height(); ++r) {
            for (int c = 0; c < img.width(); ++c) out << (c ? " " : "") << int(img(r, c));
            out << '\n';
        }
    }
}

inline void write_pgm(const std::filesystem::path& path, const GrayRaster& img, bool binary = true)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write image '" + path.string() + "'");
    write_pgm(out, img, binary);
    if (!out) throw Error("failed writing image '" + path.string() + "'");
}

/// Foreground becomes black (0), background white (255).
inline GrayRaster to_gray(const BinaryRaster& img)
{
    std::vector<std::uint8_t> px(img.pixels().size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = img.pixels()[i] ? 0 : 255;
    return GrayRaster(img.width(), img.height(), std::move(px));
}

} // namespace zocr
