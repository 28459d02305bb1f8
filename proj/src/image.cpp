#include "spts/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "spts/codec.hpp"

namespace spts::data {

float Image::sample(double x, double y) const {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto tap = [&](int ix, int iy) -> double { return contains(ix, iy) ? at(ix, iy) : 0.0; };
    const double v = (1 - fx) * (1 - fy) * tap(x0, y0) + fx * (1 - fy) * tap(x0 + 1, y0) +
                     (1 - fx) * fy * tap(x0, y0 + 1) + fx * fy * tap(x0 + 1, y0 + 1);
    return static_cast<float>(v);
}

void write_pgm(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float v = std::clamp(img.at(x, y), 0.f, 1.f);
            row[static_cast<size_t>(x)] = static_cast<unsigned char>(std::lround(v * 255.f));
        }
        f.write(reinterpret_cast<const char*>(row.data()), img.width);
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

Image read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
    int w = 0, h = 0, maxval = 0;
    f >> w >> h >> maxval;
    if (!f || w <= 0 || h <= 0) throw std::runtime_error(path + ": malformed PGM header");
    if (maxval != 255) throw std::runtime_error(path + ": unsupported maxval");
    f.get();  // single whitespace after header
    Image img(w, h);
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() != static_cast<std::streamsize>(buf.size()))
        throw std::runtime_error(path + ": truncated PGM data");
    for (size_t i = 0; i < buf.size(); ++i) img.pix[i] = static_cast<float>(buf[i]) / 255.f;
    return img;
}

Image warp_affine(const Image& src, const geom::Affine& out_to_src, int out_w, int out_h) {
    Image out(out_w, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const geom::Point p = out_to_src.apply({static_cast<double>(x), static_cast<double>(y)});
            out.at(x, y) = src.sample(p.x, p.y);
        }
    return out;
}

void draw_line(Image& img, geom::Point a, geom::Point b, float value) {
    const double len = geom::dist(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const int x = static_cast<int>(std::lround(a.x + (b.x - a.x) * t));
        const int y = static_cast<int>(std::lround(a.y + (b.y - a.y) * t));
        if (img.contains(x, y)) img.at(x, y) = value;
    }
}

void draw_cross(Image& img, geom::Point c, int half, float value) {
    const int cx = static_cast<int>(std::lround(c.x));
    const int cy = static_cast<int>(std::lround(c.y));
    for (int d = -half; d <= half; ++d) {
        if (img.contains(cx + d, cy)) img.at(cx + d, cy) = value;
        if (img.contains(cx, cy + d)) img.at(cx, cy + d) = value;
    }
}

void draw_glyph_text(Image& img, const std::string& text, geom::Point topleft, int scale,
                     float value, const GlyphFont& font) {
    int col = 0;
    for (const auto& sym : codec::utf8_split(text)) {
        if (font.has(sym)) {
            const Glyph& g = font.glyph(sym);
            for (int r = 0; r < GlyphFont::kHeight; ++r)
                for (int c = 0; c < GlyphFont::kWidth; ++c) {
                    if (!g.set(r, c)) continue;
                    for (int dy = 0; dy < scale; ++dy)
                        for (int dx = 0; dx < scale; ++dx) {
                            const int x = static_cast<int>(topleft.x) +
                                          (col * GlyphFont::kAdvance + c) * scale + dx;
                            const int y = static_cast<int>(topleft.y) + r * scale + dy;
                            if (img.contains(x, y)) img.at(x, y) = value;
                        }
                }
        }
        ++col;
    }
}

}  // namespace spts::data
