#pragma once

#include <string>
#include <vector>

#include "spts/font5x7.hpp"
#include "spts/geometry.hpp"

namespace spts::data {

// Grayscale image, row-major, values in [0, 1]. Pixel (x, y) sits at
// continuous coordinates (x, y).
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> pix;

    Image() = default;
    Image(int w, int h, float fill = 0.f)
        : width(w), height(h), pix(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    float at(int x, int y) const { return pix[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return pix[static_cast<size_t>(y) * width + x]; }
    bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    // Bilinear sample; taps outside the image contribute 0.
    float sample(double x, double y) const;
};

// 8-bit binary PGM (P5).
void write_pgm(const Image& img, const std::string& path);
Image read_pgm(const std::string& path);

// out(x, y) = src(inv(x, y)) with bilinear sampling, 0 fill.
Image warp_affine(const Image& src, const geom::Affine& out_to_src, int out_w, int out_h);

// Drawing helpers (used by the scene generator and overlay rendering).
void draw_line(Image& img, geom::Point a, geom::Point b, float value);
void draw_cross(Image& img, geom::Point c, int half, float value);
void draw_glyph_text(Image& img, const std::string& text, geom::Point topleft, int scale,
                     float value, const GlyphFont& font);

}  // namespace spts::data
