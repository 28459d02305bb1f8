#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace spts::data {

// One 5x7 bitmap; bit (4 - col) of rows[row] marks an inked cell.
struct Glyph {
    std::array<uint8_t, 7> rows{};
    bool set(int row, int col) const { return (rows[static_cast<size_t>(row)] >> (4 - col)) & 1u; }
};

// Per-character bitmaps for a configured alphabet, drawn from the built-in
// A-Z / 0-9 table.
class GlyphFont {
public:
    static constexpr int kWidth = 5;
    static constexpr int kHeight = 7;
    static constexpr int kAdvance = 6;  // glyph width plus one blank column

    explicit GlyphFont(const std::vector<std::string>& alphabet);

    bool has(const std::string& symbol) const { return glyphs_.count(symbol) > 0; }
    const Glyph& glyph(const std::string& symbol) const;

    // Full built-in table (26 letters + 10 digits).
    static const GlyphFont& builtin();

private:
    GlyphFont() = default;
    std::unordered_map<std::string, Glyph> glyphs_;
};

}  // namespace spts::data
