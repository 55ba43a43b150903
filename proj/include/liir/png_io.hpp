#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "liir/image.hpp"

namespace liir {

// Indexed-color payload: per-pixel palette indices plus the palette itself.
struct IndexedImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> indices;                 // H*W
    std::vector<std::array<std::uint8_t, 3>> palette;  // <= 256 entries
};

// 8-bit RGB PNG. Values are clamped to [0,1] and quantized with round().
void write_png_rgb(const std::string& path, const Frame& frame);

// 8-bit palette PNG; every index must reference a palette entry.
void write_png_indexed(const std::string& path, const IndexedImage& img);

// Decodes any 8/16-bit gray/RGB/RGBA/palette PNG to an RGB frame in [0,1].
Frame read_png_rgb(const std::string& path);

// Decodes a PNG as label data. Palette PNGs map pixels to their palette
// index directly (DAVIS convention). Non-palette PNGs map distinct colors to
// ids by sorted (r,g,b) order with pure black pinned to id 0; the synthesized
// palette is returned alongside. Throws FormatError on palette collisions.
IndexedImage read_png_indexed(const std::string& path);

}  // namespace liir
