#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liir/errors.hpp"

namespace liir {

// Portable float grid: a text header line "liir-f64 <rows> <cols> <channels>"
// followed by rows*cols*channels little-endian doubles, row-major with
// channels interleaved. Used for affinity/heatmap debug dumps and for
// ground-truth flow files (channels = 2).
struct FloatGrid {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::int64_t channels = 1;
    std::vector<double> values;
};

void write_float_grid(const std::string& path, const FloatGrid& grid);
FloatGrid read_float_grid(const std::string& path);

// Raw flow files (<seq>/flow/%05d.f64): no header, H*W*2 little-endian
// doubles, row-major, (dx, dy) interleaved per pixel.
void write_flow_f64(const std::string& path, int height, int width,
                    const std::vector<double>& flow);
std::vector<double> read_flow_f64(const std::string& path, int height, int width);

}  // namespace liir
