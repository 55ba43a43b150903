#pragma once

#include <cstdint>
#include <vector>

#include "liir/errors.hpp"

namespace liir {

enum class ColorSpace { RGB, Lab };

// H x W x 3 grid of doubles in [0,1], row-major, channel-interleaved.
struct Frame {
    int height = 0;
    int width = 0;
    ColorSpace space = ColorSpace::RGB;
    std::vector<double> data;

    Frame() = default;
    Frame(int h, int w, ColorSpace cs = ColorSpace::RGB)
        : height(h), width(w), space(cs),
          data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * 3, 0.0) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)];
    }
    std::size_t pixels() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
};

// Integer label image (class ids), H x W.
struct LabelImage {
    int height = 0;
    int width = 0;
    std::vector<int> ids;

    LabelImage() = default;
    LabelImage(int h, int w)
        : height(h), width(w),
          ids(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0) {}

    int& at(int y, int x) {
        return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)];
    }
    int at(int y, int x) const {
        return ids[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)];
    }
};

// Block-average downsample by an integer factor (area interpolation).
Frame downsample_area(const Frame& f, int factor);

// sRGB <-> CIELAB (D65 white point), both sides rescaled to [0,1] per channel
// for network input: L/100, (a+128)/255, (b+128)/255. Inputs are clamped.
Frame rgb_to_lab(const Frame& rgb);
Frame lab_to_rgb(const Frame& lab);

}  // namespace liir
