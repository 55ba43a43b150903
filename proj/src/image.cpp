#include "liir/image.hpp"

#include <algorithm>
#include <cmath>

namespace liir {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double srgb_to_linear(double c) {
    c = clamp01(c);
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
    c = std::max(0.0, c);
    const double s = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
    return clamp01(s);
}

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                        : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

Frame downsample_area(const Frame& f, int factor) {
    if (factor <= 0 || f.height % factor != 0 || f.width % factor != 0) {
        throw ShapeError("downsample_area: size not divisible by factor");
    }
    Frame out(f.height / factor, f.width / factor, f.space);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        s += f.at(y * factor + dy, x * factor + dx, c);
                out.at(y, x, c) = s * inv;
            }
        }
    }
    return out;
}

Frame rgb_to_lab(const Frame& rgb) {
    Frame out(rgb.height, rgb.width, ColorSpace::Lab);
    for (std::size_t p = 0; p < rgb.pixels(); ++p) {
        const double r = srgb_to_linear(rgb.data[p * 3 + 0]);
        const double g = srgb_to_linear(rgb.data[p * 3 + 1]);
        const double b = srgb_to_linear(rgb.data[p * 3 + 2]);
        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        const double fx = lab_f(x / kXn);
        const double fy = lab_f(y / kYn);
        const double fz = lab_f(z / kZn);
        const double L = 116.0 * fy - 16.0;
        const double a = 500.0 * (fx - fy);
        const double bb = 200.0 * (fy - fz);
        out.data[p * 3 + 0] = clamp01(L / 100.0);
        out.data[p * 3 + 1] = clamp01((a + 128.0) / 255.0);
        out.data[p * 3 + 2] = clamp01((bb + 128.0) / 255.0);
    }
    return out;
}

Frame lab_to_rgb(const Frame& lab) {
    Frame out(lab.height, lab.width, ColorSpace::RGB);
    for (std::size_t p = 0; p < lab.pixels(); ++p) {
        const double L = clamp01(lab.data[p * 3 + 0]) * 100.0;
        const double a = clamp01(lab.data[p * 3 + 1]) * 255.0 - 128.0;
        const double b = clamp01(lab.data[p * 3 + 2]) * 255.0 - 128.0;
        const double fy = (L + 16.0) / 116.0;
        const double fx = fy + a / 500.0;
        const double fz = fy - b / 200.0;
        const double x = kXn * lab_f_inv(fx);
        const double y = kYn * lab_f_inv(fy);
        const double z = kZn * lab_f_inv(fz);
        const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
        const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
        const double bl = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
        out.data[p * 3 + 0] = linear_to_srgb(r);
        out.data[p * 3 + 1] = linear_to_srgb(g);
        out.data[p * 3 + 2] = linear_to_srgb(bl);
    }
    return out;
}

}  // namespace liir
