#include "liir/position.hpp"

#include <cmath>
#include <utility>

namespace liir {

PositionKind position_kind_from_string(const std::string& s) {
    if (s == "2dspe") return PositionKind::Spe2d;
    if (s == "1dape") return PositionKind::Ape1d;
    if (s == "2dape") return PositionKind::Ape2d;
    throw ConfigError("unknown position kind: " + s + " (expected 2dspe|1dape|2dape)");
}

std::string to_string(PositionKind k) {
    switch (k) {
        case PositionKind::Spe2d: return "2dspe";
        case PositionKind::Ape1d: return "1dape";
        case PositionKind::Ape2d: return "2dape";
    }
    return "?";
}

std::vector<double> PositionMap::materialize() const {
    if (kind != PositionKind::Ape2d) return grid;
    const int half = channels / 2;
    std::vector<double> out(static_cast<std::size_t>(height) * width * channels);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t base =
                (static_cast<std::size_t>(y) * width + x) * static_cast<std::size_t>(channels);
            for (int ch = 0; ch < half; ++ch) {
                out[base + static_cast<std::size_t>(ch)] =
                    x_set[static_cast<std::size_t>(x) * half + ch];
                out[base + static_cast<std::size_t>(half + ch)] =
                    y_set[static_cast<std::size_t>(y) * half + ch];
            }
        }
    }
    return out;
}

std::int64_t PositionMap::parameter_count() const {
    if (!learnable) return 0;
    if (kind == PositionKind::Ape1d)
        return static_cast<std::int64_t>(height) * width * channels;
    return static_cast<std::int64_t>(height + width) * (channels / 2);
}

PositionMap build_2dspe(int height, int width, int channels) {
    if (channels % 4 != 0) {
        throw ConfigError("2dspe requires channel count divisible by 4, got " +
                          std::to_string(channels));
    }
    PositionMap pos;
    pos.kind = PositionKind::Spe2d;
    pos.learnable = false;
    pos.height = height;
    pos.width = width;
    pos.channels = channels;
    pos.grid.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
    constexpr double kEps = 1e-4;
    const int quarter = channels / 4;
    const int half = channels / 2;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t base =
                (static_cast<std::size_t>(y) * width + x) * static_cast<std::size_t>(channels);
            for (int u = 0; u < quarter; ++u) {
                const double freq = std::pow(kEps, 4.0 * u / channels);
                pos.grid[base + static_cast<std::size_t>(2 * u)] = std::sin(x * freq);
                pos.grid[base + static_cast<std::size_t>(2 * u + 1)] = std::cos(x * freq);
            }
            for (int v = 0; v < quarter; ++v) {
                const double freq = std::pow(kEps, 4.0 * v / channels);
                pos.grid[base + static_cast<std::size_t>(2 * v + half)] = std::sin(y * freq);
                pos.grid[base + static_cast<std::size_t>(2 * v + 1 + half)] = std::cos(y * freq);
            }
        }
    }
    return pos;
}

PositionMap build_learnable(PositionKind kind, int height, int width, int channels,
                            std::uint64_t seed) {
    if (kind == PositionKind::Spe2d) {
        throw ConfigError("build_learnable: 2dspe is not learnable");
    }
    if (kind == PositionKind::Ape2d && channels % 2 != 0) {
        throw ConfigError("2dape requires even channel count");
    }
    PositionMap pos;
    pos.kind = kind;
    pos.learnable = true;
    pos.height = height;
    pos.width = width;
    pos.channels = channels;
    Rng rng(seed);
    constexpr double kInitStd = 0.02;
    if (kind == PositionKind::Ape1d) {
        pos.grid.resize(static_cast<std::size_t>(height) * width * channels);
        for (double& v : pos.grid) v = rng.normal(0.0, kInitStd);
    } else {
        const int half = channels / 2;
        pos.x_set.resize(static_cast<std::size_t>(width) * half);
        pos.y_set.resize(static_cast<std::size_t>(height) * half);
        for (double& v : pos.x_set) v = rng.normal(0.0, kInitStd);
        for (double& v : pos.y_set) v = rng.normal(0.0, kInitStd);
    }
    return pos;
}

PositionMap shift(const PositionMap& pos, int dx, int dy) {
    if (dx < 0 || dx >= pos.width || dy < 0 || dy >= pos.height) {
        throw RangeError("shift: step (" + std::to_string(dx) + "," + std::to_string(dy) +
                         ") outside [0," + std::to_string(pos.width) + ")x[0," +
                         std::to_string(pos.height) + ")");
    }
    const std::vector<double> src = pos.materialize();
    PositionMap out;
    out.kind = pos.kind;
    out.learnable = false;  // shifted maps never carry gradients
    out.height = pos.height;
    out.width = pos.width;
    out.channels = pos.channels;
    out.grid.resize(src.size());
    const int c = pos.channels;
    for (int y = 0; y < pos.height; ++y) {
        const int sy = (y - dy + pos.height) % pos.height;
        for (int x = 0; x < pos.width; ++x) {
            const int sx = (x - dx + pos.width) % pos.width;
            const std::size_t dst = (static_cast<std::size_t>(y) * pos.width + x) *
                                    static_cast<std::size_t>(c);
            const std::size_t from = (static_cast<std::size_t>(sy) * pos.width + sx) *
                                     static_cast<std::size_t>(c);
            for (int ch = 0; ch < c; ++ch)
                out.grid[dst + static_cast<std::size_t>(ch)] =
                    src[from + static_cast<std::size_t>(ch)];
        }
    }
    return out;
}

PositionMap shuffle(const PositionMap& pos, Rng& rng) {
    const std::vector<double> src = pos.materialize();
    const int cells = pos.height * pos.width;
    std::vector<int> perm(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = cells - 1; i > 0; --i) {
        const int j = rng.uniform_int(0, i);
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    PositionMap out;
    out.kind = pos.kind;
    out.learnable = false;
    out.height = pos.height;
    out.width = pos.width;
    out.channels = pos.channels;
    out.grid.resize(src.size());
    const int c = pos.channels;
    for (int i = 0; i < cells; ++i) {
        const std::size_t dst = static_cast<std::size_t>(i) * c;
        const std::size_t from = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]) * c;
        for (int ch = 0; ch < c; ++ch)
            out.grid[dst + static_cast<std::size_t>(ch)] = src[from + static_cast<std::size_t>(ch)];
    }
    return out;
}

std::pair<int, int> sample_shift(int height, int width, Rng& rng) {
    const int dx = rng.uniform_int(0, width - 1);
    const int dy = rng.uniform_int(0, height - 1);
    return {dx, dy};
}

namespace ad_ops {

TapedPosition put_on_tape(ad::Tape& tape, const PositionMap& pos, bool trainable) {
    TapedPosition out;
    const ad::Shape grid_shape{pos.height, pos.width, pos.channels};
    const bool learn = trainable && pos.learnable;
    if (pos.kind == PositionKind::Ape2d) {
        const int half = pos.channels / 2;
        ad::Var xs = ad::leaf(tape, {pos.width, half}, pos.x_set, learn);
        ad::Var ys = ad::leaf(tape, {pos.height, half}, pos.y_set, learn);
        // Expand the two parameter sets over the grid with row gathers, then
        // join halves per cell.
        std::vector<int> x_idx(static_cast<std::size_t>(pos.height) * pos.width);
        std::vector<int> y_idx(x_idx.size());
        for (int y = 0; y < pos.height; ++y)
            for (int x = 0; x < pos.width; ++x) {
                const std::size_t cell = static_cast<std::size_t>(y) * pos.width + x;
                x_idx[cell] = x;
                y_idx[cell] = y;
            }
        ad::Var gx = ad::gather_rows(xs, x_idx);
        ad::Var gy = ad::gather_rows(ys, y_idx);
        out.grid = ad::reshape(ad::concat_cols(gx, gy), grid_shape);
        out.params = {xs, ys};
    } else {
        ad::Var g = ad::leaf(tape, grid_shape, pos.grid, learn);
        out.grid = g;
        if (learn) out.params = {g};
    }
    return out;
}

ad::Var constant_grid(ad::Tape& tape, const PositionMap& shape_like,
                      const std::vector<double>& values) {
    return ad::constant(tape, {shape_like.height, shape_like.width, shape_like.channels},
                        values);
}

}  // namespace ad_ops

}  // namespace liir
