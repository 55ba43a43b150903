#include "liir/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "liir/grid_io.hpp"
#include "liir/png_io.hpp"

namespace fs = std::filesystem;

namespace liir {

Scenario scenario_from_string(const std::string& s) {
    if (s == "single_sprite") return Scenario::SingleSprite;
    if (s == "twin_sprites") return Scenario::TwinSprites;
    if (s == "occlusion") return Scenario::Occlusion;
    if (s == "fast_motion") return Scenario::FastMotion;
    throw ConfigError("unknown scenario: " + s);
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::SingleSprite: return "single_sprite";
        case Scenario::TwinSprites: return "twin_sprites";
        case Scenario::Occlusion: return "occlusion";
        case Scenario::FastMotion: return "fast_motion";
    }
    return "?";
}

namespace {

double quantize8(double v) {
    const double c = std::min(1.0, std::max(0.0, v));
    return std::round(c * 255.0) / 255.0;
}

// Seeded value-noise texture: a coarse random lattice, bilinearly upsampled,
// quantized to the 8-bit grid. Avoids bundling image assets.
std::vector<double> value_noise(int h, int w, int lattice, Rng& rng,
                                double lo, double hi) {
    const int gh = (h + lattice - 1) / lattice + 1;
    const int gw = (w + lattice - 1) / lattice + 1;
    std::vector<std::array<double, 3>> lat(static_cast<std::size_t>(gh) * gw);
    for (auto& cell : lat)
        for (int c = 0; c < 3; ++c) cell[static_cast<std::size_t>(c)] = rng.uniform(lo, hi);
    std::vector<double> out(static_cast<std::size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y) {
        const double fy = static_cast<double>(y) / lattice;
        const int y0 = static_cast<int>(fy);
        const double ty = fy - y0;
        for (int x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x) / lattice;
            const int x0 = static_cast<int>(fx);
            const double tx = fx - x0;
            const auto& c00 = lat[static_cast<std::size_t>(y0) * gw + x0];
            const auto& c01 = lat[static_cast<std::size_t>(y0) * gw + x0 + 1];
            const auto& c10 = lat[static_cast<std::size_t>(y0 + 1) * gw + x0];
            const auto& c11 = lat[static_cast<std::size_t>(y0 + 1) * gw + x0 + 1];
            for (int c = 0; c < 3; ++c) {
                const double top = c00[static_cast<std::size_t>(c)] * (1 - tx) +
                                   c01[static_cast<std::size_t>(c)] * tx;
                const double bot = c10[static_cast<std::size_t>(c)] * (1 - tx) +
                                   c11[static_cast<std::size_t>(c)] * tx;
                out[(static_cast<std::size_t>(y) * w + x) * 3 + static_cast<std::size_t>(c)] =
                    quantize8(top * (1 - ty) + bot * ty);
            }
        }
    }
    return out;
}

struct Sprite {
    int size = 0;
    std::vector<double> texture;  // size*size*3
    int x0 = 0, y0 = 0;           // frame-0 position (top-left)
    int vx = 0, vy = 0;
};

// Integer position after t bouncing steps, plus the velocity state.
void advance(int& p, int& v, int limit) {
    p += v;
    if (p < 0) {
        p = -p;
        v = -v;
    } else if (p > limit) {
        p = 2 * limit - p;
        v = -v;
    }
}

int pick_velocity(Rng& rng, int lo, int hi) {
    int v = 0;
    while (v == 0) v = rng.uniform_int(lo, hi);
    return v;
}

}  // namespace

SyntheticClip generate_clip(Scenario scenario, int height, int width, int frames,
                            std::uint64_t seed, const GenOptions& opts) {
    if (height % 4 != 0 || width % 4 != 0) {
        throw ConfigError("generate_clip: H and W must be divisible by 4");
    }
    if (frames < 2) throw ConfigError("generate_clip: need at least 2 frames");
    if (opts.sprite_size > height || opts.sprite_size > width) {
        throw ConfigError("generate_clip: sprite larger than frame");
    }
    Rng rng(seed);
    const int s = opts.sprite_size;

    SyntheticClip clip;
    clip.scenario = scenario;
    clip.height = height;
    clip.width = width;
    clip.frames = frames;

    const std::vector<double> background = value_noise(height, width, 8, rng, 0.1, 0.6);

    const int nsprites =
        (scenario == Scenario::TwinSprites || scenario == Scenario::Occlusion) ? 2 : 1;
    if (nsprites == 2 && 2 * s > width) {
        throw ConfigError("generate_clip: two sprites do not fit the frame width");
    }
    clip.num_instances = nsprites;

    const int vmax = scenario == Scenario::FastMotion ? 6 : 2;
    const int vmin_abs = scenario == Scenario::FastMotion ? 3 : 1;

    std::vector<Sprite> sprites(static_cast<std::size_t>(nsprites));
    for (int i = 0; i < nsprites; ++i) {
        Sprite& sp = sprites[static_cast<std::size_t>(i)];
        sp.size = s;
        if (scenario == Scenario::TwinSprites && i == 1) {
            // The instance-discrimination case: both sprites carry the exact
            // same texture, so appearance alone cannot tell them apart.
            sp.texture = sprites[0].texture;
        } else {
            sp.texture = value_noise(s, s, 4, rng, 0.4, 1.0);
        }
        sp.x0 = rng.uniform_int(0, width - s);
        sp.y0 = rng.uniform_int(0, height - s);
        if (!opts.zero_velocity) {
            sp.vx = pick_velocity(rng, -vmax, vmax);
            sp.vy = pick_velocity(rng, -vmax, vmax);
            if (scenario == Scenario::FastMotion) {
                if (std::abs(sp.vx) < vmin_abs) sp.vx = sp.vx < 0 ? -vmin_abs : vmin_abs;
                if (std::abs(sp.vy) < vmin_abs) sp.vy = sp.vy < 0 ? -vmin_abs : vmin_abs;
            }
        }
    }
    if (nsprites == 2) {
        // Keep the pair nearby (twin) or on crossing tracks (occlusion) so
        // the discrimination pressure actually shows up in the clip.
        sprites[1].y0 = std::min(height - s, std::max(0, sprites[0].y0 + rng.uniform_int(-4, 4)));
        if (scenario == Scenario::Occlusion && !opts.zero_velocity) {
            sprites[0].x0 = std::min(width / 4, width - s);
            sprites[1].x0 = std::max(width - width / 4 - s, 0);
            sprites[0].vx = std::abs(sprites[0].vx);
            sprites[1].vx = -std::abs(sprites[1].vx);
        }
        if (scenario == Scenario::TwinSprites) {
            // Start apart horizontally so frame 0 labels are unambiguous.
            sprites[0].x0 = std::min(width / 2 - s, std::max(0, sprites[0].x0 % (width / 2 - s + 1)));
            sprites[1].x0 = std::min(width - s, width / 2 + sprites[1].x0 % (width / 2 - s + 1));
        }
    }
    if (opts.forced_start) {
        sprites[0].x0 = std::min(width - s, std::max(0, opts.forced_start->first));
        sprites[0].y0 = std::min(height - s, std::max(0, opts.forced_start->second));
    }
    if (opts.forced_velocity && !opts.zero_velocity) {
        sprites[0].vx = opts.forced_velocity->first;
        sprites[0].vy = opts.forced_velocity->second;
    }

    clip.rgb.reserve(static_cast<std::size_t>(frames));
    clip.masks.reserve(static_cast<std::size_t>(frames));
    clip.flow_to_frame0.reserve(static_cast<std::size_t>(frames));

    std::vector<Sprite> state = sprites;
    for (int t = 0; t < frames; ++t) {
        if (t > 0) {
            for (Sprite& sp : state) {
                advance(sp.x0, sp.vx, width - sp.size);
                advance(sp.y0, sp.vy, height - sp.size);
            }
        }
        Frame frame(height, width, ColorSpace::RGB);
        frame.data = background;
        LabelImage mask(height, width);
        std::vector<double> flow(static_cast<std::size_t>(height) * width * 2, 0.0);
        // Draw in id order: later sprites overwrite (fixed z-order on top).
        for (int i = 0; i < nsprites; ++i) {
            const Sprite& sp = state[static_cast<std::size_t>(i)];
            const Sprite& origin = sprites[static_cast<std::size_t>(i)];
            const double fx = static_cast<double>(origin.x0 - sp.x0);
            const double fy = static_cast<double>(origin.y0 - sp.y0);
            for (int yy = 0; yy < sp.size; ++yy) {
                for (int xx = 0; xx < sp.size; ++xx) {
                    const int y = sp.y0 + yy, x = sp.x0 + xx;
                    for (int c = 0; c < 3; ++c)
                        frame.at(y, x, c) =
                            sp.texture[(static_cast<std::size_t>(yy) * sp.size + xx) * 3 +
                                       static_cast<std::size_t>(c)];
                    mask.at(y, x) = i + 1;
                    const std::size_t f = (static_cast<std::size_t>(y) * width + x) * 2;
                    flow[f] = fx;
                    flow[f + 1] = fy;
                }
            }
        }
        clip.rgb.push_back(std::move(frame));
        clip.masks.push_back(std::move(mask));
        clip.flow_to_frame0.push_back(std::move(flow));
    }
    return clip;
}

std::vector<std::array<std::uint8_t, 3>> default_palette(int num_classes) {
    // DAVIS-style palette: background black, then saturated distinct colors.
    std::vector<std::array<std::uint8_t, 3>> pal;
    pal.push_back({0, 0, 0});
    const std::array<std::uint8_t, 3> colors[] = {
        {128, 0, 0},   {0, 128, 0},   {128, 128, 0},   {0, 0, 128},
        {128, 0, 128}, {0, 128, 128}, {128, 128, 128}, {64, 0, 0},
        {192, 0, 0},   {64, 128, 0},  {192, 128, 0},   {64, 0, 128},
    };
    for (int i = 1; i < num_classes; ++i)
        pal.push_back(colors[static_cast<std::size_t>((i - 1) % 12)]);
    return pal;
}

void export_clip(const SyntheticClip& clip, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "frames");
    fs::create_directories(fs::path(dir) / "anno");
    fs::create_directories(fs::path(dir) / "flow");
    const auto palette = default_palette(clip.num_classes());
    char name[32];
    for (int t = 0; t < clip.frames; ++t) {
        std::snprintf(name, sizeof(name), "%05d.png", t);
        write_png_rgb((fs::path(dir) / "frames" / name).string(), clip.rgb[static_cast<std::size_t>(t)]);
        IndexedImage anno;
        anno.height = clip.height;
        anno.width = clip.width;
        anno.palette = palette;
        anno.indices.resize(clip.masks[static_cast<std::size_t>(t)].ids.size());
        for (std::size_t i = 0; i < anno.indices.size(); ++i)
            anno.indices[i] = static_cast<std::uint8_t>(clip.masks[static_cast<std::size_t>(t)].ids[i]);
        write_png_indexed((fs::path(dir) / "anno" / name).string(), anno);
        std::snprintf(name, sizeof(name), "%05d.f64", t);
        write_flow_f64((fs::path(dir) / "flow" / name).string(), clip.height, clip.width,
                       clip.flow_to_frame0[static_cast<std::size_t>(t)]);
    }
}

SequenceSource load_sequence(const std::string& dir) {
    const fs::path frames_dir = fs::path(dir) / "frames";
    if (!fs::is_directory(frames_dir)) {
        throw IoError("sequence has no frames directory: " + frames_dir.string());
    }
    SequenceSource seq;
    char name[32];
    for (int t = 0;; ++t) {
        std::snprintf(name, sizeof(name), "%05d.png", t);
        const fs::path p = frames_dir / name;
        if (!fs::exists(p)) break;
        seq.frames.push_back(read_png_rgb(p.string()));
    }
    if (seq.frames.empty()) {
        throw IoError("no frames found under " + frames_dir.string() +
                      " (expected contiguous %05d.png from 00000)");
    }
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        if (seq.frames[t].height != seq.frames[0].height ||
            seq.frames[t].width != seq.frames[0].width) {
            throw FormatError("non-uniform frame sizes in " + dir);
        }
    }

    const fs::path anno_dir = fs::path(dir) / "anno";
    seq.annotations.resize(seq.frames.size());
    seq.has_annotation.assign(seq.frames.size(), false);
    int max_id = 0;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        std::snprintf(name, sizeof(name), "%05d.png", static_cast<int>(t));
        const fs::path p = anno_dir / name;
        if (!fs::exists(p)) continue;
        IndexedImage img = read_png_indexed(p.string());
        if (img.height != seq.frames[0].height || img.width != seq.frames[0].width) {
            throw FormatError("annotation size mismatch: " + p.string());
        }
        // Ambiguous palettes (two used entries with the same color) cannot
        // be mapped back to classes deterministically.
        std::set<int> used;
        for (std::uint8_t idx : img.indices) used.insert(idx);
        std::map<std::array<std::uint8_t, 3>, int> seen;
        for (int idx : used) {
            if (idx >= static_cast<int>(img.palette.size())) {
                throw FormatError("annotation index outside palette: " + p.string());
            }
            const auto color = img.palette[static_cast<std::size_t>(idx)];
            auto [it, inserted] = seen.emplace(color, idx);
            if (!inserted) {
                throw FormatError("palette collision in " + p.string());
            }
        }
        if (seq.palette.empty()) seq.palette = img.palette;
        LabelImage labels(img.height, img.width);
        for (std::size_t i = 0; i < img.indices.size(); ++i) {
            labels.ids[i] = img.indices[i];
            max_id = std::max(max_id, static_cast<int>(img.indices[i]));
        }
        seq.annotations[t] = std::move(labels);
        seq.has_annotation[t] = true;
    }
    seq.num_classes = max_id + 1;
    return seq;
}

}  // namespace liir
