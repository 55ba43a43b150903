#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liir/image.hpp"
#include "liir/rng.hpp"

namespace liir {

enum class Scenario { SingleSprite, TwinSprites, Occlusion, FastMotion };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

// Generator knobs beyond the scenario tag. zero_velocity pins every sprite
// in place (static clip, all-zero flow); forced_velocity/forced_start pin
// sprite 0's trajectory for ground-truth-sensitive tests.
struct GenOptions {
    int sprite_size = 16;
    bool zero_velocity = false;
    std::optional<std::pair<int, int>> forced_velocity;  // (vx, vy), sprite 0
    std::optional<std::pair<int, int>> forced_start;     // (x0, y0), sprite 0
};

// A synthetic video with exact correspondence ground truth: per-frame flow
// back to frame 0 and per-frame instance masks (0 = background).
struct SyntheticClip {
    Scenario scenario = Scenario::SingleSprite;
    int height = 0, width = 0, frames = 0;
    int num_instances = 0;
    std::vector<Frame> rgb;                           // T frames
    std::vector<LabelImage> masks;                    // T masks
    std::vector<std::vector<double>> flow_to_frame0;  // T x (H*W*2), (dx,dy)

    int num_classes() const { return num_instances + 1; }
};

// Textured sprites moving over a textured background with integer per-frame
// velocities (bouncing at borders so sprites stay fully visible).
// twin_sprites places two sprites with pixel-identical textures; occlusion
// crosses two different sprites; fast_motion uses large velocities.
// Deterministic per seed; all colors lie on the 8-bit grid so PNG round
// trips are exact.
SyntheticClip generate_clip(Scenario scenario, int height, int width, int frames,
                            std::uint64_t seed, const GenOptions& opts = {});

// DAVIS-style export: <dir>/frames/%05d.png, <dir>/anno/%05d.png (indexed),
// <dir>/flow/%05d.f64 (raw interleaved little-endian doubles).
void export_clip(const SyntheticClip& clip, const std::string& dir);

// On-disk sequence: numbered frames plus optional annotations.
struct SequenceSource {
    std::vector<Frame> frames;
    std::vector<LabelImage> annotations;  // indexed by frame; empty if absent
    std::vector<bool> has_annotation;
    int num_classes = 0;
    std::vector<std::array<std::uint8_t, 3>> palette;
};

// Loads <dir>/frames/%05d.png (contiguous from 00000) and any annotations in
// <dir>/anno/. Throws IoError when the directory or frames are missing and
// FormatError on non-uniform sizes or ambiguous palettes.
SequenceSource load_sequence(const std::string& dir);

// Default palette used for mask output (index = class id, 0 = black).
std::vector<std::array<std::uint8_t, 3>> default_palette(int num_classes);

}  // namespace liir
