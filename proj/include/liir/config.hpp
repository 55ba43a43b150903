#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liir/data.hpp"
#include "liir/memory_bank.hpp"
#include "liir/position.hpp"
#include "liir/reconstruction.hpp"

namespace liir {

// Flat run configuration: every field has a documented default, unknown keys
// are rejected. The flat key=value shape exists so ablation scripts can flip
// single keys.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "runs/out";

    // data
    std::vector<Scenario> scenarios = {Scenario::SingleSprite};
    int train_clips = 8;
    int eval_clips = 10;
    int frame_size = 64;
    int clip_frames = 20;
    int sprite_size = 16;

    // encoder
    std::string position = "1dape";  // 2dspe|1dape|2dape|none
    double temperature = 0.07;

    // training schedule
    int warmup_epochs = 6;
    int inter_epochs = 4;
    double lr_warmup = 1e-3;
    double lr_inter = 1e-4;
    int batch_size = 4;
    double lambda_com = 1.0;

    // information bottleneck
    std::string bottleneck_colorspace = "lab";  // lab|rgb
    std::string bottleneck_mode = "channel_dropout";
    int bottleneck_drop = 1;
    double bottleneck_prob = 0.8;

    // compactness prior
    bool compact_train = true;
    bool compact_infer = true;
    int compact_m = 2;
    double compact_var_floor = 0.5;

    // memory bank / inter-video negatives
    bool negatives = true;  // false trains the inter phase without negatives
    int bank_capacity = 90;
    int bank_points = 4;
    double ema_beta = 0.999;
    std::string shift_mode = "shift";  // shift|shuffle|none

    // propagation
    int window_radius = 3;
    bool long_term_refs = true;

    void validate() const;

    ColorSpace train_colorspace() const;
    BottleneckSpec bottleneck_spec() const;
    ShiftMode bank_shift_mode() const { return shift_mode_from_string(shift_mode); }
    bool position_enabled() const { return position != "none"; }
    PositionKind position_kind() const;
};

// Parses "key=value" lines ('#' comments, blank lines allowed). Unknown keys
// raise ConfigError naming the field.
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& line);
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);
std::string dump_config(const RunConfig& cfg);

}  // namespace liir
