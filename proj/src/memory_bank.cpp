#include "liir/memory_bank.hpp"

namespace liir {

ShiftMode shift_mode_from_string(const std::string& s) {
    if (s == "shift") return ShiftMode::Shift;
    if (s == "shuffle") return ShiftMode::Shuffle;
    if (s == "none") return ShiftMode::None;
    throw ConfigError("unknown shift mode: " + s + " (expected shift|shuffle|none)");
}

MemoryBank::MemoryBank(int capacity_frames, int points_per_frame, double momentum_beta,
                       ShiftMode shift_mode)
    : capacity_(capacity_frames),
      points_per_frame_(points_per_frame),
      beta_(momentum_beta),
      shift_mode_(shift_mode) {
    if (capacity_ < 1) throw ConfigError("bank capacity must be >= 1");
    if (points_per_frame_ < 1) throw ConfigError("bank points_per_frame must be >= 1");
    if (beta_ < 0.0 || beta_ > 1.0) throw ConfigError("bank momentum beta must be in [0,1]");
}

void MemoryBank::init_ema(const EncoderParams& live) { ema_ = live; }

const EncoderParams& MemoryBank::ema_params() const {
    if (!ema_) throw StateError("memory bank EMA encoder not initialized");
    return *ema_;
}

void MemoryBank::push(const Frame& frame, int video_id, Rng& rng) {
    if (!ema_) throw StateError("memory bank EMA encoder not initialized");
    const EncoderParams& enc = *ema_;

    // Fresh modulation per stored frame; the modulated map never carries
    // gradients (the EMA path is forward-only anyway).
    std::vector<double> pos_values;
    switch (shift_mode_) {
        case ShiftMode::Shift: {
            const auto [dx, dy] = sample_shift(enc.pos.height, enc.pos.width, rng);
            pos_values = shift(enc.pos, dx, dy).grid;
            break;
        }
        case ShiftMode::Shuffle:
            pos_values = shuffle(enc.pos, rng).grid;
            break;
        case ShiftMode::None:
            pos_values = enc.pos.materialize();
            break;
    }

    const std::vector<double> feats = encode_features(enc, frame, &pos_values);
    const GridShape grid = enc.feature_grid();
    const std::vector<int> cells =
        rng.sample_without_replacement(grid.cells(), points_per_frame_);

    Entry entry;
    entry.video_id = video_id;
    entry.features.resize(static_cast<std::size_t>(points_per_frame_) * kFeatChannels);
    for (int k = 0; k < points_per_frame_; ++k) {
        const std::size_t src =
            static_cast<std::size_t>(cells[static_cast<std::size_t>(k)]) * kFeatChannels;
        for (int c = 0; c < kFeatChannels; ++c)
            entry.features[static_cast<std::size_t>(k) * kFeatChannels +
                           static_cast<std::size_t>(c)] = feats[src + static_cast<std::size_t>(c)];
    }
    entries_.push_back(std::move(entry));
    while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
    ++push_calls_;
}

NegativeSet MemoryBank::gather_negatives(int current_video_id) const {
    ++gather_calls_;
    NegativeSet out;
    out.dim = kFeatChannels;
    for (const Entry& e : entries_) {
        if (e.video_id == current_video_id) continue;
        out.features.insert(out.features.end(), e.features.begin(), e.features.end());
        for (int k = 0; k < points_per_frame_; ++k) out.source_ids.push_back(e.video_id);
    }
    return out;
}

void MemoryBank::ema_update(const EncoderParams& live) {
    if (!ema_) throw StateError("memory bank EMA encoder not initialized");
    ema_->ema_from(live, beta_);
}

}  // namespace liir
