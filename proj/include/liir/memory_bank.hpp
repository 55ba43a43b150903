#pragma once

#include <deque>
#include <optional>

#include "liir/affinity.hpp"
#include "liir/encoder.hpp"
#include "liir/image.hpp"
#include "liir/position.hpp"
#include "liir/rng.hpp"

namespace liir {

enum class ShiftMode { Shift, Shuffle, None };

ShiftMode shift_mode_from_string(const std::string& s);

// FIFO store of feature points from frames of other videos, encoded by a
// moving-average copy of the encoder. Single writer (the training loop);
// gather returns immutable snapshots.
class MemoryBank {
public:
    MemoryBank(int capacity_frames, int points_per_frame, double momentum_beta,
               ShiftMode shift_mode = ShiftMode::Shift);

    // Copies the live parameters into the EMA encoder. Must run before the
    // first push.
    void init_ema(const EncoderParams& live);

    // Encodes the frame with the EMA encoder and a freshly sampled shifted
    // (or shuffled) position map, samples points_per_frame distinct feature
    // points, and appends them; the oldest entry is evicted at capacity.
    void push(const Frame& frame, int video_id, Rng& rng);

    // All stored vectors whose source video differs from the query's.
    NegativeSet gather_negatives(int current_video_id) const;

    // ema <- beta*ema + (1-beta)*live.
    void ema_update(const EncoderParams& live);

    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    int points_per_frame() const { return points_per_frame_; }
    double beta() const { return beta_; }
    bool has_ema() const { return ema_.has_value(); }
    const EncoderParams& ema_params() const;

    // Usage counters for test-build audits.
    long gather_calls() const { return gather_calls_; }
    long push_calls() const { return push_calls_; }

private:
    struct Entry {
        int video_id = -1;
        std::vector<double> features;  // points_per_frame x c
    };

    int capacity_;
    int points_per_frame_;
    double beta_;
    ShiftMode shift_mode_;
    std::optional<EncoderParams> ema_;
    std::deque<Entry> entries_;
    mutable long gather_calls_ = 0;
    long push_calls_ = 0;
};

}  // namespace liir
