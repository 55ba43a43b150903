#pragma once

#include <map>
#include <ostream>

#include "liir/config.hpp"
#include "liir/data.hpp"
#include "liir/encoder.hpp"
#include "liir/memory_bank.hpp"
#include "liir/propagation.hpp"

namespace liir {

enum class Phase { Warmup, Inter };

// Plain Adam over named parameter arrays.
class AdamOpt {
public:
    AdamOpt(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<ParamRef>& params,
              const std::map<std::string, std::vector<double>>& grads, double lr);

private:
    struct Moments {
        std::vector<double> m, v;
    };
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::map<std::string, Moments> state_;
};

struct PairSample {
    const Frame* query = nullptr;      // training colorspace, original colors
    const Frame* reference = nullptr;  // same video, nearby frame
    int video_id = -1;
    std::uint64_t rng_tag = 0;  // deterministic per-item randomness
};

struct StepLosses {
    double l_res = 0.0;
    double l_com = 0.0;
};

struct TrainLogEntry {
    int epoch = 0;
    int step = 0;
    double l_res = 0.0;
    double l_com = 0.0;
};

// Warm-up (intra-only) then inter (negatives + compactness) training over
// in-memory synthetic clips.
class Trainer {
public:
    explicit Trainer(RunConfig cfg);
    Trainer(RunConfig cfg, std::vector<SyntheticClip> clips);

    // One optimizer step over a batch of pairs. In the warm-up phase the
    // memory bank is never read; in the inter phase the bank must be
    // non-empty and compactness regularization applies when configured.
    StepLosses train_step(const std::vector<PairSample>& batch, Phase phase);

    // Full schedule; per-step records are appended to the log (and streamed
    // to `log_stream` when given, one "epoch step L_res L_com" line each).
    void run(std::ostream* log_stream = nullptr);

    EncoderParams& params() { return params_; }
    const EncoderParams& params() const { return params_; }
    MemoryBank& bank() { return bank_; }
    const std::vector<SyntheticClip>& clips() const { return clips_; }
    const std::vector<TrainLogEntry>& log() const { return log_; }
    const Frame& train_frame(int clip, int t) const;

    // Fills the bank from the training clips with the EMA encoder (run
    // automatically at the start of the inter phase).
    void prefill_bank();

private:
    std::vector<PairSample> epoch_pairs(int epoch);

    RunConfig cfg_;
    std::vector<SyntheticClip> clips_;
    std::vector<std::vector<Frame>> train_frames_;  // clips in training colorspace
    EncoderParams params_;
    MemoryBank bank_;
    AdamOpt opt_;
    Rng rng_;
    long step_counter_ = 0;
    std::vector<TrainLogEntry> log_;
};

// Propagation-based evaluation of an encoder on clips with ground truth.
struct ClipEval {
    double balanced_acc = 0.0;
    double mean_j = 0.0;
};

ClipEval evaluate_clip(const EncoderParams& params, const SyntheticClip& clip,
                       const RunConfig& cfg);
ClipEval evaluate_clips(const EncoderParams& params,
                        const std::vector<SyntheticClip>& clips, const RunConfig& cfg);

// Held-out clips for a config (seeds disjoint from the training stream).
std::vector<SyntheticClip> make_training_clips(const RunConfig& cfg);
std::vector<SyntheticClip> make_eval_clips(const RunConfig& cfg);

// Builds the encoder for a config, covering the position=none case with a
// frozen all-zero map.
EncoderParams encoder_from_config(const RunConfig& cfg);

PropagationOptions propagation_options(const RunConfig& cfg);

}  // namespace liir
