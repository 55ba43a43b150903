#include "liir/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "liir/affinity.hpp"
#include "liir/compactness.hpp"
#include "liir/metrics.hpp"
#include "liir/parallel.hpp"
#include "liir/reconstruction.hpp"

namespace liir {

void AdamOpt::step(const std::vector<ParamRef>& params,
                   const std::map<std::string, std::vector<double>>& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const ParamRef& p : params) {
        const auto it = grads.find(p.name);
        if (it == grads.end()) continue;
        const auto& g = it->second;
        if (g.size() != p.data->size()) {
            throw ShapeError("adam: gradient size mismatch for " + p.name);
        }
        Moments& mo = state_[p.name];
        if (mo.m.size() != g.size()) {
            mo.m.assign(g.size(), 0.0);
            mo.v.assign(g.size(), 0.0);
        }
        auto& theta = *p.data;
        for (std::size_t i = 0; i < g.size(); ++i) {
            mo.m[i] = beta1_ * mo.m[i] + (1.0 - beta1_) * g[i];
            mo.v[i] = beta2_ * mo.v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = mo.m[i] / bc1;
            const double vhat = mo.v[i] / bc2;
            theta[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

EncoderParams encoder_from_config(const RunConfig& cfg) {
    EncoderParams p;
    if (cfg.position_enabled()) {
        p = make_encoder(cfg.frame_size, cfg.frame_size, cfg.position_kind(), cfg.seed,
                         cfg.temperature);
    } else {
        // Position ablation baseline: a frozen all-zero map makes the
        // injection a no-op while keeping the architecture identical.
        p = make_encoder(cfg.frame_size, cfg.frame_size, PositionKind::Spe2d, cfg.seed,
                         cfg.temperature);
        std::fill(p.pos.grid.begin(), p.pos.grid.end(), 0.0);
    }
    p.input_space = cfg.train_colorspace();
    return p;
}

std::vector<SyntheticClip> make_training_clips(const RunConfig& cfg) {
    GenOptions opts;
    opts.sprite_size = cfg.sprite_size;
    std::vector<SyntheticClip> clips;
    clips.reserve(static_cast<std::size_t>(cfg.train_clips));
    for (int i = 0; i < cfg.train_clips; ++i) {
        const Scenario sc = cfg.scenarios[static_cast<std::size_t>(i) % cfg.scenarios.size()];
        clips.push_back(generate_clip(sc, cfg.frame_size, cfg.frame_size, cfg.clip_frames,
                                      cfg.seed * 1000003ULL + static_cast<std::uint64_t>(i),
                                      opts));
    }
    return clips;
}

std::vector<SyntheticClip> make_eval_clips(const RunConfig& cfg) {
    GenOptions opts;
    opts.sprite_size = cfg.sprite_size;
    std::vector<SyntheticClip> clips;
    clips.reserve(static_cast<std::size_t>(cfg.eval_clips));
    for (int i = 0; i < cfg.eval_clips; ++i) {
        const Scenario sc = cfg.scenarios[static_cast<std::size_t>(i) % cfg.scenarios.size()];
        // Offset stream keeps held-out clips disjoint from training clips.
        clips.push_back(generate_clip(sc, cfg.frame_size, cfg.frame_size, cfg.clip_frames,
                                      cfg.seed * 1000003ULL + 777000ULL +
                                          static_cast<std::uint64_t>(i),
                                      opts));
    }
    return clips;
}

PropagationOptions propagation_options(const RunConfig& cfg) {
    PropagationOptions opts;
    opts.temperature = cfg.temperature;
    opts.window_radius = cfg.window_radius;
    opts.use_compact = cfg.compact_infer;
    opts.compact_m = cfg.compact_m;
    opts.compact_var_floor = cfg.compact_var_floor;
    return opts;
}

namespace {

Frame to_train_space(const Frame& rgb, ColorSpace space) {
    return space == ColorSpace::Lab ? rgb_to_lab(rgb) : rgb;
}

}  // namespace

Trainer::Trainer(RunConfig cfg) : Trainer(std::move(cfg), {}) {}

Trainer::Trainer(RunConfig cfg, std::vector<SyntheticClip> clips)
    : cfg_(std::move(cfg)),
      clips_(std::move(clips)),
      params_(encoder_from_config(cfg_)),
      bank_(cfg_.bank_capacity, cfg_.bank_points, cfg_.ema_beta, cfg_.bank_shift_mode()),
      rng_(cfg_.seed) {
    cfg_.validate();
    if (clips_.empty()) clips_ = make_training_clips(cfg_);
    const ColorSpace space = cfg_.train_colorspace();
    train_frames_.resize(clips_.size());
    for (std::size_t c = 0; c < clips_.size(); ++c) {
        train_frames_[c].reserve(clips_[c].rgb.size());
        for (const Frame& f : clips_[c].rgb)
            train_frames_[c].push_back(to_train_space(f, space));
    }
}

const Frame& Trainer::train_frame(int clip, int t) const {
    return train_frames_[static_cast<std::size_t>(clip)][static_cast<std::size_t>(t)];
}

void Trainer::prefill_bank() {
    if (!bank_.has_ema()) bank_.init_ema(params_);
    // Round-robin over clips until the ring is full, so gather sees a steady
    // bank from the first inter step.
    Rng fill_rng = rng_.fork(0x9f1llu);
    int clip = 0;
    for (int i = 0; i < bank_.capacity(); ++i) {
        const int t = fill_rng.uniform_int(0, clips_[static_cast<std::size_t>(clip)].frames - 1);
        bank_.push(train_frames_[static_cast<std::size_t>(clip)][static_cast<std::size_t>(t)],
                   clip, fill_rng);
        clip = (clip + 1) % static_cast<int>(clips_.size());
    }
}

StepLosses Trainer::train_step(const std::vector<PairSample>& batch, Phase phase) {
    if (batch.empty()) throw ContractError("train_step: empty batch");
    if (phase == Phase::Inter && bank_.size() == 0) {
        throw StateError("train_step: inter phase requires a non-empty memory bank");
    }
    const BottleneckSpec bspec = cfg_.bottleneck_spec();
    const GridShape grid = params_.feature_grid();
    const bool use_compact =
        phase == Phase::Inter && cfg_.compact_train && cfg_.lambda_com > 0.0;

    // Negatives snapshot per item before the parallel section (bank reads are
    // const; pushed frames must not appear mid-step).
    std::vector<NegativeSet> negatives(batch.size());
    if (phase == Phase::Inter && cfg_.negatives) {
        for (std::size_t i = 0; i < batch.size(); ++i)
            negatives[i] = bank_.gather_negatives(batch[i].video_id);
    }

    struct ItemOut {
        std::map<std::string, std::vector<double>> grads;
        double l_res = 0.0, l_com = 0.0;
    };
    std::vector<ItemOut> items(batch.size());

    parallel_for(batch.size(), [&](std::size_t i) {
        const PairSample& sample = batch[i];
        Rng item_rng = rng_.fork(sample.rng_tag);
        ad::Tape tape;
        const TapedEncoder enc = put_encoder_on_tape(tape, params_, true);

        // One draw per pair: the same channels are dropped from query and
        // reference while originals stay the loss target.
        const BottleneckDraw draw = sample_bottleneck(bspec, item_rng);
        const Frame q_in = apply_bottleneck(*sample.query, bspec, draw);
        const Frame r_in = apply_bottleneck(*sample.reference, bspec, draw);

        ad::Var fq = enc.encode(q_in);
        ad::Var fr = enc.encode(r_in);

        AffinityMatrix recon_affinity =
            phase == Phase::Inter
                ? intra_inter_affinity(fq, fr, negatives[i], grid, params_.temperature)
                : intra_affinity(fq, fr, grid, params_.temperature);

        ad::Var target = frame_to_tape(tape, *sample.query, grid);
        ad::Var ref_colors = frame_to_tape(tape, *sample.reference, grid);
        ad::Var recon = reconstruct(recon_affinity, ref_colors);
        ad::Var l_res = reconstruction_loss(target, recon);

        ad::Var loss = l_res;
        if (use_compact) {
            // The prior regularizes intra-video matching only, so the target
            // comes from the plain Eq.-1 affinity of the same pair.
            AffinityMatrix intra = intra_affinity(fq, fr, grid, params_.temperature);
            ad::Var l_com = compactness_loss(intra, cfg_.compact_m, cfg_.compact_var_floor);
            loss = ad::add(loss, ad::scale(l_com, cfg_.lambda_com));
            items[i].l_com = l_com.scalar();
        }
        if (!std::isfinite(loss.scalar())) {
            throw NumericError("train_step: non-finite loss");
        }
        tape.backward(loss.id);
        for (const auto& [name, leaf] : enc.param_leaves()) {
            const auto& g = leaf.grad();
            items[i].grads[name] =
                g.empty() ? std::vector<double>(leaf.values().size(), 0.0) : g;
        }
        items[i].l_res = l_res.scalar();
    });

    // Reduce in batch order so results do not depend on the thread count.
    std::map<std::string, std::vector<double>> grads;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (const ItemOut& item : items) {
        for (const auto& [name, g] : item.grads) {
            auto& acc = grads[name];
            if (acc.empty()) acc.assign(g.size(), 0.0);
            for (std::size_t j = 0; j < g.size(); ++j) acc[j] += g[j] * inv_b;
        }
    }
    opt_.step(params_.named_params(), grads,
              phase == Phase::Warmup ? cfg_.lr_warmup : cfg_.lr_inter);

    StepLosses losses;
    for (const ItemOut& item : items) {
        losses.l_res += item.l_res * inv_b;
        losses.l_com += item.l_com * inv_b;
    }

    if (phase == Phase::Inter) {
        bank_.ema_update(params_);
        // Online maintenance: current queries become future negatives.
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Rng push_rng = rng_.fork(batch[i].rng_tag ^ 0xB4A2ull);
            bank_.push(*batch[i].query, batch[i].video_id, push_rng);
        }
    }
    return losses;
}

std::vector<PairSample> Trainer::epoch_pairs(int epoch) {
    Rng erng = rng_.fork(0xE70C000ULL + static_cast<std::uint64_t>(epoch));
    std::vector<PairSample> pairs;
    for (std::size_t c = 0; c < clips_.size(); ++c) {
        const int T = clips_[c].frames;
        for (int t = 0; t + 1 < T; ++t) {
            const int gap = std::min(erng.uniform_int(1, 3), T - 1 - t);
            PairSample p;
            p.reference = &train_frames_[c][static_cast<std::size_t>(t)];
            p.query = &train_frames_[c][static_cast<std::size_t>(t + gap)];
            p.video_id = static_cast<int>(c);
            pairs.push_back(p);
        }
    }
    for (std::size_t i = pairs.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(erng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(pairs[i - 1], pairs[j]);
    }
    return pairs;
}

void Trainer::run(std::ostream* log_stream) {
    const int total_epochs = cfg_.warmup_epochs + cfg_.inter_epochs;
    for (int epoch = 0; epoch < total_epochs; ++epoch) {
        const Phase phase = epoch < cfg_.warmup_epochs ? Phase::Warmup : Phase::Inter;
        if (phase == Phase::Inter && !bank_.has_ema()) prefill_bank();
        std::vector<PairSample> pairs = epoch_pairs(epoch);
        for (std::size_t lo = 0; lo < pairs.size(); lo += static_cast<std::size_t>(cfg_.batch_size)) {
            const std::size_t hi =
                std::min(pairs.size(), lo + static_cast<std::size_t>(cfg_.batch_size));
            std::vector<PairSample> batch(pairs.begin() + static_cast<std::ptrdiff_t>(lo),
                                          pairs.begin() + static_cast<std::ptrdiff_t>(hi));
            for (std::size_t i = 0; i < batch.size(); ++i)
                batch[i].rng_tag = static_cast<std::uint64_t>(step_counter_) * 131ULL + i;
            const StepLosses losses = train_step(batch, phase);
            ++step_counter_;
            log_.push_back({epoch, static_cast<int>(step_counter_), losses.l_res, losses.l_com});
            if (log_stream) {
                (*log_stream) << epoch << " " << step_counter_ << " " << losses.l_res
                              << " " << losses.l_com << "\n";
            }
        }
    }
}

ClipEval evaluate_clip(const EncoderParams& params, const SyntheticClip& clip,
                       const RunConfig& cfg) {
    const ColorSpace space = params.input_space;
    const GridShape grid = params.feature_grid();
    const int K = clip.num_classes();
    const int factor = clip.height / grid.h;
    const PropagationOptions opts = propagation_options(cfg);

    std::vector<std::vector<double>> features(static_cast<std::size_t>(clip.frames));
    parallel_for(static_cast<std::size_t>(clip.frames), [&](std::size_t t) {
        features[t] = encode_features(params, to_train_space(clip.rgb[t], space));
    });

    std::vector<LabelMap> labelmaps(static_cast<std::size_t>(clip.frames));
    labelmaps[0] = labelmap_from_image(clip.masks[0], K, factor);

    std::vector<LabelImage> pred(static_cast<std::size_t>(clip.frames));
    pred[0] = clip.masks[0];
    double acc_sum = 0.0;
    for (int t = 1; t < clip.frames; ++t) {
        std::vector<std::pair<const std::vector<double>*, const LabelMap*>> refs;
        for (int r : reference_schedule(t, cfg.long_term_refs)) {
            refs.emplace_back(&features[static_cast<std::size_t>(r)],
                              &labelmaps[static_cast<std::size_t>(r)]);
        }
        labelmaps[static_cast<std::size_t>(t)] =
            propagate_step(features[static_cast<std::size_t>(t)], refs, grid, opts);
        pred[static_cast<std::size_t>(t)] =
            argmax_labels(labelmaps[static_cast<std::size_t>(t)], factor);
        acc_sum += balanced_pixel_accuracy(pred[static_cast<std::size_t>(t)],
                                           clip.masks[static_cast<std::size_t>(t)], K);
    }
    ClipEval out;
    out.balanced_acc = acc_sum / static_cast<double>(clip.frames - 1);
    out.mean_j = sequence_j(pred, clip.masks).mean;
    return out;
}

ClipEval evaluate_clips(const EncoderParams& params,
                        const std::vector<SyntheticClip>& clips, const RunConfig& cfg) {
    ClipEval total;
    for (const SyntheticClip& clip : clips) {
        const ClipEval e = evaluate_clip(params, clip, cfg);
        total.balanced_acc += e.balanced_acc;
        total.mean_j += e.mean_j;
    }
    total.balanced_acc /= static_cast<double>(clips.size());
    total.mean_j /= static_cast<double>(clips.size());
    return total;
}

}  // namespace liir
