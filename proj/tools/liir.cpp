// liir: train/evaluate the desk-scale correspondence model, propagate labels
// over frame directories, run ablation sweeps, render debug dumps.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "liir/checkpoint.hpp"
#include "liir/compactness.hpp"
#include "liir/config.hpp"
#include "liir/data.hpp"
#include "liir/grid_io.hpp"
#include "liir/metrics.hpp"
#include "liir/parallel.hpp"
#include "liir/png_io.hpp"
#include "liir/propagation.hpp"
#include "liir/trainer.hpp"

namespace fs = std::filesystem;
using namespace liir;

namespace {

// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

RunConfig load_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config_file(config_path);
    apply_overrides(cfg, overrides);
    cfg.validate();
    return cfg;
}

Frame to_space(const Frame& rgb, ColorSpace space) {
    return space == ColorSpace::Lab ? rgb_to_lab(rgb) : rgb;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_override) {
    RunConfig cfg = load_config(config_path, overrides);
    if (!out_override.empty()) cfg.out_dir = out_override;
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream eff(fs::path(cfg.out_dir) / "config.effective");
        eff << dump_config(cfg);
    }
    std::ofstream log_stream(fs::path(cfg.out_dir) / "train_log.txt");
    if (!log_stream) throw IoError("cannot open train log under " + cfg.out_dir);

    Trainer trainer(cfg);
    std::cout << "training: " << trainer.clips().size() << " clips, "
              << cfg.warmup_epochs << " warm-up + " << cfg.inter_epochs
              << " inter epochs\n";
    trainer.run(&log_stream);

    const std::string ck_path = (fs::path(cfg.out_dir) / "model.liir").string();
    const EncoderParams* ema =
        trainer.bank().has_ema() ? &trainer.bank().ema_params() : nullptr;
    save_checkpoint(ck_path, trainer.params(), ema);
    std::cout << "checkpoint: " << ck_path << "\n";

    const std::vector<SyntheticClip> holdout = make_eval_clips(cfg);
    const ClipEval eval = evaluate_clips(trainer.params(), holdout, cfg);
    std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.txt");
    metrics << "holdout_balanced_acc " << eval.balanced_acc << "\n"
            << "holdout_mean_j " << eval.mean_j << "\n";
    std::cout << "holdout balanced accuracy " << eval.balanced_acc << ", mean J "
              << eval.mean_j << "\n";
    return 0;
}

// Shared propagation over an on-disk sequence. Returns predicted masks.
std::vector<LabelImage> propagate_sequence(const EncoderParams& params_in,
                                           const SequenceSource& seq,
                                           const PropagationOptions& opts,
                                           bool long_term) {
    EncoderParams params = params_in;
    const int H = seq.frames[0].height, W = seq.frames[0].width;
    if (H != params.input_height || W != params.input_width) {
        if (params.pos.kind == PositionKind::Spe2d && H % 4 == 0 && W % 4 == 0) {
            // Sinusoidal maps extend to unseen resolutions; learnable ones
            // are bound to the training grid.
            params.input_height = H;
            params.input_width = W;
            params.pos = build_2dspe(H / 2, W / 2, kPosChannels);
        } else {
            throw FormatError("sequence size " + std::to_string(H) + "x" +
                              std::to_string(W) + " does not match checkpoint (" +
                              std::to_string(params.input_height) + "x" +
                              std::to_string(params.input_width) + ")");
        }
    }
    if (!seq.has_annotation[0]) {
        throw FormatError("sequence has no first-frame annotation");
    }
    const GridShape grid = params.feature_grid();
    const int factor = H / grid.h;
    const int K = std::max(2, seq.num_classes);
    const int T = static_cast<int>(seq.frames.size());

    std::vector<std::vector<double>> features(static_cast<std::size_t>(T));
    parallel_for(static_cast<std::size_t>(T), [&](std::size_t t) {
        features[t] = encode_features(params, to_space(seq.frames[t], params.input_space));
    });

    std::vector<LabelMap> labelmaps(static_cast<std::size_t>(T));
    labelmaps[0] = labelmap_from_image(seq.annotations[0], K, factor);
    std::vector<LabelImage> pred(static_cast<std::size_t>(T));
    pred[0] = seq.annotations[0];
    for (int t = 1; t < T; ++t) {
        std::vector<std::pair<const std::vector<double>*, const LabelMap*>> refs;
        for (int r : reference_schedule(t, long_term)) {
            refs.emplace_back(&features[static_cast<std::size_t>(r)],
                              &labelmaps[static_cast<std::size_t>(r)]);
        }
        labelmaps[static_cast<std::size_t>(t)] =
            propagate_step(features[static_cast<std::size_t>(t)], refs, grid, opts);
        pred[static_cast<std::size_t>(t)] =
            argmax_labels(labelmaps[static_cast<std::size_t>(t)], factor);
    }
    return pred;
}

void write_j_report(std::ostream& os, const std::string& name, const SequenceJ& j) {
    os << name << " J-mean " << j.mean;
    for (std::size_t k = 0; k < j.per_object.size(); ++k)
        os << " obj" << (k + 1) << " " << j.per_object[k];
    os << "\n";
}

int cmd_propagate(const std::string& checkpoint, const std::string& seq_dir,
                  const std::string& out_dir, bool no_compact, int window,
                  bool no_long_term) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const SequenceSource seq = load_sequence(seq_dir);

    PropagationOptions opts;
    opts.temperature = ck.live.temperature;
    opts.use_compact = !no_compact;
    opts.window_radius = window;

    const std::vector<LabelImage> pred =
        propagate_sequence(ck.live, seq, opts, !no_long_term);

    fs::create_directories(out_dir);
    const auto palette =
        seq.palette.empty() ? default_palette(std::max(2, seq.num_classes)) : seq.palette;
    char name[32];
    for (std::size_t t = 0; t < pred.size(); ++t) {
        std::snprintf(name, sizeof(name), "%05d.png", static_cast<int>(t));
        IndexedImage img;
        img.height = pred[t].height;
        img.width = pred[t].width;
        img.palette = palette;
        img.indices.resize(pred[t].ids.size());
        for (std::size_t i = 0; i < img.indices.size(); ++i)
            img.indices[i] = static_cast<std::uint8_t>(pred[t].ids[i]);
        write_png_indexed((fs::path(out_dir) / name).string(), img);
    }

    // J report when the sequence carries ground truth beyond frame 0.
    int with_gt = 0;
    for (std::size_t t = 1; t < seq.frames.size(); ++t) with_gt += seq.has_annotation[t];
    if (with_gt > 0) {
        std::vector<LabelImage> gt, pd;
        gt.push_back(seq.annotations[0]);
        pd.push_back(pred[0]);
        for (std::size_t t = 1; t < pred.size(); ++t) {
            if (!seq.has_annotation[t]) continue;
            gt.push_back(seq.annotations[t]);
            pd.push_back(pred[t]);
        }
        const SequenceJ j = sequence_j(pd, gt);
        write_j_report(std::cout, fs::path(seq_dir).filename().string(), j);
        std::ofstream report(fs::path(out_dir) / "j_report.txt");
        write_j_report(report, fs::path(seq_dir).filename().string(), j);
    }
    std::cout << "masks written to " << out_dir << "\n";
    return 0;
}

std::vector<LabelImage> load_mask_dir(const std::string& dir) {
    std::vector<LabelImage> masks;
    char name[32];
    for (int t = 0;; ++t) {
        std::snprintf(name, sizeof(name), "%05d.png", t);
        const fs::path p = fs::path(dir) / name;
        if (!fs::exists(p)) break;
        const IndexedImage img = read_png_indexed(p.string());
        LabelImage lab(img.height, img.width);
        for (std::size_t i = 0; i < img.indices.size(); ++i) lab.ids[i] = img.indices[i];
        masks.push_back(std::move(lab));
    }
    if (masks.empty()) throw IoError("no masks found under " + dir);
    return masks;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir) {
    const std::vector<LabelImage> pred = load_mask_dir(pred_dir);
    fs::path gt_path = fs::path(gt_dir);
    if (fs::is_directory(gt_path / "anno")) gt_path /= "anno";
    const std::vector<LabelImage> gt = load_mask_dir(gt_path.string());
    if (pred.size() != gt.size()) {
        throw FormatError("prediction/ground-truth frame counts differ (" +
                          std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) + ")");
    }
    const SequenceJ j = sequence_j(pred, gt);
    write_j_report(std::cout, fs::path(pred_dir).filename().string(), j);
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& axis,
               const std::vector<std::string>& overrides, int seeds,
               const std::string& out_override) {
    RunConfig base = load_config(config_path, overrides);
    if (!out_override.empty()) base.out_dir = out_override;

    struct Variant {
        std::string label;
        std::vector<std::string> sets;
    };
    std::vector<Variant> variants;
    if (axis == "inter") {
        variants = {{"intra-only", {"negatives=false"}},
                    {"inter+intra", {"negatives=true"}}};
    } else if (axis == "position") {
        variants = {{"w/o-pe", {"position=none"}},
                    {"2dspe", {"position=2dspe"}},
                    {"1dape", {"position=1dape"}},
                    {"2dape", {"position=2dape"}}};
    } else if (axis == "shift") {
        variants = {{"none", {"shift_mode=none"}},
                    {"shuffle", {"shift_mode=shuffle"}},
                    {"shift", {"shift_mode=shift"}}};
    } else if (axis == "compactness") {
        variants = {{"neither", {"compact_train=false", "compact_infer=false"}},
                    {"train-only", {"compact_train=true", "compact_infer=false"}},
                    {"infer-only", {"compact_train=false", "compact_infer=true"}},
                    {"train+infer", {"compact_train=true", "compact_infer=true"}}};
    } else {
        throw ConfigError("unknown ablation axis: " + axis +
                          " (expected inter|position|shift|compactness)");
    }

    fs::create_directories(base.out_dir);
    std::ofstream table(fs::path(base.out_dir) / ("ablate_" + axis + ".txt"));
    auto emit = [&](const std::string& line) {
        std::cout << line << "\n";
        table << line << "\n";
    };
    emit("# axis: " + axis + " (median over " + std::to_string(seeds) + " seeds)");
    emit("# variant  median_acc  median_J  delta_acc");

    double baseline = 0.0;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::vector<double> accs, js;
        for (int s = 0; s < seeds; ++s) {
            RunConfig cfg = base;
            apply_overrides(cfg, variants[v].sets);
            cfg.seed = base.seed + static_cast<std::uint64_t>(s);
            cfg.validate();
            Trainer trainer(cfg);
            trainer.run(nullptr);
            const ClipEval eval =
                evaluate_clips(trainer.params(), make_eval_clips(cfg), cfg);
            accs.push_back(eval.balanced_acc);
            js.push_back(eval.mean_j);
            std::cout << "  [" << variants[v].label << " seed " << cfg.seed << "] acc "
                      << eval.balanced_acc << " J " << eval.mean_j << "\n";
        }
        std::sort(accs.begin(), accs.end());
        std::sort(js.begin(), js.end());
        const double macc = accs[accs.size() / 2];
        const double mj = js[js.size() / 2];
        if (v == 0) baseline = macc;
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s %.4f  %.4f  %+.4f", variants[v].label.c_str(),
                      macc, mj, macc - baseline);
        emit(line);
    }
    return 0;
}

int cmd_render(const std::string& input, const std::string& out, int row, int grid_h,
               int grid_w) {
    const FloatGrid grid = read_float_grid(input);
    std::vector<double> values;
    int H = 0, W = 0;
    if (row >= 0) {
        if (row >= grid.rows) throw RangeError("render: row out of range");
        const std::int64_t cols = grid.cols * grid.channels;
        values.assign(grid.values.begin() + row * cols,
                      grid.values.begin() + (row + 1) * cols);
        // A dumped affinity row is an h x w heatmap; infer a square shape
        // unless the caller pins one.
        H = grid_h > 0 ? grid_h : static_cast<int>(std::lround(std::sqrt(static_cast<double>(cols))));
        W = grid_w > 0 ? grid_w : static_cast<int>(cols / std::max(1, H));
        if (static_cast<std::int64_t>(H) * W != cols) {
            throw ConfigError("render: cannot reshape row of " + std::to_string(cols) +
                              " values to " + std::to_string(H) + "x" + std::to_string(W) +
                              " (pass --height/--width)");
        }
    } else {
        values = grid.values;
        H = static_cast<int>(grid.rows);
        W = static_cast<int>(grid.cols * grid.channels);
    }
    double lo = values.empty() ? 0.0 : values[0], hi = lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    Frame img(H, W, ColorSpace::RGB);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double v = (values[static_cast<std::size_t>(y) * W + x] - lo) / span;
            img.at(y, x, 0) = v;
            img.at(y, x, 1) = v;
            img.at(y, x, 2) = v;
        }
    write_png_rgb(out, img);
    std::cout << "rendered " << out << " (" << H << "x" << W << ", data range [" << lo
              << ", " << hi << "])\n";
    return 0;
}

int cmd_gen_data(const std::string& scenario_name, const std::string& out_dir,
                 std::uint64_t seed, int clips, int frame_size, int frames,
                 int sprite_size) {
    const Scenario sc = scenario_from_string(scenario_name);
    GenOptions opts;
    opts.sprite_size = sprite_size;
    for (int i = 0; i < clips; ++i) {
        const SyntheticClip clip =
            generate_clip(sc, frame_size, frame_size, frames, seed + static_cast<std::uint64_t>(i), opts);
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%03d", scenario_name.c_str(), i);
        const std::string dir = (fs::path(out_dir) / name).string();
        export_clip(clip, dir);
        std::cout << "wrote " << dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LIIR desk-scale self-supervised correspondence toolkit"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a model on synthetic clips");
    std::string train_config, train_out;
    std::vector<std::string> train_sets;
    train->add_option("--config", train_config, "key=value config file");
    train->add_option("--set", train_sets, "config override key=value (repeatable)");
    train->add_option("--out", train_out, "output directory (overrides out_dir)");

    // propagate
    auto* prop = app.add_subcommand("propagate", "propagate first-frame labels over a sequence");
    std::string prop_ck, prop_seq, prop_out = "propagated";
    bool prop_no_compact = false, prop_no_long = false;
    int prop_window = 3;
    prop->add_option("--checkpoint", prop_ck, "model checkpoint")->required();
    prop->add_option("--seq", prop_seq, "sequence directory (frames/ + anno/00000.png)")->required();
    prop->add_option("--out", prop_out, "output mask directory");
    prop->add_flag("--no-compact", prop_no_compact, "disable the compactness filter");
    prop->add_flag("--no-long-term", prop_no_long, "drop the I0/I5 anchors from the schedule");
    prop->add_option("--window", prop_window, "affinity window radius (<0 disables)");

    // eval
    auto* eval = app.add_subcommand("eval", "region similarity between mask directories");
    std::string eval_pred, eval_gt;
    eval->add_option("--pred", eval_pred, "predicted mask directory")->required();
    eval->add_option("--gt", eval_gt, "ground-truth sequence or mask directory")->required();

    // ablate
    auto* abl = app.add_subcommand("ablate", "train/evaluate variants along one axis");
    std::string abl_config, abl_axis, abl_out;
    std::vector<std::string> abl_sets;
    int abl_seeds = 3;
    abl->add_option("--config", abl_config, "key=value config file");
    abl->add_option("--axis", abl_axis, "inter|position|shift|compactness")->required();
    abl->add_option("--set", abl_sets, "config override key=value (repeatable)");
    abl->add_option("--seeds", abl_seeds, "number of seeds (median reported)");
    abl->add_option("--out", abl_out, "output directory");

    // render
    auto* render = app.add_subcommand("render", "render a float-grid dump to PNG");
    std::string render_in, render_out = "render.png";
    int render_row = -1, render_h = 0, render_w = 0;
    render->add_option("--input", render_in, "liir-f64 grid file")->required();
    render->add_option("--out", render_out, "output PNG path");
    render->add_option("--row", render_row, "render one row as an h x w heatmap");
    render->add_option("--height", render_h, "row reshape height");
    render->add_option("--width", render_w, "row reshape width");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate synthetic clips (DAVIS-style layout)");
    std::string gen_scenario = "single_sprite", gen_out = "data";
    std::uint64_t gen_seed = 1;
    int gen_clips = 1, gen_size = 64, gen_frames = 20, gen_sprite = 16;
    gen->add_option("--scenario", gen_scenario, "single_sprite|twin_sprites|occlusion|fast_motion");
    gen->add_option("--out", gen_out, "output root directory");
    gen->add_option("--seed", gen_seed, "base seed");
    gen->add_option("--clips", gen_clips, "number of clips");
    gen->add_option("--frame-size", gen_size, "frame height/width");
    gen->add_option("--frames", gen_frames, "frames per clip");
    gen->add_option("--sprite-size", gen_sprite, "sprite side length");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(train_config, train_sets, train_out);
        if (*prop)
            return cmd_propagate(prop_ck, prop_seq, prop_out, prop_no_compact, prop_window,
                                 prop_no_long);
        if (*eval) return cmd_eval(eval_pred, eval_gt);
        if (*abl) return cmd_ablate(abl_config, abl_axis, abl_sets, abl_seeds, abl_out);
        if (*render) return cmd_render(render_in, render_out, render_row, render_h, render_w);
        if (*gen)
            return cmd_gen_data(gen_scenario, gen_out, gen_seed, gen_clips, gen_size,
                                gen_frames, gen_sprite);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
