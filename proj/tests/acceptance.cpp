// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// requested criteria pass. Criteria 6 and 7 train real models and dominate
// the runtime; `--criteria 1,2,3` restricts the run during development.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fd_check.hpp"
#include "liir/affinity.hpp"
#include "liir/compactness.hpp"
#include "liir/config.hpp"
#include "liir/data.hpp"
#include "liir/encoder.hpp"
#include "liir/metrics.hpp"
#include "liir/propagation.hpp"
#include "liir/reconstruction.hpp"
#include "liir/trainer.hpp"

using namespace liir;
using liir::testing::FdReport;
using liir::testing::PrimitiveCase;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::ostream&)> run;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool expect(std::ostream& os, bool ok, const std::string& what) {
    if (!ok) os << "      FAILED: " << what << "\n";
    return ok;
}

// ---------------------------------------------------------------- criterion 1
bool criterion_gradients(std::ostream& os) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    Rng rng(20240601);
    for (const PrimitiveCase& pc : liir::testing::primitive_fd_cases()) {
        double worst = 0.0;
        for (int it = 0; it < 100; ++it) {
            Rng sub = rng.fork(static_cast<std::uint64_t>(it) * 131071 + 7);
            worst = std::max(worst, pc.run(sub).max_rel_error);
        }
        os << "      " << pc.name << ": max rel err " << worst << "\n";
        ok &= expect(os, worst < 1e-6, pc.name + " exceeded 1e-6");
    }
    const double secs = elapsed_s(t0);
    os << "      runtime " << secs << " s\n";
    ok &= expect(os, secs < 60.0, "runtime exceeded 1 min");
    return ok;
}

// ---------------------------------------------------------------- criterion 2
bool criterion_equations(std::ostream& os) {
    bool ok = true;
    Rng rng(7);

    // Eq. 1 rows sum to 1 within 1e-9.
    ad::Tape tape;
    const GridShape grid{4, 4};
    std::vector<double> fq(16 * kFeatChannels), fr(16 * kFeatChannels);
    for (double& v : fq) v = rng.normal();
    for (double& v : fr) v = rng.normal();
    ad::Var q = ad::l2_normalize_rows(ad::constant(tape, {16, kFeatChannels}, fq));
    ad::Var r = ad::l2_normalize_rows(ad::constant(tape, {16, kFeatChannels}, fr));
    const AffinityMatrix a1 = intra_affinity(q, r, grid, 0.07);
    for (double s : a1.row_mass) ok &= expect(os, std::fabs(s - 1.0) < 1e-9, "Eq.1 row sum");

    // Eq. 4 with empty negatives equals Eq. 1 within 1e-12.
    const AffinityMatrix a4 = intra_inter_affinity(q, r, NegativeSet{}, grid, 0.07);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a1.mat.values().size(); ++i)
        max_diff = std::max(max_diff, std::fabs(a1.mat.values()[i] - a4.mat.values()[i]));
    os << "      empty-negatives max |A' - A| = " << max_diff << "\n";
    ok &= expect(os, max_diff < 1e-12, "Eq.4 with empty negatives != Eq.1");

    // Adding any negative strictly decreases every row sum.
    NegativeSet negs;
    negs.dim = kFeatChannels;
    negs.source_ids = {99};
    for (int c = 0; c < kFeatChannels; ++c) negs.features.push_back(rng.normal());
    double nn = 0.0;
    for (double v : negs.features) nn += v * v;
    for (double& v : negs.features) v /= std::sqrt(nn);
    const AffinityMatrix a4n = intra_inter_affinity(q, r, negs, grid, 0.07);
    for (std::size_t i = 0; i < a4.row_mass.size(); ++i)
        ok &= expect(os, a4n.row_mass[i] < a4.row_mass[i], "row sum not strictly decreased");

    // Eq. 2/5 reconstruction examples, exactly.
    {
        // identity affinity -> downsampled reference copy
        std::vector<double> eye(16 * 16, 0.0);
        for (int i = 0; i < 16; ++i) eye[static_cast<std::size_t>(i * 16 + i)] = 1.0;
        AffinityMatrix ida;
        ida.grid = grid;
        ida.kind = AffinityKind::Intra;
        ida.mat = ad::constant(tape, {16, 16}, eye);
        Frame ref(16, 16, ColorSpace::RGB);
        for (double& v : ref.data) v = rng.uniform();
        const Frame rec = reconstruct_frame(ida, ref);
        const Frame small = downsample_area(ref, 4);
        double d1 = 0.0;
        for (std::size_t i = 0; i < rec.data.size(); ++i)
            d1 = std::max(d1, std::fabs(rec.data[i] - small.data[i]));
        ok &= expect(os, d1 == 0.0, "identity-affinity copy not exact");

        // uniform affinity over constant reference -> that color
        AffinityMatrix uni;
        uni.grid = grid;
        uni.kind = AffinityKind::Intra;
        uni.mat = ad::constant(tape, {16, 16}, std::vector<double>(256, 1.0 / 16));
        Frame cref(4, 4, ColorSpace::RGB);
        for (std::size_t p = 0; p < cref.pixels(); ++p) {
            cref.data[p * 3] = 0.25;
            cref.data[p * 3 + 1] = 0.5;
            cref.data[p * 3 + 2] = 0.75;
        }
        const Frame crec = reconstruct_frame(uni, cref);
        bool exact = true;
        for (std::size_t p = 0; p < crec.pixels(); ++p)
            exact = exact && std::fabs(crec.data[p * 3] - 0.25) < 1e-12 &&
                    std::fabs(crec.data[p * 3 + 1] - 0.5) < 1e-12 &&
                    std::fabs(crec.data[p * 3 + 2] - 0.75) < 1e-12;
        ok &= expect(os, exact, "uniform-affinity convexity not exact");

        // half-mass rows -> half the constant color
        AffinityMatrix half;
        half.grid = grid;
        half.kind = AffinityKind::IntraInter;
        half.mat = ad::constant(tape, {16, 16}, std::vector<double>(256, 0.5 / 16));
        const Frame hrec = reconstruct_frame(half, cref);
        exact = true;
        for (std::size_t p = 0; p < hrec.pixels(); ++p)
            exact = exact && std::fabs(hrec.data[p * 3] - 0.125) < 1e-12 &&
                    std::fabs(hrec.data[p * 3 + 1] - 0.25) < 1e-12 &&
                    std::fabs(hrec.data[p * 3 + 2] - 0.375) < 1e-12;
        ok &= expect(os, exact, "sub-stochastic shrink not exact");
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 3
bool criterion_denominator_gradient(std::ostream& os) {
    ad::Tape tape;
    ad::Var intra_logits = ad::constant(tape, {2, 2}, {1.0, 0.2, 0.1, 0.9});
    ad::Var neg_logits = ad::leaf(tape, {2, 1}, {1.5, 1.2}, true);
    ad::Var full = ad::softmax_rows(ad::concat_cols(intra_logits, neg_logits));
    ad::Var a_prime = ad::slice_cols(full, 0, 2);
    ad::Var ref = ad::constant(tape, {2, 3}, {0.9, 0.1, 0.3, 0.2, 0.8, 0.5});
    ad::Var target = ad::constant(tape, {2, 3}, {0.8, 0.2, 0.4, 0.1, 0.7, 0.6});
    ad::Var loss = reconstruction_loss(target, ad::matmul(a_prime, ref));
    tape.backward(loss.id);
    const double g0 = std::fabs(neg_logits.grad()[0]);
    const double g1 = std::fabs(neg_logits.grad()[1]);
    os << "      dL_res/d(negative logit) = (" << neg_logits.grad()[0] << ", "
       << neg_logits.grad()[1] << ")\n";
    return expect(os, g0 > 1e-6 && g1 > 1e-6,
                  "no gradient reached the negative logits through the denominator");
}

// ---------------------------------------------------------------- criterion 4
bool criterion_position_shifting(std::ostream& os) {
    bool ok = true;
    const PositionMap p = build_learnable(PositionKind::Ape1d, 8, 8, 8, 5);

    auto cell = [](const PositionMap& m, int x, int y) {
        const std::vector<double> g = m.materialize();
        const std::size_t base =
            (static_cast<std::size_t>(y) * m.width + x) * static_cast<std::size_t>(m.channels);
        return std::vector<double>(g.begin() + static_cast<std::ptrdiff_t>(base),
                                   g.begin() + static_cast<std::ptrdiff_t>(base + m.channels));
    };
    auto multiset = [&](const PositionMap& m) {
        std::vector<std::vector<double>> cells;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) cells.push_back(cell(m, x, y));
        std::sort(cells.begin(), cells.end());
        return cells;
    };

    // Identity at (0,0), exact.
    ok &= expect(os, shift(p, 0, 0).grid == p.grid, "shift(0,0) != identity");

    // Multiset preservation, exact, for several shifts.
    Rng rng(3);
    const auto base_cells = multiset(p);
    for (int it = 0; it < 8; ++it) {
        const auto [dx, dy] = sample_shift(8, 8, rng);
        ok &= expect(os, multiset(shift(p, dx, dy)) == base_cells, "multiset not preserved");
    }

    // Adjacency preservation, exact.
    const PositionMap s = shift(p, 3, 5);
    for (int y = 1; y < 7 && ok; ++y)
        for (int x = 1; x < 7; ++x) {
            const int sx = (x - 3 + 8) % 8, sy = (y - 5 + 8) % 8;
            ok &= cell(s, x, y) == cell(p, sx, sy);
            ok &= cell(s, x + 1, y) == cell(p, (sx + 1) % 8, sy);
            ok &= cell(s, x, y + 1) == cell(p, sx, (sy + 1) % 8);
        }
    ok = expect(os, ok, "adjacency broken by shift");

    // Zero gradient into shifted learnable maps, exact: the gradient of the
    // learnable parameters is unchanged whether the shifted-map branch of
    // the loss is differentiable or severed.
    {
        ad::Tape tape;
        const ad_ops::TapedPosition taped = ad_ops::put_on_tape(tape, p, true);
        const PositionMap shifted = shift(p, 2, 6);
        ad::Var shifted_const = ad_ops::constant_grid(tape, p, shifted.grid);
        ad::Var loss =
            ad::add(ad::mean(ad::mul(taped.grid, taped.grid)), ad::mean(shifted_const));
        tape.backward(loss.id);
        const std::vector<double> g = taped.params.at(0).grad();
        ad::Tape tape2;
        const ad_ops::TapedPosition taped2 = ad_ops::put_on_tape(tape2, p, true);
        ad::Var loss2 = ad::mean(ad::mul(taped2.grid, taped2.grid));
        tape2.backward(loss2.id);
        ok &= expect(os, g == taped2.params.at(0).grad(),
                     "shifted map leaked gradient into learnable parameters");
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 5
bool criterion_compactness(std::ostream& os) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;

    // Fit oracle: point mass.
    {
        Heatmap heat;
        heat.h = heat.w = 8;
        heat.values.assign(64, 0.0);
        heat.values[5 * 8 + 3] = 1.0;
        const GaussianMixture2D mix = fit_mixture(heat, 2);
        ok &= expect(os,
                     mix.components.size() == 1 && mix.components[0].mu_x == 3 &&
                         mix.components[0].mu_y == 5 &&
                         std::fabs(mix.components[0].weight - 1.0) < 1e-9 &&
                         mix.components[0].var_x == 0.5 && mix.components[0].var_y == 0.5,
                     "point-mass fit oracle");
    }
    // Fit oracle: two equal deltas.
    {
        Heatmap heat;
        heat.h = heat.w = 8;
        heat.values.assign(64, 0.0);
        heat.values[0] = 0.5;
        heat.values[63] = 0.5;
        const GaussianMixture2D mix = fit_mixture(heat, 2);
        ok &= expect(os,
                     mix.components.size() == 2 && mix.components[0].mu_x == 0 &&
                         mix.components[0].mu_y == 0 && mix.components[1].mu_x == 7 &&
                         mix.components[1].mu_y == 7 &&
                         std::fabs(mix.components[0].weight - 0.5) < 1e-9 &&
                         std::fabs(mix.components[1].weight - 0.5) < 1e-9,
                     "two-delta fit oracle");
    }
    // Fit oracle: plateau variance 2/3 (center tilted above the tie so the
    // argmax is unambiguous).
    {
        Heatmap heat;
        heat.h = heat.w = 5;
        heat.values.assign(25, 0.0);
        for (int y = 1; y <= 3; ++y)
            for (int x = 1; x <= 3; ++x) heat.values[static_cast<std::size_t>(y * 5 + x)] = 1.0 / 9.0;
        heat.values[2 * 5 + 2] += 1e-12;
        const GaussianMixture2D mix = fit_mixture(heat, 1);
        ok &= expect(os,
                     mix.components[0].mu_x == 2 && mix.components[0].mu_y == 2 &&
                         std::fabs(mix.components[0].var_x - 2.0 / 3.0) < 1e-9 &&
                         std::fabs(mix.components[0].var_y - 2.0 / 3.0) < 1e-9,
                     "plateau variance oracle");
    }
    // Evaluate oracle: floored Gaussian concentrates 99% in 5x5.
    {
        GaussianMixture2D mix;
        mix.components.push_back({1.0, 6.0, 6.0, 0.5, 0.5});
        const Heatmap heat = compact_heatmap(mix, 13, 13);
        double inside = 0.0, total = 0.0;
        for (int y = 0; y < 13; ++y)
            for (int x = 0; x < 13; ++x) {
                total += heat.at(y, x);
                if (std::abs(x - 6) <= 2 && std::abs(y - 6) <= 2) inside += heat.at(y, x);
            }
        ok &= expect(os, std::fabs(total - 1.0) < 1e-9, "compact heatmap not normalized");
        ok &= expect(os, inside >= 0.99, "floored Gaussian not concentrated");
    }
    // Outlier elimination on the constructed row.
    {
        std::vector<double> row(256, 0.0);
        row[3 * 16 + 3] = 0.40;
        row[3 * 16 + 4] = 0.30;
        row[4 * 16 + 3] = 0.15;
        row[4 * 16 + 4] = 0.10;
        row[14 * 16 + 14] = 0.05;
        const std::vector<double> filtered = compact_row(row.data(), {16, 16}, 2, 0.5);
        os << "      outlier mass after filtering: " << filtered[14 * 16 + 14] << "\n";
        ok &= expect(os, filtered[14 * 16 + 14] < 0.01, "outlier not eliminated");
    }
    // Mass concentration on 1000 random fitted rows: 32x32 heatmaps with one
    // or two cell-centered clusters of comparable peak height plus a
    // vanishing uniform floor, the shape of converged affinity rows.
    {
        Rng rng(4242);
        const int h = 32, w = 32;
        const int top = (h * w + 19) / 20;
        double worst = 1.0;
        for (int it = 0; it < 1000; ++it) {
            std::vector<double> row(static_cast<std::size_t>(h) * w, 1e-7);
            int blobs = rng.uniform_int(1, 2);
            const int cx0 = rng.uniform_int(4, w - 5), cy0 = rng.uniform_int(4, h - 5);
            for (int b = 0; b < blobs; ++b) {
                int cx = cx0, cy = cy0;
                if (b == 1) {
                    int guard = 0;
                    do {
                        cx = rng.uniform_int(4, w - 5);
                        cy = rng.uniform_int(4, h - 5);
                    } while (std::hypot(static_cast<double>(cx - cx0),
                                        static_cast<double>(cy - cy0)) < 10.0 &&
                             ++guard < 200);
                }
                const double var = rng.uniform(0.5, 1.0);
                const double peak = b == 0 ? 1.0 : rng.uniform(0.85, 1.0);
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x) {
                        const double jitter =
                            (x == cx && y == cy) ? 1.0 : rng.uniform(0.9, 1.0);
                        row[static_cast<std::size_t>(y) * w + x] +=
                            peak * jitter *
                            std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * var));
                    }
            }
            double sum = 0.0;
            for (double v : row) sum += v;
            for (double& v : row) v /= sum;
            std::vector<double> compact = compact_row(row.data(), {h, w}, 2, 0.5);
            std::sort(compact.begin(), compact.end(), std::greater<>());
            double head = 0.0;
            for (int k = 0; k < top; ++k) head += compact[static_cast<std::size_t>(k)];
            worst = std::min(worst, head);
        }
        os << "      min top-5% mass over 1000 rows: " << worst << "\n";
        ok &= expect(os, worst >= 0.90, "mass concentration below 90%");
    }
    const double secs = elapsed_s(t0);
    os << "      runtime " << secs << " s\n";
    ok &= expect(os, secs < 60.0, "runtime exceeded 1 min");
    return ok;
}

// ---------------------------------------------------------------- criterion 6
// Regression thresholds frozen from baseline runs of this implementation:
// trained single-sprite models reach ~0.95 class-balanced accuracy on 10
// held-out clips while randomly initialized encoders sit near 0.5.
constexpr double kTrainedAccThreshold = 0.90;
constexpr double kRandomAccThreshold = 0.55;

RunConfig desk_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.scenarios = {Scenario::SingleSprite};
    cfg.train_clips = 8;
    cfg.eval_clips = 10;
    cfg.frame_size = 64;
    cfg.clip_frames = 20;
    cfg.warmup_epochs = 6;
    cfg.inter_epochs = 3;
    cfg.batch_size = 4;
    return cfg;
}

bool criterion_end_to_end(std::ostream& os) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = desk_config(1);

    const std::vector<SyntheticClip> holdout = make_eval_clips(cfg);
    const EncoderParams random_init = encoder_from_config(cfg);
    const ClipEval random_eval = evaluate_clips(random_init, holdout, cfg);
    os << "      random-init balanced accuracy: " << random_eval.balanced_acc << "\n";

    Trainer trainer(cfg);
    trainer.run(nullptr);
    const ClipEval trained_eval = evaluate_clips(trainer.params(), holdout, cfg);
    os << "      trained balanced accuracy:     " << trained_eval.balanced_acc
       << " (mean J " << trained_eval.mean_j << ")\n";
    os << "      runtime " << elapsed_s(t0) << " s\n";

    bool ok = true;
    ok &= expect(os, trained_eval.balanced_acc >= kTrainedAccThreshold,
                 "trained accuracy below 0.90");
    ok &= expect(os, random_eval.balanced_acc <= kRandomAccThreshold,
                 "random-init accuracy above 0.55");
    return ok;
}

// ---------------------------------------------------------------- criterion 7
bool criterion_ablations(std::ostream& os) {
    const auto t0 = std::chrono::steady_clock::now();
    const int seeds = 3;

    auto run_variant = [&](const std::vector<std::string>& sets) {
        std::vector<double> accs;
        for (int s = 0; s < seeds; ++s) {
            RunConfig cfg = desk_config(100 + static_cast<std::uint64_t>(s));
            cfg.scenarios = {Scenario::TwinSprites};
            apply_overrides(cfg, sets);
            cfg.validate();
            Trainer trainer(cfg);
            trainer.run(nullptr);
            accs.push_back(
                evaluate_clips(trainer.params(), make_eval_clips(cfg), cfg).balanced_acc);
        }
        std::sort(accs.begin(), accs.end());
        return accs[static_cast<std::size_t>(seeds / 2)];
    };

    bool ok = true;
    // (a) inter+intra > intra-only, strict.
    const double intra_only = run_variant({"negatives=false"});
    const double inter = run_variant({"negatives=true"});
    os << "      (a) intra-only " << intra_only << "  vs  inter+intra " << inter << "\n";
    ok &= expect(os, inter > intra_only, "(a) inter+intra not strictly better");

    // (b) shift >= shuffle >= none.
    const double shift_none = run_variant({"shift_mode=none"});
    const double shift_shuffle = run_variant({"shift_mode=shuffle"});
    const double shift_shift = run_variant({"shift_mode=shift"});
    os << "      (b) none " << shift_none << "  shuffle " << shift_shuffle << "  shift "
       << shift_shift << "\n";
    ok &= expect(os, shift_shift >= shift_shuffle && shift_shuffle >= shift_none,
                 "(b) shift ordering violated");

    // (c) train+infer >= train-only >= neither.
    const double comp_neither = run_variant({"compact_train=false", "compact_infer=false"});
    const double comp_train = run_variant({"compact_train=true", "compact_infer=false"});
    const double comp_both = run_variant({"compact_train=true", "compact_infer=true"});
    os << "      (c) neither " << comp_neither << "  train-only " << comp_train
       << "  train+infer " << comp_both << "\n";
    ok &= expect(os, comp_both >= comp_train && comp_train >= comp_neither,
                 "(c) compactness ordering violated");

    const double secs = elapsed_s(t0);
    os << "      runtime " << secs << " s\n";
    ok &= expect(os, secs < 5400.0, "runtime exceeded 90 min");
    return ok;
}

// ---------------------------------------------------------------- criterion 8
bool criterion_schedule_and_metrics(std::ostream& os) {
    bool ok = true;
    ok &= expect(os, reference_schedule(1) == std::vector<int>{0}, "schedule t=1");
    ok &= expect(os, reference_schedule(4) == std::vector<int>{0, 1, 3}, "schedule t=4");
    ok &= expect(os, reference_schedule(20) == std::vector<int>{0, 5, 15, 17, 19},
                 "schedule t=20");

    // J arithmetic oracles.
    auto box = [](int h, int w, int x0, int y0, int x1, int y1, int id) {
        LabelImage m(h, w);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) m.at(y, x) = id;
        return m;
    };
    const LabelImage gt = box(16, 16, 0, 0, 8, 8, 1);
    ok &= expect(os, region_similarity_j(gt, gt).iou.at(0) == 1.0, "J of identical masks");
    ok &= expect(os,
                 region_similarity_j(box(16, 16, 8, 8, 16, 16, 1), gt).iou.at(0) == 0.0,
                 "J of disjoint masks");
    ok &= expect(os,
                 std::fabs(region_similarity_j(box(16, 16, 4, 0, 12, 8, 1), gt).iou.at(0) -
                           1.0 / 3.0) < 1e-12,
                 "J of half-overlapping squares");

    // PCK arithmetic oracle.
    KeypointSet kgt;
    kgt.bbox_w = 100;
    kgt.bbox_h = 50;
    kgt.points = {{0, 10, 10}, {1, 40, 20}};
    KeypointSet pred;
    pred.points = {{0, 19, 10}, {1, 51, 20}};
    ok &= expect(os, pck(kgt, kgt, 0.05) == 1.0, "PCK of identical sets");
    ok &= expect(os, std::fabs(pck(pred, kgt, 0.1) - 0.5) < 1e-12, "PCK 9px/11px split");
    KeypointSet far;
    far.points = {{0, 90, 45}, {1, 0, 0}};
    ok &= expect(os, pck(far, kgt, 0.1) == 0.0, "PCK all-miss");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strncmp(argv[i], "--criteria", 10) == 0) {
            const char* list = std::strchr(argv[i], '=');
            std::string arg = list ? list + 1 : (i + 1 < argc ? argv[++i] : "");
            std::istringstream is(arg);
            std::string tok;
            while (std::getline(is, tok, ',')) {
                if (!tok.empty()) selected.insert(std::stoi(tok));
            }
        }
    }

    std::vector<Criterion> criteria = {
        {1, "gradient soundness (finite differences)", criterion_gradients},
        {2, "equation fidelity (Eq. 1/2/4/5)", criterion_equations},
        {3, "gradient through the denominator", criterion_denominator_gradient},
        {4, "position shifting", criterion_position_shifting},
        {5, "compactness prior", criterion_compactness},
        {6, "end-to-end learning vs random init", criterion_end_to_end},
        {7, "ablation directions over 3 seeds", criterion_ablations},
        {8, "schedule and metric correctness", criterion_schedule_and_metrics},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << "      exception: " << e.what() << "\n";
        }
        std::cout << "[" << (ok ? "PASS" : "FAIL") << "] criterion " << c.id << ": "
                  << c.name << "\n"
                  << detail.str();
        std::cout.flush();
        failures += !ok;
    }
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
