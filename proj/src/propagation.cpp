#include "liir/propagation.hpp"

#include <algorithm>
#include <set>

#include "liir/compactness.hpp"
#include "liir/encoder.hpp"

namespace liir {

LabelMap labelmap_from_image(const LabelImage& anno, int num_classes, int factor) {
    if (factor <= 0 || anno.height % factor != 0 || anno.width % factor != 0) {
        throw ShapeError("labelmap_from_image: size not divisible by factor");
    }
    if (num_classes < 2) throw ContractError("labelmap_from_image: need K >= 2");
    LabelMap out;
    out.h = anno.height / factor;
    out.w = anno.width / factor;
    out.classes = num_classes;
    out.dist.assign(static_cast<std::size_t>(out.h) * out.w * num_classes, 0.0);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (int y = 0; y < anno.height; ++y) {
        for (int x = 0; x < anno.width; ++x) {
            const int id = anno.at(y, x);
            if (id < 0 || id >= num_classes) {
                throw ContractError("labelmap_from_image: class id out of range");
            }
            const std::size_t cell =
                (static_cast<std::size_t>(y / factor) * out.w + x / factor) *
                static_cast<std::size_t>(num_classes);
            out.dist[cell + static_cast<std::size_t>(id)] += inv;
        }
    }
    return out;
}

LabelImage argmax_labels(const LabelMap& labels, int factor) {
    LabelImage out(labels.h * factor, labels.w * factor);
    for (int y = 0; y < labels.h; ++y) {
        for (int x = 0; x < labels.w; ++x) {
            int best = 0;
            double best_v = -1.0;
            for (int k = 0; k < labels.classes; ++k) {
                const double v = labels.at(y, x, k);
                if (v > best_v) {
                    best_v = v;
                    best = k;
                }
            }
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx)
                    out.at(y * factor + dy, x * factor + dx) = best;
        }
    }
    return out;
}

std::vector<int> reference_schedule(int t, bool long_term) {
    if (t < 1) throw ContractError("reference_schedule: t must be >= 1");
    std::set<int> refs;
    if (long_term) {
        refs.insert(0);
        refs.insert(5);
    }
    refs.insert(t - 5);
    refs.insert(t - 3);
    refs.insert(t - 1);
    std::vector<int> out;
    for (int r : refs)
        if (r >= 0 && r <= t - 1) out.push_back(r);
    if (out.empty()) out.push_back(0);
    return out;
}

LabelMap propagate_step(const std::vector<double>& query_features,
                        const std::vector<std::pair<const std::vector<double>*,
                                                    const LabelMap*>>& references,
                        GridShape grid, const PropagationOptions& opts) {
    if (references.empty()) {
        throw ContractError("propagate_step: need at least one reference");
    }
    const int hw = grid.cells();
    const int K = references.front().second->classes;

    LabelMap out;
    out.h = grid.h;
    out.w = grid.w;
    out.classes = K;
    out.dist.assign(static_cast<std::size_t>(hw) * static_cast<std::size_t>(K), 0.0);

    ad::Tape tape;
    ad::Var fq = ad::constant(tape, {hw, kFeatChannels}, query_features);
    for (const auto& [feats, labels] : references) {
        if (labels->classes != K || labels->h != grid.h || labels->w != grid.w) {
            throw ShapeError("propagate_step: reference label map shape mismatch");
        }
        ad::Var fr = ad::constant(tape, {hw, kFeatChannels}, *feats);
        AffinityMatrix a =
            intra_affinity(fq, fr, grid, opts.temperature, opts.window_radius);
        if (opts.use_compact) {
            a = filter_affinity(a, opts.compact_m, opts.compact_var_floor);
        }
        ad::Var lab = ad::constant(tape, {hw, K}, labels->dist);
        ad::Var prop = ad::matmul(a.mat, lab);
        const auto& pv = prop.values();
        for (std::size_t i = 0; i < out.dist.size(); ++i) out.dist[i] += pv[i];
    }
    // Mean over references, then per-pixel renormalization (sub-stochastic
    // compact rows and float drift both wash out here).
    for (int i = 0; i < hw; ++i) {
        double s = 0.0;
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(K);
        for (int k = 0; k < K; ++k) s += out.dist[base + static_cast<std::size_t>(k)];
        if (s <= 0.0) {
            // No mass reached this cell; fall back to background.
            out.dist[base] = 1.0;
            continue;
        }
        for (int k = 0; k < K; ++k) out.dist[base + static_cast<std::size_t>(k)] /= s;
    }
    return out;
}

}  // namespace liir
