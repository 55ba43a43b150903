#pragma once

#include <vector>

#include "liir/affinity.hpp"
#include "liir/image.hpp"

namespace liir {

// Per-pixel class distribution at feature resolution (K classes including
// background). One-hot at frame 0, soft afterwards.
struct LabelMap {
    int h = 0, w = 0, classes = 0;
    std::vector<double> dist;  // h*w*K, per-pixel sums 1

    double at(int y, int x, int k) const {
        return dist[(static_cast<std::size_t>(y) * w + x) * static_cast<std::size_t>(classes) +
                    static_cast<std::size_t>(k)];
    }
};

// Categorical annotation -> soft distribution at 1/factor resolution (area
// average of the one-hot channels).
LabelMap labelmap_from_image(const LabelImage& anno, int num_classes, int factor);

// Argmax labels, nearest-neighbor upsampled by `factor`.
LabelImage argmax_labels(const LabelMap& labels, int factor);

// Reference frame indices for time step t: {0, 5, t-5, t-3, t-1} clipped to
// [0, t-1], deduplicated, ascending. With long_term off the anchors 0 and 5
// are dropped (falling back to {0} when nothing else is valid).
std::vector<int> reference_schedule(int t, bool long_term = true);

struct PropagationOptions {
    double temperature = 0.07;
    int window_radius = 3;  // <0 disables the window
    bool use_compact = true;
    int compact_m = 2;
    double compact_var_floor = 0.5;
};

// One propagation step: mean over references of the (optionally compact-
// filtered) affinity-weighted reference labels, renormalized per pixel.
// Features are (h*w, c) L2-normalized value vectors.
LabelMap propagate_step(const std::vector<double>& query_features,
                        const std::vector<std::pair<const std::vector<double>*,
                                                    const LabelMap*>>& references,
                        GridShape grid, const PropagationOptions& opts);

}  // namespace liir
