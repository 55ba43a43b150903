#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liir/tensor.hpp"

namespace liir {

enum class AffinityKind { Intra, IntraInter, Compact };

struct GridShape {
    int h = 0;
    int w = 0;
    int cells() const { return h * w; }
};

// Feature points from other videos used as softmax-denominator negatives.
struct NegativeSet {
    int dim = 0;                   // feature dimension c
    std::vector<double> features;  // count x dim, row-major
    std::vector<int> source_ids;   // per-row source video id

    int count() const { return static_cast<int>(source_ids.size()); }
    bool empty() const { return source_ids.empty(); }
};

// Dense pairwise affinity between the query and reference feature grids.
// Intra rows are stochastic; IntraInter rows are sub-stochastic whenever
// negatives carry mass (the row remainder went to other videos).
struct AffinityMatrix {
    ad::Var mat;  // (h*w, h*w) on the caller's tape
    AffinityKind kind = AffinityKind::Intra;
    GridShape grid;
    std::vector<double> row_mass;  // snapshot of row sums at construction
};

// Support mask restricting row i to reference cells within Chebyshev
// distance `radius` of cell i's grid position.
std::vector<std::uint8_t> chebyshev_window_mask(GridShape grid, int radius);

// Row-stochastic affinity: softmax over temperature-scaled feature dot
// products against all reference cells (optionally window-restricted).
// fq, fr are (h*w, c) L2-normalized feature matrices on the same tape.
// window_radius < 0 disables the window.
AffinityMatrix intra_affinity(ad::Var fq, ad::Var fr, GridShape grid,
                              double temperature, int window_radius = -1);

// Affinity whose softmax denominator additionally ranges over negative
// feature points; only reference-cell columns are kept, so rows sum below 1
// in proportion to the mass captured by other videos.
AffinityMatrix intra_inter_affinity(ad::Var fq, ad::Var fr, const NegativeSet& negatives,
                                    GridShape grid, double temperature);

// Debug dump of all rows as a portable float grid for heatmap rendering.
void dump_affinity(const std::string& path, const AffinityMatrix& a);

}  // namespace liir
