#include "liir/affinity.hpp"

#include <algorithm>
#include <cmath>

#include "liir/grid_io.hpp"

namespace liir {

namespace {

void check_features(const ad::Var& f, GridShape grid, const char* name) {
    if (f.shape().size() != 2 || f.shape()[0] != grid.cells()) {
        throw ShapeError(std::string(name) + ": expected (" +
                         std::to_string(grid.cells()) + ", c) features, got " +
                         ad::shape_str(f.shape()));
    }
}

std::vector<double> row_sums(const ad::Var& m) {
    const std::int64_t n = m.shape()[0], c = m.shape()[1];
    std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
    const auto& v = m.values();
    for (std::int64_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t j = 0; j < c; ++j) s += v[static_cast<std::size_t>(i * c + j)];
        sums[static_cast<std::size_t>(i)] = s;
    }
    return sums;
}

}  // namespace

std::vector<std::uint8_t> chebyshev_window_mask(GridShape grid, int radius) {
    const int n = grid.cells();
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    for (int qy = 0; qy < grid.h; ++qy) {
        for (int qx = 0; qx < grid.w; ++qx) {
            const std::size_t row =
                static_cast<std::size_t>(qy * grid.w + qx) * static_cast<std::size_t>(n);
            const int y0 = std::max(0, qy - radius), y1 = std::min(grid.h - 1, qy + radius);
            const int x0 = std::max(0, qx - radius), x1 = std::min(grid.w - 1, qx + radius);
            for (int ry = y0; ry <= y1; ++ry)
                for (int rx = x0; rx <= x1; ++rx)
                    mask[row + static_cast<std::size_t>(ry * grid.w + rx)] = 1;
        }
    }
    return mask;
}

AffinityMatrix intra_affinity(ad::Var fq, ad::Var fr, GridShape grid,
                              double temperature, int window_radius) {
    check_features(fq, grid, "intra_affinity(query)");
    check_features(fr, grid, "intra_affinity(reference)");
    if (fq.shape()[1] != fr.shape()[1]) {
        throw ShapeError("intra_affinity: feature dims differ, " +
                         ad::shape_str(fq.shape()) + " vs " + ad::shape_str(fr.shape()));
    }
    ad::Var logits = ad::scale(ad::matmul(fq, ad::transpose(fr)), 1.0 / temperature);
    ad::Var a = window_radius >= 0
                    ? ad::softmax_rows(logits, chebyshev_window_mask(grid, window_radius))
                    : ad::softmax_rows(logits);
    AffinityMatrix out;
    out.mat = a;
    out.kind = AffinityKind::Intra;
    out.grid = grid;
    out.row_mass = row_sums(a);
    return out;
}

AffinityMatrix intra_inter_affinity(ad::Var fq, ad::Var fr, const NegativeSet& negatives,
                                    GridShape grid, double temperature) {
    check_features(fq, grid, "intra_inter_affinity(query)");
    check_features(fr, grid, "intra_inter_affinity(reference)");
    if (fq.shape()[1] != fr.shape()[1]) {
        throw ShapeError("intra_inter_affinity: feature dims differ");
    }
    const std::int64_t hw = grid.cells();
    const std::int64_t c = fq.shape()[1];

    ad::Var logits_intra = ad::scale(ad::matmul(fq, ad::transpose(fr)), 1.0 / temperature);

    AffinityMatrix out;
    out.kind = AffinityKind::IntraInter;
    out.grid = grid;
    if (negatives.empty()) {
        // Eq. 4 degenerates exactly to Eq. 1: same softmax, full row mass.
        out.mat = ad::softmax_rows(logits_intra);
        out.row_mass = row_sums(out.mat);
        return out;
    }
    if (negatives.dim != c) {
        throw ShapeError("intra_inter_affinity: negative dim " +
                         std::to_string(negatives.dim) + " != feature dim " +
                         std::to_string(c));
    }
    ad::Tape& tape = *fq.tape;
    ad::Var negs = ad::constant(tape, {negatives.count(), c}, negatives.features);
    ad::Var logits_neg = ad::scale(ad::matmul(fq, ad::transpose(negs)), 1.0 / temperature);
    // Softmax over the union of intra and inter logits keeps log-sum-exp
    // stabilization across both term groups; keeping only the reference
    // columns leaves rows sub-stochastic.
    ad::Var full = ad::softmax_rows(ad::concat_cols(logits_intra, logits_neg));
    out.mat = ad::slice_cols(full, 0, static_cast<int>(hw));
    out.row_mass = row_sums(out.mat);
    return out;
}

void dump_affinity(const std::string& path, const AffinityMatrix& a) {
    FloatGrid grid;
    grid.rows = a.mat.shape()[0];
    grid.cols = a.mat.shape()[1];
    grid.channels = 1;
    grid.values = a.mat.values();
    write_float_grid(path, grid);
}

}  // namespace liir
