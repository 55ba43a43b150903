#pragma once

#include <string>
#include <vector>

#include "liir/errors.hpp"
#include "liir/rng.hpp"
#include "liir/tensor.hpp"

namespace liir {

enum class PositionKind { Spe2d, Ape1d, Ape2d };

PositionKind position_kind_from_string(const std::string& s);
std::string to_string(PositionKind k);

// Position encoding grid injected after the encoder's first layer.
//
// Storage depends on the kind:
//   Spe2d  - fixed sinusoid values, not learnable.
//   Ape1d  - the full h' x w' x c' grid is a free parameter.
//   Ape2d  - two parameter sets, X (w' x c'/2) and Y (h' x c'/2); the grid at
//            (x, y) is the concatenation of X(x,:) and Y(y,:).
struct PositionMap {
    PositionKind kind = PositionKind::Ape1d;
    bool learnable = false;
    int height = 0;  // h'
    int width = 0;   // w'
    int channels = 0;  // c'

    std::vector<double> grid;   // materialized h'*w'*c' (Spe2d, Ape1d)
    std::vector<double> x_set;  // Ape2d: w' * c'/2
    std::vector<double> y_set;  // Ape2d: h' * c'/2

    // Dense h'*w'*c' view, materializing Ape2d from its two parameter sets.
    std::vector<double> materialize() const;

    std::int64_t parameter_count() const;
};

// Sinusoidal encoding: horizontal positions fill the first half of the
// channels, vertical positions the second half, with frequency base 1e-4.
// Channel count must be divisible by 4.
PositionMap build_2dspe(int height, int width, int channels);

// Learnable encodings initialized from N(0, 0.02^2).
PositionMap build_learnable(PositionKind kind, int height, int width, int channels,
                            std::uint64_t seed);

// Circular shift of the materialized grid: out(x,y,:) = in((x-dx) mod w',
// (y-dy) mod h', :). The result carries values only (gradient-frozen);
// requires 0 <= dx < w' and 0 <= dy < h'.
PositionMap shift(const PositionMap& pos, int dx, int dy);

// Ablation baseline: random permutation of the per-cell vectors. Preserves
// the multiset of vectors but not spatial adjacency.
PositionMap shuffle(const PositionMap& pos, Rng& rng);

// Uniform shift step: dx in [0, width), dy in [0, height).
std::pair<int, int> sample_shift(int height, int width, Rng& rng);

namespace ad_ops {

// Puts the position map on a tape for the training path. For learnable kinds
// the returned Var depends on leaf parameter nodes (also returned so the
// optimizer can read their gradients); for Spe2d it is a constant.
struct TapedPosition {
    ad::Var grid;                 // (h'*w', c') ready to add to features
    std::vector<ad::Var> params;  // leaves: {grid} or {x_set, y_set} or empty
};

TapedPosition put_on_tape(ad::Tape& tape, const PositionMap& pos, bool trainable);

// Constant node holding explicit values (used for shifted maps).
ad::Var constant_grid(ad::Tape& tape, const PositionMap& shape_like,
                      const std::vector<double>& values);

}  // namespace ad_ops

}  // namespace liir
