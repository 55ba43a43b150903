#pragma once

#include "liir/affinity.hpp"
#include "liir/image.hpp"
#include "liir/rng.hpp"
#include "liir/tensor.hpp"

namespace liir {

enum class BottleneckMode { ChannelDropout, Rgb2Gray, None };

BottleneckMode bottleneck_mode_from_string(const std::string& s);

// Input degradation preventing trivial color-copy solutions: channels are
// zeroed in the stated colorspace before encoding while the original frame
// stays the reconstruction target.
struct BottleneckSpec {
    ColorSpace colorspace = ColorSpace::Lab;
    BottleneckMode mode = BottleneckMode::ChannelDropout;
    int drop_count = 1;        // channels zeroed per sample, 0..2
    double probability = 1.0;  // chance the dropout fires at all

    void validate() const;
};

// One sampled realization, shared by the query and reference of a pair.
struct BottleneckDraw {
    bool active = false;
    std::vector<int> dropped_channels;
};

BottleneckDraw sample_bottleneck(const BottleneckSpec& spec, Rng& rng);
Frame apply_bottleneck(const Frame& frame, const BottleneckSpec& spec,
                       const BottleneckDraw& draw);
// Convenience overload sampling its own draw.
Frame apply_bottleneck(const Frame& frame, const BottleneckSpec& spec, Rng& rng);

// Copy-based reconstruction: out(i) = sum_j affinity(i,j) * reference(j),
// with the reference given at feature resolution as an (h*w, 3) constant.
// Sub-stochastic rows shrink the synthesized color accordingly.
ad::Var reconstruct(const AffinityMatrix& affinity, ad::Var reference_small);

// Frame-level convenience: area-downsamples the reference to the affinity's
// grid when needed and returns the reconstruction as a frame.
Frame reconstruct_frame(const AffinityMatrix& affinity, const Frame& reference);

// Downsampled frame as an (h*w, 3) constant on the given tape.
ad::Var frame_to_tape(ad::Tape& tape, const Frame& frame, GridShape grid);

// Root of the mean squared difference over all pixels and channels
// (mean-reduced so the value is resolution-independent).
ad::Var reconstruction_loss(ad::Var target, ad::Var reconstructed);
double reconstruction_loss(const Frame& target, const Frame& reconstructed);

}  // namespace liir
