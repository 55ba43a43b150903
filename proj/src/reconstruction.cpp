#include "liir/reconstruction.hpp"

#include <algorithm>
#include <cmath>

namespace liir {

BottleneckMode bottleneck_mode_from_string(const std::string& s) {
    if (s == "channel_dropout") return BottleneckMode::ChannelDropout;
    if (s == "rgb2gray") return BottleneckMode::Rgb2Gray;
    if (s == "none") return BottleneckMode::None;
    throw ConfigError("unknown bottleneck mode: " + s);
}

void BottleneckSpec::validate() const {
    if (drop_count < 0 || drop_count > 2) {
        throw ConfigError("bottleneck drop_count must be in {0,1,2}, got " +
                          std::to_string(drop_count));
    }
    if (probability < 0.0 || probability > 1.0) {
        throw ConfigError("bottleneck probability must be in [0,1]");
    }
}

BottleneckDraw sample_bottleneck(const BottleneckSpec& spec, Rng& rng) {
    spec.validate();
    BottleneckDraw draw;
    if (spec.mode == BottleneckMode::None || spec.drop_count == 0) return draw;
    if (spec.mode == BottleneckMode::Rgb2Gray) {
        draw.active = rng.uniform() < spec.probability;
        return draw;
    }
    draw.active = rng.uniform() < spec.probability;
    if (draw.active) {
        draw.dropped_channels = rng.sample_without_replacement(3, spec.drop_count);
    }
    return draw;
}

Frame apply_bottleneck(const Frame& frame, const BottleneckSpec& spec,
                       const BottleneckDraw& draw) {
    spec.validate();
    if (frame.space != spec.colorspace) {
        throw ContractError("apply_bottleneck: frame colorspace does not match spec");
    }
    if (!draw.active || spec.mode == BottleneckMode::None) return frame;
    Frame out = frame;
    if (spec.mode == BottleneckMode::Rgb2Gray) {
        // Luminance replicated over the three channels.
        for (std::size_t p = 0; p < out.pixels(); ++p) {
            const double y = 0.299 * out.data[p * 3] + 0.587 * out.data[p * 3 + 1] +
                             0.114 * out.data[p * 3 + 2];
            out.data[p * 3] = out.data[p * 3 + 1] = out.data[p * 3 + 2] = y;
        }
        return out;
    }
    for (int c : draw.dropped_channels) {
        for (std::size_t p = 0; p < out.pixels(); ++p)
            out.data[p * 3 + static_cast<std::size_t>(c)] = 0.0;
    }
    return out;
}

Frame apply_bottleneck(const Frame& frame, const BottleneckSpec& spec, Rng& rng) {
    return apply_bottleneck(frame, spec, sample_bottleneck(spec, rng));
}

ad::Var reconstruct(const AffinityMatrix& affinity, ad::Var reference_small) {
    if (reference_small.shape().size() != 2 ||
        reference_small.shape()[0] != affinity.mat.shape()[1]) {
        throw ShapeError("reconstruct: affinity columns " +
                         std::to_string(affinity.mat.shape()[1]) +
                         " != reference pixel count " +
                         ad::shape_str(reference_small.shape()));
    }
    return ad::matmul(affinity.mat, reference_small);
}

ad::Var frame_to_tape(ad::Tape& tape, const Frame& frame, GridShape grid) {
    const Frame* use = &frame;
    Frame small;
    if (frame.height != grid.h || frame.width != grid.w) {
        if (grid.h <= 0 || frame.height % grid.h != 0 || frame.width % grid.w != 0 ||
            frame.height / grid.h != frame.width / grid.w) {
            throw ShapeError("frame_to_tape: frame " + std::to_string(frame.height) + "x" +
                             std::to_string(frame.width) + " not an integer multiple of grid " +
                             std::to_string(grid.h) + "x" + std::to_string(grid.w));
        }
        small = downsample_area(frame, frame.height / grid.h);
        use = &small;
    }
    return ad::constant(tape, {grid.cells(), 3}, use->data);
}

Frame reconstruct_frame(const AffinityMatrix& affinity, const Frame& reference) {
    ad::Var ref = frame_to_tape(*affinity.mat.tape, reference, affinity.grid);
    ad::Var rec = reconstruct(affinity, ref);
    Frame out(affinity.grid.h, affinity.grid.w, reference.space);
    out.data = rec.values();
    return out;
}

ad::Var reconstruction_loss(ad::Var target, ad::Var reconstructed) {
    if (target.shape() != reconstructed.shape()) {
        throw ShapeError("reconstruction_loss: shape mismatch " +
                         ad::shape_str(target.shape()) + " vs " +
                         ad::shape_str(reconstructed.shape()));
    }
    ad::Var d = ad::sub(target, reconstructed);
    return ad::vsqrt(ad::mean(ad::mul(d, d)));
}

double reconstruction_loss(const Frame& target, const Frame& reconstructed) {
    if (target.height != reconstructed.height || target.width != reconstructed.width) {
        throw ShapeError("reconstruction_loss: frame sizes differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
        const double d = target.data[i] - reconstructed.data[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(target.data.size()));
}

}  // namespace liir
