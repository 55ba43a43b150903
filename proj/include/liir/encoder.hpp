#pragma once

#include <string>
#include <vector>

#include "liir/affinity.hpp"
#include "liir/image.hpp"
#include "liir/position.hpp"
#include "liir/tensor.hpp"

namespace liir {

// Desk-scale encoder: three conv stages with two stride-2 reductions, so the
// feature grid is 1/4 of the input in each dimension. The position map is
// injected after the first stage (1/2 resolution).
constexpr int kPosChannels = 16;   // c'
constexpr int kFeatChannels = 32;  // c

struct ConvLayerParams {
    int kh = 0, kw = 0, ci = 0, co = 0;
    int stride = 1, pad = 0;
    std::vector<double> weights;  // kh*kw*ci*co
    std::vector<double> bias;     // co
};

// Named view of a parameter array, used by the optimizer and EMA updates.
struct ParamRef {
    std::string name;
    std::vector<double>* data;
};

struct EncoderParams {
    ConvLayerParams conv1, conv2, conv3;
    PositionMap pos;
    double temperature = 0.07;
    int input_height = 0, input_width = 0;
    ColorSpace input_space = ColorSpace::Lab;  // colorspace frames are fed in

    GridShape feature_grid() const { return {input_height / 4, input_width / 4}; }
    std::vector<ParamRef> named_params();  // includes pos only when learnable
    std::vector<std::pair<std::string, const std::vector<double>*>> named_params() const;

    // ema <- beta*ema + (1-beta)*live, elementwise over all named params.
    void ema_from(const EncoderParams& live, double beta);
};

// Fresh encoder with He-style init; position storage depends on `kind`.
EncoderParams make_encoder(int input_height, int input_width, PositionKind kind,
                           std::uint64_t seed, double temperature = 0.07);

// Encoder placed on a tape. When trainable, conv weights and learnable
// position parameters are leaves whose gradients the optimizer reads back.
struct TapedEncoder {
    ad::Tape* tape = nullptr;
    ad::Var w1, b1, w2, b2, w3, b3;
    ad_ops::TapedPosition position;
    const EncoderParams* params = nullptr;

    // Frame -> (h*w, c) L2-normalized feature matrix. pos_override, when
    // given, replaces the position grid with fixed values (shifted maps);
    // overrides never carry gradients.
    ad::Var encode(const Frame& frame,
                   const std::vector<double>* pos_override = nullptr) const;

    // Leaf handles in named_params() order, for gradient collection.
    std::vector<std::pair<std::string, ad::Var>> param_leaves() const;
};

TapedEncoder put_encoder_on_tape(ad::Tape& tape, const EncoderParams& params,
                                 bool trainable);

// Forward-only convenience: encode on a private tape and return the values.
std::vector<double> encode_features(const EncoderParams& params, const Frame& frame,
                                    const std::vector<double>* pos_override = nullptr);

}  // namespace liir
