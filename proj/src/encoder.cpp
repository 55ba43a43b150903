#include "liir/encoder.hpp"

#include <cmath>

namespace liir {

namespace {

ConvLayerParams make_conv(int kh, int kw, int ci, int co, int stride, int pad, Rng& rng) {
    ConvLayerParams layer;
    layer.kh = kh;
    layer.kw = kw;
    layer.ci = ci;
    layer.co = co;
    layer.stride = stride;
    layer.pad = pad;
    layer.weights.resize(static_cast<std::size_t>(kh) * kw * ci * co);
    const double std = std::sqrt(2.0 / (static_cast<double>(kh) * kw * ci));
    for (double& w : layer.weights) w = rng.normal(0.0, std);
    layer.bias.assign(static_cast<std::size_t>(co), 0.0);
    return layer;
}

}  // namespace

std::vector<ParamRef> EncoderParams::named_params() {
    std::vector<ParamRef> refs = {
        {"conv1.w", &conv1.weights}, {"conv1.b", &conv1.bias},
        {"conv2.w", &conv2.weights}, {"conv2.b", &conv2.bias},
        {"conv3.w", &conv3.weights}, {"conv3.b", &conv3.bias},
    };
    if (pos.learnable) {
        if (pos.kind == PositionKind::Ape1d) {
            refs.push_back({"pos.grid", &pos.grid});
        } else {
            refs.push_back({"pos.x", &pos.x_set});
            refs.push_back({"pos.y", &pos.y_set});
        }
    }
    return refs;
}

std::vector<std::pair<std::string, const std::vector<double>*>>
EncoderParams::named_params() const {
    auto refs = const_cast<EncoderParams*>(this)->named_params();
    std::vector<std::pair<std::string, const std::vector<double>*>> out;
    out.reserve(refs.size());
    for (const auto& r : refs) out.emplace_back(r.name, r.data);
    return out;
}

void EncoderParams::ema_from(const EncoderParams& live, double beta) {
    auto mine = named_params();
    auto theirs = live.named_params();
    if (mine.size() != theirs.size()) {
        throw ShapeError("ema_from: parameter sets differ");
    }
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].data->size() != theirs[i].second->size()) {
            throw ShapeError("ema_from: shape mismatch for " + mine[i].name);
        }
        auto& dst = *mine[i].data;
        const auto& src = *theirs[i].second;
        for (std::size_t j = 0; j < dst.size(); ++j)
            dst[j] = beta * dst[j] + (1.0 - beta) * src[j];
    }
}

EncoderParams make_encoder(int input_height, int input_width, PositionKind kind,
                           std::uint64_t seed, double temperature) {
    if (input_height % 4 != 0 || input_width % 4 != 0) {
        throw ConfigError("encoder input size must be divisible by 4");
    }
    Rng rng(seed);
    EncoderParams p;
    p.input_height = input_height;
    p.input_width = input_width;
    p.temperature = temperature;
    p.conv1 = make_conv(7, 7, 3, kPosChannels, 2, 3, rng);
    p.conv2 = make_conv(3, 3, kPosChannels, kFeatChannels, 2, 1, rng);
    p.conv3 = make_conv(3, 3, kFeatChannels, kFeatChannels, 1, 1, rng);
    const int hp = input_height / 2, wp = input_width / 2;
    p.pos = kind == PositionKind::Spe2d
                ? build_2dspe(hp, wp, kPosChannels)
                : build_learnable(kind, hp, wp, kPosChannels, rng.next_u64());
    return p;
}

ad::Var TapedEncoder::encode(const Frame& frame,
                             const std::vector<double>* pos_override) const {
    const EncoderParams& p = *params;
    if (frame.height != p.input_height || frame.width != p.input_width) {
        throw ShapeError("encode: frame " + std::to_string(frame.height) + "x" +
                         std::to_string(frame.width) + " does not match encoder input " +
                         std::to_string(p.input_height) + "x" +
                         std::to_string(p.input_width));
    }
    ad::Tape& t = *tape;
    ad::Var x = ad::constant(t, {frame.height, frame.width, 3}, frame.data);
    ad::Var h1 = ad::relu(ad::conv2d(x, w1, b1, p.conv1.stride, p.conv1.pad));
    ad::Var pos_grid =
        pos_override ? ad_ops::constant_grid(t, p.pos, *pos_override) : position.grid;
    if (pos_grid.shape() != h1.shape()) {
        throw ShapeError("encode: position map " + ad::shape_str(pos_grid.shape()) +
                         " does not match first-stage feature " +
                         ad::shape_str(h1.shape()));
    }
    ad::Var h1p = ad::add(h1, pos_grid);
    ad::Var h2 = ad::relu(ad::conv2d(h1p, w2, b2, p.conv2.stride, p.conv2.pad));
    ad::Var h3 = ad::conv2d(h2, w3, b3, p.conv3.stride, p.conv3.pad);
    const GridShape g = p.feature_grid();
    return ad::l2_normalize_rows(ad::reshape(h3, {g.cells(), kFeatChannels}));
}

std::vector<std::pair<std::string, ad::Var>> TapedEncoder::param_leaves() const {
    std::vector<std::pair<std::string, ad::Var>> leaves = {
        {"conv1.w", w1}, {"conv1.b", b1}, {"conv2.w", w2},
        {"conv2.b", b2}, {"conv3.w", w3}, {"conv3.b", b3},
    };
    if (params->pos.learnable) {
        if (params->pos.kind == PositionKind::Ape1d) {
            leaves.push_back({"pos.grid", position.params.at(0)});
        } else {
            leaves.push_back({"pos.x", position.params.at(0)});
            leaves.push_back({"pos.y", position.params.at(1)});
        }
    }
    return leaves;
}

TapedEncoder put_encoder_on_tape(ad::Tape& tape, const EncoderParams& params,
                                 bool trainable) {
    TapedEncoder e;
    e.tape = &tape;
    e.params = &params;
    auto conv_leaves = [&](const ConvLayerParams& c, ad::Var& w, ad::Var& b) {
        w = ad::leaf(tape, {c.kh, c.kw, c.ci, c.co}, c.weights, trainable);
        b = ad::leaf(tape, {c.co}, c.bias, trainable);
    };
    conv_leaves(params.conv1, e.w1, e.b1);
    conv_leaves(params.conv2, e.w2, e.b2);
    conv_leaves(params.conv3, e.w3, e.b3);
    e.position = ad_ops::put_on_tape(tape, params.pos, trainable);
    return e;
}

std::vector<double> encode_features(const EncoderParams& params, const Frame& frame,
                                    const std::vector<double>* pos_override) {
    ad::Tape tape;
    TapedEncoder enc = put_encoder_on_tape(tape, params, false);
    return enc.encode(frame, pos_override).values();
}

}  // namespace liir
