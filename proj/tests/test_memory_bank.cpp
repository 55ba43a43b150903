#include <doctest.h>

#include <cmath>

#include "liir/memory_bank.hpp"

using namespace liir;

namespace {

// A small encoder keeps the per-push EMA encodes cheap.
EncoderParams small_encoder() { return make_encoder(16, 16, PositionKind::Ape1d, 11); }

Frame noise_frame(int size, std::uint64_t seed) {
    Frame f(size, size, ColorSpace::Lab);
    Rng rng(seed);
    for (double& v : f.data) v = rng.uniform();
    return f;
}

}  // namespace

TEST_CASE("push before EMA initialization is a state error") {
    MemoryBank bank(4, 2, 0.999);
    Rng rng(1);
    const Frame f = noise_frame(16, 1);
    CHECK_THROWS_AS(bank.push(f, 0, rng), StateError);
}

TEST_CASE("FIFO eviction at capacity") {
    MemoryBank bank(3, 2, 0.999);
    bank.init_ema(small_encoder());
    Rng rng(5);
    for (int i = 0; i < 4; ++i) bank.push(noise_frame(16, 100 + i), i, rng);
    CHECK(bank.size() == 3);
    // Video 0 was evicted: excluding nothing still yields only videos 1..3.
    const NegativeSet negs = bank.gather_negatives(-1);
    for (int id : negs.source_ids) CHECK(id != 0);
    CHECK(negs.count() == 3 * 2);
}

TEST_CASE("gather excludes the query video and audits ids") {
    MemoryBank bank(8, 3, 0.999);
    bank.init_ema(small_encoder());
    Rng rng(6);
    for (int i = 0; i < 6; ++i) bank.push(noise_frame(16, 200 + i), i % 2, rng);

    const NegativeSet only_other = bank.gather_negatives(0);
    CHECK(only_other.count() == 3 * 3);
    for (int id : only_other.source_ids) CHECK(id != 0);

    // Bank holding only the current video yields an empty set.
    MemoryBank solo(4, 2, 0.999);
    solo.init_ema(small_encoder());
    for (int i = 0; i < 3; ++i) solo.push(noise_frame(16, 300 + i), 7, rng);
    CHECK(solo.gather_negatives(7).empty());
}

TEST_CASE("stored vectors are normalized snapshots that later pushes do not touch") {
    MemoryBank bank(4, 2, 0.999);
    bank.init_ema(small_encoder());
    Rng rng(7);
    bank.push(noise_frame(16, 400), 0, rng);
    const NegativeSet before = bank.gather_negatives(-1);
    for (int i = 0; i < 3; ++i) bank.push(noise_frame(16, 500 + i), 1 + i, rng);
    const NegativeSet after = bank.gather_negatives(1000);
    for (int k = 0; k < before.count(); ++k) {
        for (int c = 0; c < before.dim; ++c) {
            CHECK(before.features[static_cast<std::size_t>(k * before.dim + c)] ==
                  after.features[static_cast<std::size_t>(k * after.dim + c)]);
        }
    }
    // Vectors live in the post-normalization feature space.
    for (int k = 0; k < after.count(); ++k) {
        double norm = 0.0;
        for (int c = 0; c < after.dim; ++c) {
            const double v = after.features[static_cast<std::size_t>(k * after.dim + c)];
            norm += v * v;
        }
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("same seed samples the same feature points") {
    auto collect = [](std::uint64_t seed) {
        MemoryBank bank(2, 4, 0.999);
        bank.init_ema(small_encoder());
        Rng rng(seed);
        bank.push(noise_frame(16, 42), 0, rng);
        return bank.gather_negatives(-1).features;
    };
    CHECK(collect(9) == collect(9));
    CHECK(collect(9) != collect(10));
}

TEST_CASE("ema update arithmetic") {
    EncoderParams live = small_encoder();
    MemoryBank bank(2, 2, 1.0);
    EncoderParams zeros = live;
    for (auto& ref : zeros.named_params()) std::fill(ref.data->begin(), ref.data->end(), 0.0);

    // beta = 1: ema unchanged.
    bank.init_ema(zeros);
    bank.ema_update(live);
    for (const auto& [name, data] : bank.ema_params().named_params())
        for (double v : *data) CHECK(v == 0.0);

    // beta = 0: ema becomes live.
    MemoryBank bank0(2, 2, 0.0);
    bank0.init_ema(zeros);
    bank0.ema_update(live);
    CHECK(bank0.ema_params().conv1.weights == live.conv1.weights);

    // beta = 0.99 on a zero EMA against live value 1 gives 0.01.
    MemoryBank bank99(2, 2, 0.99);
    EncoderParams ones = live;
    for (auto& ref : ones.named_params()) std::fill(ref.data->begin(), ref.data->end(), 1.0);
    bank99.init_ema(zeros);
    bank99.ema_update(ones);
    for (double v : bank99.ema_params().conv1.bias)
        CHECK(v == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("ema converges geometrically to frozen live parameters") {
    EncoderParams live = small_encoder();
    MemoryBank bank(2, 2, 0.9);
    EncoderParams far = live;
    for (auto& ref : far.named_params())
        for (double& v : *ref.data) v += 1.0;
    bank.init_ema(far);

    auto distance = [&] {
        double d = 0.0;
        const auto ema = bank.ema_params().named_params();
        const auto target = live.named_params();
        for (std::size_t i = 0; i < ema.size(); ++i)
            for (std::size_t j = 0; j < ema[i].second->size(); ++j)
                d = std::max(d, std::fabs((*ema[i].second)[j] - (*target[i].data)[j]));
        return d;
    };
    double prev = distance();
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
    for (int it = 0; it < 5; ++it) {
        bank.ema_update(live);
        const double now = distance();
        CHECK(now == doctest::Approx(prev * 0.9).epsilon(1e-9));
        prev = now;
    }
}

TEST_CASE("paper-scale arithmetic: 1440 frames x 4 points gives 5760 negatives") {
    MemoryBank bank(1440, 4, 0.999);
    bank.init_ema(small_encoder());
    Rng rng(3);
    const Frame f = noise_frame(16, 77);
    for (int i = 0; i < 1440; ++i) bank.push(f, 1 + (i % 16), rng);
    CHECK(bank.size() == 1440);
    const NegativeSet negs = bank.gather_negatives(0);  // query video not in bank
    CHECK(negs.count() == 5760);
    // Desk-scale default: 90 frames x 4 points = 360 vectors.
    MemoryBank desk(90, 4, 0.999);
    desk.init_ema(small_encoder());
    for (int i = 0; i < 90; ++i) desk.push(f, 1, rng);
    CHECK(desk.gather_negatives(0).count() == 360);
}
