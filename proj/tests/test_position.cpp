#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "liir/position.hpp"

using namespace liir;

namespace {

std::vector<double> cell_vector(const PositionMap& p, int x, int y) {
    const std::vector<double> g = p.materialize();
    const std::size_t base =
        (static_cast<std::size_t>(y) * p.width + x) * static_cast<std::size_t>(p.channels);
    return {g.begin() + static_cast<std::ptrdiff_t>(base),
            g.begin() + static_cast<std::ptrdiff_t>(base + p.channels)};
}

// Sorted multiset of per-cell vectors, the oracle for shift/shuffle
// mass-preservation checks.
std::vector<std::vector<double>> sorted_cells(const PositionMap& p) {
    std::vector<std::vector<double>> cells;
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) cells.push_back(cell_vector(p, x, y));
    std::sort(cells.begin(), cells.end());
    return cells;
}

}  // namespace

TEST_CASE("2dspe fixed values at the origin rows") {
    const PositionMap p = build_2dspe(6, 5, 16);
    for (int y = 0; y < p.height; ++y) {
        CHECK(cell_vector(p, 0, y)[0] == 0.0);  // sin(0)
        CHECK(cell_vector(p, 0, y)[1] == 1.0);  // cos(0)
    }
    for (int x = 0; x < p.width; ++x) {
        CHECK(cell_vector(p, x, 0)[8] == 0.0);  // y-half sin(0) at channel c'/2
    }
}

TEST_CASE("2dspe frequency formula at a sample cell") {
    // channel 2 = sin(x * eps^(4u/c')) with u=1, c'=16: sin(3 * 1e-4^(1/4)).
    const PositionMap p = build_2dspe(4, 6, 16);
    const double expected = std::sin(3.0 * std::pow(1e-4, 0.25));
    CHECK(cell_vector(p, 3, 0)[2] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.29552).epsilon(1e-4));
}

TEST_CASE("2dspe bounds and channel divisibility") {
    const PositionMap p = build_2dspe(8, 8, 16);
    for (double v : p.grid) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(build_2dspe(8, 8, 6), ConfigError);
}

TEST_CASE("learnable parameter counts and determinism") {
    const PositionMap p1 = build_learnable(PositionKind::Ape1d, 8, 8, 16, 5);
    CHECK(p1.parameter_count() == 1024);
    const PositionMap p2 = build_learnable(PositionKind::Ape2d, 8, 8, 16, 5);
    CHECK(p2.parameter_count() == 128);  // (8+8) * 8

    const PositionMap q1 = build_learnable(PositionKind::Ape1d, 8, 8, 16, 5);
    CHECK(p1.grid == q1.grid);
    const PositionMap q2 = build_learnable(PositionKind::Ape1d, 8, 8, 16, 6);
    CHECK(p1.grid != q2.grid);
}

TEST_CASE("shift identity, circularity, and range checks") {
    const PositionMap p = build_learnable(PositionKind::Ape1d, 6, 8, 8, 3);
    const PositionMap same = shift(p, 0, 0);
    CHECK(same.grid == p.grid);

    CHECK_THROWS_AS(shift(p, 8, 0), RangeError);
    CHECK_THROWS_AS(shift(p, 0, -1), RangeError);

    const int dx = 3, dy = 2;
    const PositionMap once = shift(p, dx, dy);
    const PositionMap back = shift(once, p.width - dx, p.height - dy);
    CHECK(back.grid == p.grid);
}

TEST_CASE("shift preserves the multiset of cell vectors") {
    Rng rng(17);
    const PositionMap p = build_learnable(PositionKind::Ape1d, 7, 5, 8, 21);
    for (int it = 0; it < 5; ++it) {
        const auto [dx, dy] = sample_shift(p.height, p.width, rng);
        const PositionMap s = shift(p, dx, dy);
        CHECK(sorted_cells(s) == sorted_cells(p));
    }
}

TEST_CASE("shift preserves adjacency, shuffle does not") {
    const PositionMap p = build_learnable(PositionKind::Ape1d, 8, 8, 4, 9);
    const int dx = 3, dy = 5;
    const PositionMap s = shift(p, dx, dy);
    // Non-boundary cells: the 4-neighborhood maps together under the shift.
    for (int y = 1; y < 7; ++y) {
        for (int x = 1; x < 7; ++x) {
            const int sx = (x - dx + 8) % 8, sy = (y - dy + 8) % 8;
            CHECK(cell_vector(s, x, y) == cell_vector(p, sx, sy));
            CHECK(cell_vector(s, x + 1, y) == cell_vector(p, (sx + 1) % 8, sy));
            CHECK(cell_vector(s, x, y + 1) == cell_vector(p, sx, (sy + 1) % 8));
        }
    }

    Rng rng(4);
    const PositionMap sh = shuffle(p, rng);
    CHECK(sorted_cells(sh) == sorted_cells(p));  // multiset preserved
    // Adjacency broken: find the source of a non-boundary cell and check at
    // least one neighbor pair was torn apart.
    int torn = 0;
    for (int y = 1; y < 7; ++y) {
        for (int x = 1; x < 7; ++x) {
            const auto v = cell_vector(sh, x, y);
            const auto r = cell_vector(sh, x + 1, y);
            // Locate both in the original map.
            int vx = -1, vy = -1, rx = -1, ry = -1;
            for (int yy = 0; yy < 8; ++yy)
                for (int xx = 0; xx < 8; ++xx) {
                    if (cell_vector(p, xx, yy) == v) {
                        vx = xx;
                        vy = yy;
                    }
                    if (cell_vector(p, xx, yy) == r) {
                        rx = xx;
                        ry = yy;
                    }
                }
            const bool adjacent = (vy == ry && (rx - vx + 8) % 8 == 1);
            torn += !adjacent;
        }
    }
    CHECK(torn > 0);
}

TEST_CASE("sample_shift range, determinism, and uniformity") {
    Rng a(42), b(42);
    for (int it = 0; it < 100; ++it) {
        const auto [dx1, dy1] = sample_shift(6, 9, a);
        const auto [dx2, dy2] = sample_shift(6, 9, b);
        CHECK(dx1 == dx2);
        CHECK(dy1 == dy2);
        CHECK(dx1 >= 0);
        CHECK(dx1 < 9);
        CHECK(dy1 >= 0);
        CHECK(dy1 < 6);
    }

    // Chi-square-style bound: each dx frequency within 5 sigma of uniform.
    const int w = 8, n = 10000;
    Rng rng(7);
    std::vector<int> counts(w, 0);
    for (int it = 0; it < n; ++it) {
        const auto [dx, dy] = sample_shift(8, w, rng);
        (void)dy;
        counts[static_cast<std::size_t>(dx)]++;
    }
    const double expected = static_cast<double>(n) / w;
    const double sigma = std::sqrt(n * (1.0 / w) * (1.0 - 1.0 / w));
    for (int k = 0; k < w; ++k) {
        CHECK(std::fabs(counts[static_cast<std::size_t>(k)] - expected) < 5.0 * sigma);
    }
}

TEST_CASE("shifted maps feed the tape as constants and leak no gradient") {
    const PositionMap p = build_learnable(PositionKind::Ape1d, 4, 4, 8, 1);
    ad::Tape tape;
    const ad_ops::TapedPosition taped = ad_ops::put_on_tape(tape, p, true);
    const PositionMap shifted = shift(p, 1, 2);
    ad::Var shifted_const = ad_ops::constant_grid(tape, p, shifted.grid);
    CHECK_FALSE(shifted_const.requires_grad());

    ad::Var loss = ad::add(ad::sum(taped.grid), ad::sum(shifted_const));
    tape.backward(loss.id);
    // Gradient reaches the learnable map only through the unshifted path.
    for (double g : taped.params.at(0).grad()) CHECK(g == 1.0);
}

TEST_CASE("2dape materialization concatenates the two parameter sets") {
    const PositionMap p = build_learnable(PositionKind::Ape2d, 3, 4, 8, 2);
    const auto v = cell_vector(p, 2, 1);
    for (int ch = 0; ch < 4; ++ch) {
        CHECK(v[static_cast<std::size_t>(ch)] == p.x_set[2 * 4 + static_cast<std::size_t>(ch)]);
        CHECK(v[static_cast<std::size_t>(4 + ch)] == p.y_set[1 * 4 + static_cast<std::size_t>(ch)]);
    }

    // Taped materialization matches and routes gradients to both sets.
    ad::Tape tape;
    const ad_ops::TapedPosition taped = ad_ops::put_on_tape(tape, p, true);
    CHECK(taped.grid.values() == p.materialize());
    tape.backward(ad::sum(taped.grid).id);
    for (double g : taped.params.at(0).grad()) CHECK(g == 3.0);  // h' rows sum
    for (double g : taped.params.at(1).grad()) CHECK(g == 4.0);  // w' cols sum
}
