#include "liir/compactness.hpp"

#include <algorithm>
#include <cmath>

#include "liir/parallel.hpp"

namespace liir {

GaussianMixture2D fit_mixture(const Heatmap& heat, int components, double var_floor) {
    if (components < 1) throw ConfigError("fit_mixture: M must be >= 1");
    if (heat.h <= 0 || heat.w <= 0 ||
        heat.values.size() != static_cast<std::size_t>(heat.h) * static_cast<std::size_t>(heat.w)) {
        throw ShapeError("fit_mixture: malformed heatmap");
    }
    const int cells = heat.h * heat.w;

    // Rank cells by value, ties broken by row-major scan position.
    std::vector<int> order(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return heat.values[static_cast<std::size_t>(a)] > heat.values[static_cast<std::size_t>(b)];
    });

    int nonzero = 0;
    double total = 0.0;
    for (double v : heat.values) {
        if (v < 0.0) throw ContractError("fit_mixture: negative heatmap mass");
        if (v > 0.0) ++nonzero;
        total += v;
    }
    if (nonzero == 0) throw DegenerateInput("fit_mixture: heatmap has no mass");
    const int m = std::min(components, nonzero);  // degenerate-input fallback

    // Centers are the coordinates of the top-m cells. Top scores on touching
    // pixels are one peak, not two: such a center collapses into the retained
    // one and the mixture degenerates toward fewer components (it is not
    // replaced by a lower-ranked cell).
    std::vector<int> cx, cy;
    for (int k = 0; k < m; ++k) {
        const int cell = order[static_cast<std::size_t>(k)];
        const int x = cell % heat.w;
        const int y = cell / heat.w;
        bool touches_retained = false;
        for (std::size_t j = 0; j < cx.size(); ++j) {
            if (std::abs(x - cx[j]) <= 1 && std::abs(y - cy[j]) <= 1) {
                touches_retained = true;
                break;
            }
        }
        if (!touches_retained) {
            cx.push_back(x);
            cy.push_back(y);
        }
    }
    const int kept = static_cast<int>(cx.size());
    GaussianMixture2D mix;
    mix.components.resize(static_cast<std::size_t>(kept));
    for (int k = 0; k < kept; ++k) {
        mix.components[static_cast<std::size_t>(k)].mu_x = cx[static_cast<std::size_t>(k)];
        mix.components[static_cast<std::size_t>(k)].mu_y = cy[static_cast<std::size_t>(k)];
    }

    // Hard nearest-center assignment with accumulators for the mass-weighted
    // first and second coordinate moments of each component.
    std::vector<double> mass(static_cast<std::size_t>(kept), 0.0);
    std::vector<double> sx(static_cast<std::size_t>(kept), 0.0), sy(static_cast<std::size_t>(kept), 0.0);
    std::vector<double> sxx(static_cast<std::size_t>(kept), 0.0), syy(static_cast<std::size_t>(kept), 0.0);
    for (int y = 0; y < heat.h; ++y) {
        for (int x = 0; x < heat.w; ++x) {
            const double v = heat.at(y, x);
            if (v <= 0.0) continue;
            int best = 0;
            double best_d = -1.0;
            for (int k = 0; k < kept; ++k) {
                const double dx = x - cx[static_cast<std::size_t>(k)];
                const double dy = y - cy[static_cast<std::size_t>(k)];
                const double d = dx * dx + dy * dy;
                if (best_d < 0.0 || d < best_d) {  // ties keep the lower index
                    best_d = d;
                    best = k;
                }
            }
            const std::size_t b = static_cast<std::size_t>(best);
            mass[b] += v;
            sx[b] += v * x;
            sy[b] += v * y;
            sxx[b] += v * x * x;
            syy[b] += v * y * y;
        }
    }

    for (int k = 0; k < kept; ++k) {
        const std::size_t b = static_cast<std::size_t>(k);
        Gaussian2D& g = mix.components[b];
        g.weight = mass[b] / total;
        if (mass[b] > 0.0) {
            const double mean_x = sx[b] / mass[b];
            const double mean_y = sy[b] / mass[b];
            g.var_x = std::max(var_floor, sxx[b] / mass[b] - mean_x * mean_x);
            g.var_y = std::max(var_floor, syy[b] / mass[b] - mean_y * mean_y);
        } else {
            g.var_x = g.var_y = var_floor;
        }
    }
    return mix;
}

Heatmap compact_heatmap(const GaussianMixture2D& mix, int h, int w) {
    if (mix.components.empty()) throw ContractError("compact_heatmap: empty mixture");
    Heatmap out;
    out.h = h;
    out.w = w;
    out.values.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0);
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    for (const Gaussian2D& g : mix.components) {
        if (g.weight <= 0.0) continue;
        const double inv2vx = 1.0 / (2.0 * g.var_x);
        const double inv2vy = 1.0 / (2.0 * g.var_y);
        const double norm = g.weight / (kTwoPi * std::sqrt(g.var_x * g.var_y));
        for (int y = 0; y < h; ++y) {
            const double dy2 = (y - g.mu_y) * (y - g.mu_y) * inv2vy;
            const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
            for (int x = 0; x < w; ++x) {
                const double dx2 = (x - g.mu_x) * (x - g.mu_x) * inv2vx;
                out.values[row + static_cast<std::size_t>(x)] += norm * std::exp(-dx2 - dy2);
            }
        }
    }
    double total = 0.0;
    for (double v : out.values) total += v;
    if (total <= 0.0) throw NumericError("compact_heatmap: zero total density");
    const double inv = 1.0 / total;
    for (double& v : out.values) v *= inv;
    return out;
}

std::vector<double> compact_row(const double* row, GridShape grid, int components,
                                double var_floor) {
    Heatmap heat;
    heat.h = grid.h;
    heat.w = grid.w;
    heat.values.assign(row, row + grid.cells());
    const GaussianMixture2D mix = fit_mixture(heat, components, var_floor);
    return compact_heatmap(mix, grid.h, grid.w).values;
}

std::vector<double> compact_targets(const AffinityMatrix& a, int components,
                                    double var_floor) {
    const std::int64_t n = a.mat.shape()[0];
    const std::int64_t cols = a.mat.shape()[1];
    if (cols != a.grid.cells()) {
        throw ShapeError("compact_targets: affinity columns do not match grid");
    }
    const auto& values = a.mat.values();
    std::vector<double> targets(values.size(), 0.0);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        const std::vector<double> t =
            compact_row(values.data() + i * static_cast<std::size_t>(cols), a.grid,
                        components, var_floor);
        std::copy(t.begin(), t.end(), targets.begin() + static_cast<std::ptrdiff_t>(
                                          i * static_cast<std::size_t>(cols)));
    });
    return targets;
}

ad::Var compactness_loss(const AffinityMatrix& a, int components, double var_floor) {
    if (a.kind != AffinityKind::Intra) {
        throw ContractError("compactness_loss: expects an intra (row-stochastic) affinity");
    }
    ad::Tape& tape = *a.mat.tape;
    // Targets are plain values, i.e. gradient-frozen: the compact prior is a
    // target, not a co-adapted distribution.
    ad::Var target = ad::constant(tape, a.mat.shape(), compact_targets(a, components, var_floor));
    ad::Var diff = ad::sub(a.mat, target);
    ad::Var row_norms = ad::l2norm_rows(diff);
    return ad::scale(ad::sum(row_norms), 1.0 / static_cast<double>(a.mat.shape()[0]));
}

AffinityMatrix filter_affinity(const AffinityMatrix& a, int components, double var_floor) {
    if (a.kind == AffinityKind::IntraInter) {
        throw ContractError("filter_affinity: expects an intra affinity");
    }
    AffinityMatrix out;
    out.kind = AffinityKind::Compact;
    out.grid = a.grid;
    out.mat = ad::constant(*a.mat.tape, a.mat.shape(),
                           compact_targets(a, components, var_floor));
    out.row_mass.assign(static_cast<std::size_t>(a.mat.shape()[0]), 1.0);
    return out;
}

}  // namespace liir
