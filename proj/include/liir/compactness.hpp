#pragma once

#include <vector>

#include "liir/affinity.hpp"
#include "liir/tensor.hpp"

namespace liir {

// One affinity row viewed as an h x w matching heatmap.
struct Heatmap {
    int h = 0;
    int w = 0;
    std::vector<double> values;  // row-major, nonnegative

    double at(int y, int x) const {
        return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                      static_cast<std::size_t>(x)];
    }
};

struct Gaussian2D {
    double weight = 0.0;  // omega_m
    double mu_x = 0.0, mu_y = 0.0;
    double var_x = 0.0, var_y = 0.0;  // diagonal covariance
};

struct GaussianMixture2D {
    std::vector<Gaussian2D> components;
};

// Variance floor keeping point masses representable as narrow Gaussians.
constexpr double kDefaultVarFloor = 0.5;

// Mixture estimation for one heatmap:
//   - component centers are the coordinates of the top-M values (ties broken
//     by row-major scan order, first occurrence wins); a top cell touching
//     an already-retained center (Chebyshev distance <= 1) is the same peak
//     and collapses into it, degenerating the mixture toward fewer
//     components,
//   - every cell is hard-assigned to the nearest center (Euclidean, ties to
//     the lower component index),
//   - weights are the assigned mass fractions,
//   - variances are the mass-weighted coordinate variances within each
//     assignment, floored at var_floor.
// Fewer nonzero cells than M falls back to that count; an all-zero heatmap
// throws DegenerateInput.
GaussianMixture2D fit_mixture(const Heatmap& heat, int components,
                              double var_floor = kDefaultVarFloor);

// Mixture density evaluated at pixel centers and renormalized to total mass 1.
Heatmap compact_heatmap(const GaussianMixture2D& mix, int h, int w);

// Fit + evaluate for one row of a dense affinity given as raw values.
std::vector<double> compact_row(const double* row, GridShape grid, int components,
                                double var_floor);

// Compact targets for all rows of an intra affinity; rows fitted in parallel.
std::vector<double> compact_targets(const AffinityMatrix& a, int components,
                                    double var_floor);

// Mean over rows of the L2 distance between each row and its gradient-frozen
// compact target. Gradient flows into the affinity only.
ad::Var compactness_loss(const AffinityMatrix& a, int components,
                         double var_floor = kDefaultVarFloor);

// Inference-time replacement of every row by its compact heatmap.
AffinityMatrix filter_affinity(const AffinityMatrix& a, int components,
                               double var_floor = kDefaultVarFloor);

}  // namespace liir
