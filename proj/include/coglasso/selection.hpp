#ifndef COGLASSO_SELECTION_HPP
#define COGLASSO_SELECTION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "coglasso/core.hpp"
#include "coglasso/rng.hpp"
#include "coglasso/solver.hpp"

namespace coglasso {

enum class Axis { LambdaW, LambdaB, Collaboration, GlassoLambda };

const char* axis_name(Axis axis);

struct StabilityConfig {
    std::size_t num_subsamples = 20;
    std::size_t subsample_size = 0;  // 0 = min(floor(10*sqrt(n)), n-1)
    double instability_threshold = 0.05;
    std::uint64_t seed = 0;
    bool redraw_per_value = false;  // default: one draw shared by all axis values
};

std::size_t default_subsample_size(std::size_t n);

// b distinct row indices without replacement, ascending; b must be < n.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t b, Rng& rng);

// Mean over unordered pairs of 2 * p_ij * (1 - p_ij), where p_ij is the
// selection frequency of edge (i, j) across the subsample networks.
double edge_instability(const std::vector<BinaryMatrix>& adjacencies);

// Running maximum of the raw instabilities along the sparse-to-dense path.
std::vector<double> monotonize_path(const std::vector<double>& raw);

// Index of the densest path position whose monotonized instability stays at
// or below the threshold; 0 (the sparsest) when none qualifies.
std::size_t choose_on_path(const std::vector<double>& monotonized, double threshold);

struct SweepTrace {
    Axis axis = Axis::LambdaW;
    std::vector<double> values;       // explored values in sparse-to-dense order
    std::vector<double> instability;  // raw D per value
    std::vector<double> monotonized;  // running max along the path
    std::size_t chosen_index = 0;
};

struct SweepResult {
    double chosen = 0.0;
    SweepTrace trace;
};

// Hyperparameter slots fixed during a sweep; the swept axis slot is ignored
// (XStARS seeds lambda_w with a -1 sentinel before its first selection).
struct FixedHyper {
    double lambda_w = 0.0;
    double lambda_b = 0.0;
    double c = 0.0;
};

// One-dimensional stability sweep. Orders the axis sparse-to-dense (lambda
// axes descend, the collaboration axis ascends), fits every subsample at
// every value, monotonizes the instability along the path, and returns the
// densest value whose monotonized instability stays at or below the
// threshold (the sparsest value if none does). `salt` decorrelates the
// subsample draws of successive sweeps.
SweepResult stars_sweep(const Matrix& data, Axis axis, std::vector<double> axis_values,
                        const FixedHyper& fixed, const StabilityConfig& cfg,
                        const LayerPartition& partition, const ConvergenceConfig& conv,
                        std::uint64_t salt = 0);

struct SelectionResult {
    double lambda_w_hat = 0.0;
    double lambda_b_hat = 0.0;
    double c_hat = 0.0;
    std::vector<SweepTrace> traces;
    int iterations = 0;
    bool converged = false;
};

inline constexpr int kXstarsDefaultMaxIter = 10;

using SweepFn = std::function<SweepResult(Axis, const std::vector<double>&, const FixedHyper&,
                                          std::uint64_t)>;

// Alternating selection over (lambda_w, lambda_b, c): sweeps one axis at a
// time with the other two fixed at their current estimates, and stops once
// two consecutive selections repeat their previous value, or after max_iter
// single-axis sweeps.
SelectionResult xstars_with_sweep(const SweepFn& sweep, const std::vector<double>& lambda_w_grid,
                                  const std::vector<double>& lambda_b_grid,
                                  const std::vector<double>& c_grid,
                                  int max_iter = kXstarsDefaultMaxIter);

SelectionResult xstars(const Matrix& data, const std::vector<double>& lambda_w_grid,
                       const std::vector<double>& lambda_b_grid, const std::vector<double>& c_grid,
                       const StabilityConfig& cfg, const LayerPartition& partition,
                       const ConvergenceConfig& conv, int max_iter = kXstarsDefaultMaxIter);

}  // namespace coglasso

#endif
