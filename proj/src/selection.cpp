#include "coglasso/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coglasso/parallel.hpp"

namespace coglasso {

const char* axis_name(Axis axis) {
    switch (axis) {
        case Axis::LambdaW: return "lambda_w";
        case Axis::LambdaB: return "lambda_b";
        case Axis::Collaboration: return "c";
        case Axis::GlassoLambda: return "lambda";
    }
    return "?";
}

std::size_t default_subsample_size(std::size_t n) {
    const auto ten_sqrt = static_cast<std::size_t>(std::floor(10.0 * std::sqrt(static_cast<double>(n))));
    return std::min(ten_sqrt, n - 1);
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t b, Rng& rng) {
    if (b >= n)
        throw ParameterError("subsample size " + std::to_string(b) +
                             " must be smaller than the sample count " + std::to_string(n));
    return sample_without_replacement(n, b, rng);
}

double edge_instability(const std::vector<BinaryMatrix>& adjacencies) {
    if (adjacencies.size() < 2)
        throw ParameterError("edge instability needs at least 2 networks");
    const auto p = adjacencies.front().rows();
    for (const auto& A : adjacencies) {
        if (A.rows() != p || A.cols() != p)
            throw ParameterError("adjacency shapes differ across subsamples");
        for (Eigen::Index i = 0; i < p; ++i) {
            if (A(i, i) != 0) throw ParameterError("adjacency has a nonzero diagonal");
            for (Eigen::Index j = i + 1; j < p; ++j)
                if (A(i, j) != A(j, i)) throw ParameterError("adjacency is not symmetric");
        }
    }
    const double count = static_cast<double>(adjacencies.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            double hits = 0.0;
            for (const auto& A : adjacencies) hits += A(i, j) != 0 ? 1.0 : 0.0;
            const double freq = hits / count;
            total += 2.0 * freq * (1.0 - freq);
        }
    const double pairs = static_cast<double>(p * (p - 1)) / 2.0;
    return total / pairs;
}

std::vector<double> monotonize_path(const std::vector<double>& raw) {
    std::vector<double> out(raw.size());
    double running = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        running = std::max(running, raw[k]);
        out[k] = running;
    }
    return out;
}

std::size_t choose_on_path(const std::vector<double>& monotonized, double threshold) {
    std::size_t chosen = 0;
    for (std::size_t v = 0; v < monotonized.size(); ++v)
        if (monotonized[v] <= threshold) chosen = v;
    return chosen;
}

namespace {

Matrix take_rows(const Matrix& data, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = data.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

CoglassoFit fit_at(Axis axis, double value, const FixedHyper& fixed,
                   const EmpiricalCovariance& cov, const LayerPartition& partition,
                   const ConvergenceConfig& conv, const CoglassoFit* warm) {
    switch (axis) {
        case Axis::LambdaW:
            return fit(cov, Hyperparameters(value, fixed.lambda_b, fixed.c), partition, conv, warm);
        case Axis::LambdaB:
            return fit(cov, Hyperparameters(fixed.lambda_w, value, fixed.c), partition, conv, warm);
        case Axis::Collaboration:
            return fit(cov, Hyperparameters(fixed.lambda_w, fixed.lambda_b, value), partition,
                       conv, warm);
        case Axis::GlassoLambda:
            return fit_glasso(cov, value, conv, warm);
    }
    throw ParameterError("unknown sweep axis");
}

}  // namespace

SweepResult stars_sweep(const Matrix& data, Axis axis, std::vector<double> axis_values,
                        const FixedHyper& fixed, const StabilityConfig& cfg,
                        const LayerPartition& partition, const ConvergenceConfig& conv,
                        std::uint64_t salt) {
    if (axis_values.empty()) throw ParameterError("sweep axis grid is empty");
    const auto n = static_cast<std::size_t>(data.rows());
    if (static_cast<std::size_t>(data.cols()) != partition.p())
        throw ParameterError("data width does not match the layer partition");
    const std::size_t b = cfg.subsample_size != 0 ? cfg.subsample_size : default_subsample_size(n);
    if (b < 2 || b >= n)
        throw ParameterError("subsample size " + std::to_string(b) + " must lie in [2, n)");
    if (cfg.num_subsamples < 2) throw ParameterError("need at least 2 subsamples");
    if (cfg.instability_threshold <= 0.0 || cfg.instability_threshold >= 0.5)
        throw ParameterError("instability threshold must lie in (0, 0.5)");
    if (axis != Axis::LambdaW && axis != Axis::GlassoLambda && fixed.lambda_w < 0)
        throw ParameterError("internal: lambda_w sentinel reached a sweep");

    // sparse-to-dense path: lambda axes descend, the collaboration axis ascends
    if (axis == Axis::Collaboration)
        std::sort(axis_values.begin(), axis_values.end());
    else
        std::sort(axis_values.begin(), axis_values.end(), std::greater<double>());

    const std::size_t num_values = axis_values.size();
    const std::size_t num_subs = cfg.num_subsamples;
    const Rng sweep_base = Rng(cfg.seed).child(salt);

    std::vector<std::vector<std::size_t>> shared_sets(num_subs);
    if (!cfg.redraw_per_value)
        for (std::size_t s = 0; s < num_subs; ++s) {
            Rng rs = sweep_base.child(s);
            shared_sets[s] = subsample_indices(n, b, rs);
        }

    std::vector<std::vector<BinaryMatrix>> adj(num_subs, std::vector<BinaryMatrix>(num_values));
    parallel_for(num_subs, [&](std::size_t s) {
        CoglassoFit warm;
        bool have_warm = false;
        EmpiricalCovariance cov;
        if (!cfg.redraw_per_value)
            cov = empirical_covariance(take_rows(data, shared_sets[s]), true);
        for (std::size_t v = 0; v < num_values; ++v) {
            if (cfg.redraw_per_value) {
                Rng rs = sweep_base.child((v + 1) * num_subs + s);
                cov = empirical_covariance(take_rows(data, subsample_indices(n, b, rs)), true);
            }
            try {
                CoglassoFit f = fit_at(axis, axis_values[v], fixed, cov, partition, conv,
                                       have_warm ? &warm : nullptr);
                adj[s][v] = f.adjacency;
                warm = std::move(f);
                have_warm = true;
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " [sweep " + axis_name(axis) + "=" +
                                     std::to_string(axis_values[v]) + ", subsample " +
                                     std::to_string(s) + "]");
            }
        }
    });

    SweepResult result;
    result.trace.axis = axis;
    result.trace.values = axis_values;
    result.trace.instability.resize(num_values);
    std::vector<BinaryMatrix> stack(num_subs);
    for (std::size_t v = 0; v < num_values; ++v) {
        for (std::size_t s = 0; s < num_subs; ++s) stack[s] = adj[s][v];
        result.trace.instability[v] = edge_instability(stack);
    }
    result.trace.monotonized = monotonize_path(result.trace.instability);
    result.trace.chosen_index =
        choose_on_path(result.trace.monotonized, cfg.instability_threshold);
    result.chosen = axis_values[result.trace.chosen_index];
    return result;
}

SelectionResult xstars_with_sweep(const SweepFn& sweep, const std::vector<double>& lambda_w_grid,
                                  const std::vector<double>& lambda_b_grid,
                                  const std::vector<double>& c_grid, int max_iter) {
    if (lambda_w_grid.empty() || lambda_b_grid.empty() || c_grid.empty())
        throw ParameterError("hyperparameter grids must be non-empty");
    if (max_iter < 1) throw ParameterError("max_iter must be at least 1");

    int converged = 0;
    int iter = 0;
    double lw_hat = -1.0;  // sentinel; replaced by the first sweep before any solver sees it
    double lb_hat = *std::min_element(lambda_b_grid.begin(), lambda_b_grid.end());
    double c_hat = *std::max_element(c_grid.begin(), c_grid.end());
    bool select_lw = true;
    bool select_lb = false;

    SelectionResult result;
    while (converged < 2 && iter < max_iter) {
        if (select_lw) {
            const SweepResult r = sweep(Axis::LambdaW, lambda_w_grid,
                                        FixedHyper{lw_hat, lb_hat, c_hat},
                                        static_cast<std::uint64_t>(iter));
            converged = (r.chosen == lw_hat) ? converged + 1 : 0;
            lw_hat = r.chosen;
            select_lw = false;
            select_lb = true;
            result.traces.push_back(r.trace);
        } else if (select_lb) {
            const SweepResult r = sweep(Axis::LambdaB, lambda_b_grid,
                                        FixedHyper{lw_hat, lb_hat, c_hat},
                                        static_cast<std::uint64_t>(iter));
            converged = (r.chosen == lb_hat) ? converged + 1 : 0;
            lb_hat = r.chosen;
            select_lb = false;
            result.traces.push_back(r.trace);
        } else {
            const SweepResult r = sweep(Axis::Collaboration, c_grid,
                                        FixedHyper{lw_hat, lb_hat, c_hat},
                                        static_cast<std::uint64_t>(iter));
            converged = (r.chosen == c_hat) ? converged + 1 : 0;
            c_hat = r.chosen;
            select_lw = true;
            select_lb = false;
            result.traces.push_back(r.trace);
        }
        ++iter;
    }

    result.lambda_w_hat = lw_hat;
    result.lambda_b_hat = lb_hat;
    result.c_hat = c_hat;
    result.iterations = iter;
    result.converged = converged >= 2;
    return result;
}

SelectionResult xstars(const Matrix& data, const std::vector<double>& lambda_w_grid,
                       const std::vector<double>& lambda_b_grid, const std::vector<double>& c_grid,
                       const StabilityConfig& cfg, const LayerPartition& partition,
                       const ConvergenceConfig& conv, int max_iter) {
    const SweepFn sweep = [&](Axis axis, const std::vector<double>& values,
                              const FixedHyper& fixed, std::uint64_t salt) {
        return stars_sweep(data, axis, values, fixed, cfg, partition, conv, salt);
    };
    return xstars_with_sweep(sweep, lambda_w_grid, lambda_b_grid, c_grid, max_iter);
}

}  // namespace coglasso
