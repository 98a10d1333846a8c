#ifndef COGLASSO_BENCH_HPP
#define COGLASSO_BENCH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coglasso/core.hpp"
#include "coglasso/metrics.hpp"
#include "coglasso/selection.hpp"
#include "coglasso/simgen.hpp"
#include "coglasso/solver.hpp"

namespace coglasso {

struct CoglassoGrids {
    std::vector<double> lambda_w;
    std::vector<double> lambda_b;
    std::vector<double> c;
};

// Best achievable metrics over a hyperparameter grid, with the grid point
// achieving each. Ties keep the first point in iteration order (ascending c,
// then descending penalties), so collaboration only gets credit for strict
// improvements.
struct OracleRecord {
    std::size_t replicate_id = 0;

    double cog_best_f1 = -1.0;
    double cog_best_mcc = -2.0;
    double cog_best_kld = 0.0;
    Hyperparameters cog_at_f1;
    Hyperparameters cog_at_mcc;
    Hyperparameters cog_at_kld;
    bool cog_kld_available = false;
    int cog_failures = 0;

    double gl_best_f1 = -1.0;
    double gl_best_mcc = -2.0;
    double gl_best_kld = 0.0;
    double gl_lambda_at_f1 = 0.0;
    double gl_lambda_at_mcc = 0.0;
    double gl_lambda_at_kld = 0.0;
    bool gl_kld_available = false;
    int gl_failures = 0;

    CoglassoGrids cog_grid;
    std::vector<double> gl_grid;
};

OracleRecord oracle_sweep(const Matrix& dataset, const GroundTruthModel& truth,
                          const CoglassoGrids& cog_grid, const std::vector<double>& glasso_grid,
                          const ConvergenceConfig& conv);

// Metrics of the networks picked by stability selection, refit on the full
// replicate at the selected hyperparameters.
struct SelectionRecord {
    std::size_t replicate_id = 0;

    double lambda_w_hat = 0.0;
    double lambda_b_hat = 0.0;
    double c_hat = 0.0;
    int xstars_iterations = 0;
    bool xstars_converged = false;
    double cog_f1 = 0.0;
    double cog_mcc = 0.0;
    double cog_kld = 0.0;
    bool cog_kld_available = false;

    double gl_lambda_hat = 0.0;
    double gl_f1 = 0.0;
    double gl_mcc = 0.0;
    double gl_kld = 0.0;
    bool gl_kld_available = false;

    CoglassoGrids cog_grid;
    std::vector<double> gl_grid;
};

SelectionRecord selection_compare(const Matrix& dataset, const GroundTruthModel& truth,
                                  const CoglassoGrids& cog_grid,
                                  const std::vector<double>& glasso_grid,
                                  const StabilityConfig& stability,
                                  const ConvergenceConfig& conv);

struct BenchConfig {
    int lambda_count_cog = 5;
    int lambda_count_gl = 10;
    std::vector<double> c_grid = {0.0, 0.5, 1.0};
    double grid_ratio = 0.1;
    StabilityConfig stability;
    ConvergenceConfig conv;
    bool run_oracle = true;
    bool run_selection = true;

    // paper-scale grids: 10x10 lambda grid with c in {0, 0.1, 0.5, 1, 10}
    // for coglasso and 20 lambda values for glasso
    static BenchConfig full_scale() {
        BenchConfig cfg;
        cfg.lambda_count_cog = 10;
        cfg.lambda_count_gl = 20;
        cfg.c_grid = {0.0, 0.1, 0.5, 1.0, 10.0};
        return cfg;
    }
};

struct BenchReport {
    int scenario_id = 0;
    std::uint64_t seed = 0;
    std::size_t num_replicates = 0;
    BenchConfig config;
    std::vector<OracleRecord> oracle;
    std::vector<SelectionRecord> selection;
    std::vector<std::string> replicate_errors;  // empty strings for clean replicates
    bool complete = true;
    // wall-clock accounting; reported on the console, never serialized
    double seconds_generation = 0.0;
    double seconds_oracle = 0.0;
    double seconds_selection = 0.0;
};

BenchReport run_scenario(const ScenarioSpec& spec, std::size_t num_replicates, std::uint64_t seed,
                         const BenchConfig& config);

// Per-(method, kind, metric) aggregate; recomputable from the raw records.
struct AggregateRow {
    std::string method;
    std::string kind;
    std::string metric;
    std::size_t count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

std::vector<AggregateRow> summarize(const BenchReport& report);

}  // namespace coglasso

#endif
