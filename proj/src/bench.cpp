#include "coglasso/bench.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "coglasso/parallel.hpp"
#include "coglasso/util.hpp"

namespace coglasso {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct MetricTriple {
    double f1 = 0.0;
    double mcc = 0.0;
    double kld = 0.0;
    bool kld_ok = false;
};

MetricTriple evaluate(const GroundTruthModel& truth, const CoglassoFit& f) {
    MetricTriple m;
    const Confusion c = confusion(truth.adjacency, f.adjacency);
    m.f1 = f1(c);
    m.mcc = mcc(c);
    try {
        m.kld = kld(truth.theta, f.Theta_hat);
        m.kld_ok = true;
    } catch (const NumericalError&) {
        m.kld = std::numeric_limits<double>::quiet_NaN();
        m.kld_ok = false;
    }
    return m;
}

}  // namespace

OracleRecord oracle_sweep(const Matrix& dataset, const GroundTruthModel& truth,
                          const CoglassoGrids& cog_grid, const std::vector<double>& glasso_grid,
                          const ConvergenceConfig& conv) {
    if (cog_grid.lambda_w.empty() || cog_grid.lambda_b.empty() || cog_grid.c.empty() ||
        glasso_grid.empty())
        throw ParameterError("oracle grids must be non-empty");

    const EmpiricalCovariance cov = empirical_covariance(dataset, true);
    OracleRecord rec;
    rec.cog_grid = cog_grid;
    rec.gl_grid = glasso_grid;
    rec.cog_best_kld = std::numeric_limits<double>::infinity();
    rec.gl_best_kld = std::numeric_limits<double>::infinity();

    // ascending c outermost so that ties never credit collaboration
    std::vector<double> c_values = cog_grid.c;
    std::sort(c_values.begin(), c_values.end());
    std::vector<double> lb_values = cog_grid.lambda_b;
    std::sort(lb_values.begin(), lb_values.end(), std::greater<double>());
    std::vector<double> lw_values = cog_grid.lambda_w;
    std::sort(lw_values.begin(), lw_values.end(), std::greater<double>());

    // every grid point is fit cold: a selection refit at the same point then
    // reproduces the oracle's fit bit for bit, so oracle metrics dominate
    // selected metrics exactly, and a failed point cannot perturb later ones
    int cog_successes = 0;
    for (double c : c_values) {
        for (double lb : lb_values) {
            for (double lw : lw_values) {
                CoglassoFit f;
                try {
                    f = fit(cov, Hyperparameters(lw, lb, c), truth.partition, conv);
                } catch (const NumericalError&) {
                    ++rec.cog_failures;
                    continue;
                }
                ++cog_successes;
                const MetricTriple m = evaluate(truth, f);
                if (m.f1 > rec.cog_best_f1) {
                    rec.cog_best_f1 = m.f1;
                    rec.cog_at_f1 = f.hyper;
                }
                if (m.mcc > rec.cog_best_mcc) {
                    rec.cog_best_mcc = m.mcc;
                    rec.cog_at_mcc = f.hyper;
                }
                if (m.kld_ok && m.kld < rec.cog_best_kld) {
                    rec.cog_best_kld = m.kld;
                    rec.cog_at_kld = f.hyper;
                    rec.cog_kld_available = true;
                }
            }
        }
    }
    if (cog_successes == 0) throw NumericalError("every coglasso grid point failed");

    std::vector<double> gl_values = glasso_grid;
    std::sort(gl_values.begin(), gl_values.end(), std::greater<double>());
    int gl_successes = 0;
    for (double lambda : gl_values) {
        CoglassoFit f;
        try {
            f = fit_glasso(cov, lambda, conv);
        } catch (const NumericalError&) {
            ++rec.gl_failures;
            continue;
        }
        ++gl_successes;
        const MetricTriple m = evaluate(truth, f);
        if (m.f1 > rec.gl_best_f1) {
            rec.gl_best_f1 = m.f1;
            rec.gl_lambda_at_f1 = lambda;
        }
        if (m.mcc > rec.gl_best_mcc) {
            rec.gl_best_mcc = m.mcc;
            rec.gl_lambda_at_mcc = lambda;
        }
        if (m.kld_ok && m.kld < rec.gl_best_kld) {
            rec.gl_best_kld = m.kld;
            rec.gl_lambda_at_kld = lambda;
            rec.gl_kld_available = true;
        }
    }
    if (gl_successes == 0) throw NumericalError("every glasso grid point failed");
    return rec;
}

SelectionRecord selection_compare(const Matrix& dataset, const GroundTruthModel& truth,
                                  const CoglassoGrids& cog_grid,
                                  const std::vector<double>& glasso_grid,
                                  const StabilityConfig& stability,
                                  const ConvergenceConfig& conv) {
    const EmpiricalCovariance cov = empirical_covariance(dataset, true);
    SelectionRecord rec;
    rec.cog_grid = cog_grid;
    rec.gl_grid = glasso_grid;

    const SelectionResult sel = xstars(dataset, cog_grid.lambda_w, cog_grid.lambda_b, cog_grid.c,
                                       stability, truth.partition, conv);
    rec.lambda_w_hat = sel.lambda_w_hat;
    rec.lambda_b_hat = sel.lambda_b_hat;
    rec.c_hat = sel.c_hat;
    rec.xstars_iterations = sel.iterations;
    rec.xstars_converged = sel.converged;

    const CoglassoFit cog_fit =
        fit(cov, Hyperparameters(sel.lambda_w_hat, sel.lambda_b_hat, sel.c_hat), truth.partition,
            conv);
    const MetricTriple mc = evaluate(truth, cog_fit);
    rec.cog_f1 = mc.f1;
    rec.cog_mcc = mc.mcc;
    rec.cog_kld = mc.kld;
    rec.cog_kld_available = mc.kld_ok;

    // single-axis StARS for glasso; salt clear of the xstars sweep indices
    const SweepResult gl_sweep = stars_sweep(dataset, Axis::GlassoLambda, glasso_grid,
                                             FixedHyper{}, stability, truth.partition, conv,
                                             /*salt=*/1000);
    rec.gl_lambda_hat = gl_sweep.chosen;
    const CoglassoFit gl_fit = fit_glasso(cov, gl_sweep.chosen, conv);
    const MetricTriple mg = evaluate(truth, gl_fit);
    rec.gl_f1 = mg.f1;
    rec.gl_mcc = mg.mcc;
    rec.gl_kld = mg.kld;
    rec.gl_kld_available = mg.kld_ok;
    return rec;
}

BenchReport run_scenario(const ScenarioSpec& spec, std::size_t num_replicates, std::uint64_t seed,
                         const BenchConfig& config) {
    BenchReport report;
    report.scenario_id = spec.id;
    report.seed = seed;
    report.num_replicates = num_replicates;
    report.config = config;

    auto t0 = std::chrono::steady_clock::now();
    const SimulatedScenario sim = generate_replicates(spec, num_replicates, seed);
    report.seconds_generation = seconds_since(t0);

    report.replicate_errors.assign(num_replicates, "");

    if (config.run_oracle) {
        report.oracle.assign(num_replicates, OracleRecord{});
        t0 = std::chrono::steady_clock::now();
        parallel_for(num_replicates, [&](std::size_t r) {
            const Matrix& data = sim.replicates[r];
            const EmpiricalCovariance cov = empirical_covariance(data, true);
            CoglassoGrids grids;
            grids.lambda_w = default_lambda_grid(cov, config.lambda_count_cog,
                                                 config.grid_ratio).values;
            grids.lambda_b = grids.lambda_w;
            grids.c = config.c_grid;
            const std::vector<double> gl_grid =
                default_lambda_grid(cov, config.lambda_count_gl, config.grid_ratio).values;
            try {
                report.oracle[r] = oracle_sweep(data, sim.truth, grids, gl_grid, config.conv);
                report.oracle[r].replicate_id = r;
            } catch (const Error& e) {
                report.replicate_errors[r] = e.what();
            }
        });
        report.seconds_oracle = seconds_since(t0);
    }

    if (config.run_selection) {
        report.selection.assign(num_replicates, SelectionRecord{});
        t0 = std::chrono::steady_clock::now();
        parallel_for(num_replicates, [&](std::size_t r) {
            const Matrix& data = sim.replicates[r];
            const EmpiricalCovariance cov = empirical_covariance(data, true);
            CoglassoGrids grids;
            grids.lambda_w = default_lambda_grid(cov, config.lambda_count_cog,
                                                 config.grid_ratio).values;
            grids.lambda_b = grids.lambda_w;
            grids.c = config.c_grid;
            const std::vector<double> gl_grid =
                default_lambda_grid(cov, config.lambda_count_gl, config.grid_ratio).values;
            StabilityConfig stability = config.stability;
            stability.seed = Rng(seed).child(50000 + r).base_seed();
            try {
                report.selection[r] =
                    selection_compare(data, sim.truth, grids, gl_grid, stability, config.conv);
                report.selection[r].replicate_id = r;
            } catch (const Error& e) {
                if (report.replicate_errors[r].empty()) report.replicate_errors[r] = e.what();
            }
        });
        report.seconds_selection = seconds_since(t0);
    }

    for (const auto& err : report.replicate_errors)
        if (!err.empty()) report.complete = false;
    return report;
}

std::vector<AggregateRow> summarize(const BenchReport& report) {
    std::vector<AggregateRow> rows;
    auto add = [&rows](const char* method, const char* kind, const char* metric,
                       std::vector<double> values) {
        if (values.empty()) return;
        AggregateRow row;
        row.method = method;
        row.kind = kind;
        row.metric = metric;
        row.count = values.size();
        row.median = quantile(values, 0.5);
        row.q1 = quantile(values, 0.25);
        row.q3 = quantile(values, 0.75);
        rows.push_back(std::move(row));
    };

    if (!report.oracle.empty()) {
        std::vector<double> f1c, mccc, kldc, f1g, mccg, kldg;
        for (std::size_t r = 0; r < report.oracle.size(); ++r) {
            if (r < report.replicate_errors.size() && !report.replicate_errors[r].empty())
                continue;
            const OracleRecord& rec = report.oracle[r];
            f1c.push_back(rec.cog_best_f1);
            mccc.push_back(rec.cog_best_mcc);
            if (rec.cog_kld_available) kldc.push_back(rec.cog_best_kld);
            f1g.push_back(rec.gl_best_f1);
            mccg.push_back(rec.gl_best_mcc);
            if (rec.gl_kld_available) kldg.push_back(rec.gl_best_kld);
        }
        add("coglasso", "oracle", "f1", f1c);
        add("coglasso", "oracle", "mcc", mccc);
        add("coglasso", "oracle", "kld", kldc);
        add("glasso", "oracle", "f1", f1g);
        add("glasso", "oracle", "mcc", mccg);
        add("glasso", "oracle", "kld", kldg);
    }
    if (!report.selection.empty()) {
        std::vector<double> f1c, mccc, kldc, f1g, mccg, kldg;
        for (std::size_t r = 0; r < report.selection.size(); ++r) {
            if (r < report.replicate_errors.size() && !report.replicate_errors[r].empty())
                continue;
            const SelectionRecord& rec = report.selection[r];
            f1c.push_back(rec.cog_f1);
            mccc.push_back(rec.cog_mcc);
            if (rec.cog_kld_available) kldc.push_back(rec.cog_kld);
            f1g.push_back(rec.gl_f1);
            mccg.push_back(rec.gl_mcc);
            if (rec.gl_kld_available) kldg.push_back(rec.gl_kld);
        }
        add("coglasso", "selected", "f1", f1c);
        add("coglasso", "selected", "mcc", mccc);
        add("coglasso", "selected", "kld", kldc);
        add("glasso", "selected", "f1", f1g);
        add("glasso", "selected", "mcc", mccg);
        add("glasso", "selected", "kld", kldg);
    }
    return rows;
}

}  // namespace coglasso
