// Acceptance suite: one criterion per function, one pass/fail line each.
// Usage: acceptance [N ...]  (no arguments = run all; 6 covers 6 and 7).
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "coglasso/bench.hpp"
#include "coglasso/io.hpp"
#include "coglasso/metrics.hpp"
#include "coglasso/selection.hpp"
#include "coglasso/simgen.hpp"
#include "coglasso/solver.hpp"
#include "coglasso/util.hpp"
#include "oracles.hpp"

using namespace coglasso;
namespace fs = std::filesystem;

namespace {

struct Checker {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& context) {
        if (!condition && ok) {
            ok = false;
            detail = context;
        }
    }
};

ConvergenceConfig tight_config() {
    ConvergenceConfig cfg;
    cfg.outer_tol = 1e-9;
    cfg.inner_tol = 1e-11;
    cfg.max_outer = 2000;
    cfg.max_inner = 50000;
    return cfg;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---- criterion 1: glasso-collapse equivalence ------------------------------
Checker criterion_1() {
    Checker c;
    Rng rng(1001);
    for (int rep = 0; rep < 50 && c.ok; ++rep) {
        const std::size_t p = 4 + static_cast<std::size_t>(rng.uniform_below(17));  // <= 20
        const auto cov = oracles::random_covariance(p, rng);
        double lambda_max = 0;
        for (Eigen::Index i = 0; i < cov.S.rows(); ++i)
            for (Eigen::Index j = 0; j < cov.S.cols(); ++j)
                if (i != j) lambda_max = std::max(lambda_max, std::abs(cov.S(i, j)));
        const double lambda = (0.05 + 0.9 * rng.uniform()) * lambda_max;
        const std::size_t p_x = 1 + static_cast<std::size_t>(rng.uniform_below(p - 1));
        const LayerPartition part(p_x, p - p_x);

        const auto a = fit(cov, Hyperparameters(lambda, lambda, 0.0), part);
        const auto b = fit_glasso(cov, lambda);
        const double diff = (a.B_hat - b.B_hat).cwiseAbs().maxCoeff();
        c.expect(diff <= 1e-9,
                 "B_hat difference " + fmt(diff) + " at instance " + std::to_string(rep));
        c.expect((a.adjacency - b.adjacency).cwiseAbs().maxCoeff() == 0,
                 "adjacency mismatch at instance " + std::to_string(rep));
    }
    return c;
}

// ---- criterion 2: KKT optimality -------------------------------------------
Checker criterion_2() {
    Checker c;
    Rng rng(2002);
    const double c_choices[] = {0.0, 0.1, 0.5, 1.0, 2.0, 10.0};
    int converged_fits = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = 4 + static_cast<std::size_t>(rng.uniform_below(12));  // <= 15
        const auto cov = oracles::random_covariance(p, rng);
        const std::size_t p_x = 1 + static_cast<std::size_t>(rng.uniform_below(p - 1));
        const LayerPartition part(p_x, p - p_x);
        const double lw = 0.05 + 0.5 * rng.uniform();
        const double lb = 0.05 + 0.5 * rng.uniform();
        const double cc = c_choices[rng.uniform_below(6)];

        const auto f = fit(cov, Hyperparameters(lw, lb, cc), part, tight_config());
        c.expect(f.converged, "fit " + std::to_string(rep) + " did not converge");
        if (!f.converged) continue;
        ++converged_fits;
        const auto report = kkt_residuals(cov, part, f);
        c.expect(report.max_active_residual <= 1e-6,
                 "active residual " + fmt(report.max_active_residual) + " at draw " +
                     std::to_string(rep) + " (c=" + fmt(cc) + ")");
        c.expect(report.max_inactive_excess <= 1e-6,
                 "inactive excess " + fmt(report.max_inactive_excess) + " at draw " +
                     std::to_string(rep));
        if (!c.ok) break;
    }
    c.expect(converged_fits >= 200, "only " + std::to_string(converged_fits) + " converged fits");
    return c;
}

// ---- criterion 3: brute-force row oracle -----------------------------------
Checker criterion_3() {
    Checker c;
    Rng rng(3003);
    const double c_choices[] = {0.0, 0.1, 0.5, 1.0, 2.0};
    for (int rep = 0; rep < 20 && c.ok; ++rep) {
        const auto cov = oracles::random_covariance(4, rng);
        const LayerPartition part(2, 2);
        Matrix W = cov.S;
        const double lw = 0.05 + 0.3 * rng.uniform();
        const double lb = 0.05 + 0.3 * rng.uniform();
        W.diagonal().array() += lw;
        const Hyperparameters hyper(lw, lb, c_choices[rng.uniform_below(5)]);
        const auto penalty = make_penalty_matrix(lw, lb, part);
        const std::size_t i = rng.uniform_below(4);

        const auto prob = make_row_problem(cov, W, penalty, i);
        const auto sol = solve_row(prob, hyper, tight_config(), Vector::Zero(3));
        c.expect(sol.converged, "row solve did not converge at fixture " + std::to_string(rep));
        const Vector reference = oracles::row_minimize(prob, hyper);
        const double diff = (sol.beta - reference).cwiseAbs().maxCoeff();
        c.expect(diff <= 1e-6,
                 "coordinate difference " + fmt(diff) + " at fixture " + std::to_string(rep));
    }
    return c;
}

// ---- criterion 4: metric formula oracles -----------------------------------
Checker criterion_4() {
    Checker c;
    Rng rng(4004);
    for (int rep = 0; rep < 100 && c.ok; ++rep) {
        const long tp = static_cast<long>(rng.uniform_below(40));
        const long fp = static_cast<long>(rng.uniform_below(40));
        const long tn = static_cast<long>(rng.uniform_below(40));
        const long fn = static_cast<long>(rng.uniform_below(40));
        const Confusion conf{tp, fp, tn, fn};

        // alternate algebraic route for F1
        const double f1_direct =
            tp == 0 ? 0.0
                    : 2.0 * static_cast<double>(tp) /
                          (2.0 * static_cast<double>(tp) + static_cast<double>(fp) +
                           static_cast<double>(fn));
        c.expect(std::abs(f1(conf) - f1_direct) <= 1e-12, "f1 mismatch at " + std::to_string(rep));

        const long double denom = std::sqrt(static_cast<long double>(tp + fp)) *
                                  std::sqrt(static_cast<long double>(tp + fn)) *
                                  std::sqrt(static_cast<long double>(tn + fp)) *
                                  std::sqrt(static_cast<long double>(tn + fn));
        const double mcc_direct =
            denom == 0.0L ? 0.0
                          : static_cast<double>((static_cast<long double>(tp) * tn -
                                                 static_cast<long double>(fp) * fn) /
                                                denom);
        c.expect(std::abs(mcc(conf) - mcc_direct) <= 1e-12,
                 "mcc mismatch at " + std::to_string(rep));
    }
    for (int rep = 0; rep < 100 && c.ok; ++rep) {
        const std::size_t p = 3 + static_cast<std::size_t>(rng.uniform_below(6));
        auto make_pd = [&] {
            const auto cov = oracles::random_covariance(p, rng);
            Matrix M = cov.S;
            M.diagonal().array() += 0.4;
            return M;
        };
        const Matrix a = make_pd();
        const Matrix b = make_pd();
        // dense-inverse route as the oracle
        const double oracle = 0.5 * ((a * b.inverse()).trace() + (b * a.inverse()).trace()) -
                              static_cast<double>(p);
        const double mine = kld(a, b);
        c.expect(std::abs(mine - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)),
                 "kld mismatch " + fmt(std::abs(mine - oracle)) + " at " + std::to_string(rep));
        c.expect(kld(a, a) == 0.0, "kld(a,a) not exactly zero");
        c.expect(kld(a, b) == kld(b, a), "kld asymmetry at " + std::to_string(rep));
    }
    return c;
}

// ---- criterion 5: simulator fidelity ---------------------------------------
Checker criterion_5() {
    Checker c;
    for (int scenario = 1; scenario <= 3 && c.ok; ++scenario) {
        const auto spec = scenario_preset(scenario);
        for (std::uint64_t seed = 1; seed <= 10 && c.ok; ++seed) {
            const auto sim = generate_replicates(spec, 0, seed);
            Eigen::SelfAdjointEigenSolver<Matrix> es(sim.truth.theta, Eigen::EigenvaluesOnly);
            c.expect(es.eigenvalues().minCoeff() > 0.0,
                     "theta not PD (scenario " + std::to_string(scenario) + ", seed " +
                         std::to_string(seed) + ")");
            c.expect(sim.cross_block.activation >= 0.30 && sim.cross_block.activation <= 0.50,
                     "activation " + fmt(sim.cross_block.activation) +
                         " outside [0.30, 0.50] (scenario " + std::to_string(scenario) +
                         ", seed " + std::to_string(seed) + ")");

            // between-cluster edges of layer X, reconstructed from the
            // contiguous near-equal cluster sizing
            const std::size_t k = spec.clusters_x;
            const std::size_t base = spec.p_x / k;
            const std::size_t rem = spec.p_x % k;
            std::vector<std::size_t> cluster(spec.p_x);
            for (std::size_t cl = 0, node = 0; cl < k; ++cl)
                for (std::size_t s = 0; s < base + (cl < rem ? 1 : 0); ++s) cluster[node++] = cl;
            long cross = 0;
            for (std::size_t i = 0; i < spec.p_x; ++i)
                for (std::size_t j = i + 1; j < spec.p_x; ++j)
                    if (sim.truth.theta(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(j)) != 0.0 &&
                        cluster[i] != cluster[j])
                        ++cross;
            c.expect(cross == static_cast<long>(spec.extra_edges_x),
                     "layer-X between-cluster edges " + std::to_string(cross) + " != " +
                         std::to_string(spec.extra_edges_x) + " (scenario " +
                         std::to_string(scenario) + ", seed " + std::to_string(seed) + ")");
        }
    }
    return c;
}

// ---- criteria 6 and 7: desk-scale oracle directions ------------------------
Checker criterion_6_and_7() {
    Checker c;
    const auto spec = scenario_preset(1);
    BenchConfig cfg;  // desk defaults: 5x5 lambda grid, c {0, 0.5, 1}, 10 glasso lambdas
    cfg.run_selection = false;
    const auto report = run_scenario(spec, 20, 42, cfg);
    c.expect(report.complete, "bench run had replicate failures");
    if (!report.complete) return c;

    int f1_wins = 0;
    int c_positive = 0;
    std::vector<double> kld_cog, kld_gl;
    for (const auto& r : report.oracle) {
        if (r.cog_best_f1 >= r.gl_best_f1) ++f1_wins;
        if (r.cog_at_f1.c > 0.0) ++c_positive;
        if (r.cog_kld_available) kld_cog.push_back(r.cog_best_kld);
        if (r.gl_kld_available) kld_gl.push_back(r.gl_best_kld);
    }
    const double med_cog = quantile(kld_cog, 0.5);
    const double med_gl = quantile(kld_gl, 0.5);
    c.expect(f1_wins >= 12, "oracle F1 wins " + std::to_string(f1_wins) + "/20 < 60%");
    c.expect(med_cog <= med_gl, "median oracle KLD " + fmt(med_cog) + " > glasso " + fmt(med_gl));

    // criterion 7 rides on the same run
    c.expect(c_positive >= 18, "best-F1 c > 0 in only " + std::to_string(c_positive) + "/20");
    if (c.ok)
        c.detail = "F1 wins " + std::to_string(f1_wins) + "/20, median KLD " + fmt(med_cog) +
                   " vs " + fmt(med_gl) + ", best-F1 c>0 in " + std::to_string(c_positive) +
                   "/20";
    return c;
}

// ---- criterion 8: xstars control flow ---------------------------------------
Checker criterion_8() {
    Checker c;
    const std::vector<double> lw{0.5, 0.3, 0.1};
    const std::vector<double> lb{0.4, 0.2, 0.05};
    const std::vector<double> cs{0.0, 0.5, 1.0};

    // deterministic stub whose lambda_b and c picks repeat the initializers
    const SweepFn stub = [&](Axis axis, const std::vector<double>&, const FixedHyper&,
                             std::uint64_t) {
        SweepResult r;
        r.chosen = axis == Axis::LambdaW ? 0.3 : (axis == Axis::LambdaB ? 0.05 : 1.0);
        return r;
    };
    const auto res = xstars_with_sweep(stub, lw, lb, cs);
    c.expect(res.iterations == 3, "terminated at iteration " + std::to_string(res.iterations));
    c.expect(res.converged, "converged flag not set");
    c.expect(res.lambda_w_hat == 0.3 && res.lambda_b_hat == 0.05 && res.c_hat == 1.0,
             "stub triplet not returned");

    // generic constants: the lambda_w repeat counts first, lambda_b second
    const SweepFn generic = [&](Axis axis, const std::vector<double>&, const FixedHyper&,
                                std::uint64_t) {
        SweepResult r;
        r.chosen = axis == Axis::LambdaW ? 0.1 : (axis == Axis::LambdaB ? 0.4 : 0.5);
        return r;
    };
    const auto res2 = xstars_with_sweep(generic, lw, lb, cs);
    c.expect(res2.converged && res2.iterations == 5,
             "generic stub: iterations " + std::to_string(res2.iterations));
    c.expect(res2.lambda_w_hat == 0.1 && res2.lambda_b_hat == 0.4 && res2.c_hat == 0.5,
             "generic stub triplet not returned");

    const auto res3 = xstars_with_sweep(generic, lw, lb, cs, 1);
    c.expect(res3.iterations == 1, "max_iter=1 ran " + std::to_string(res3.iterations));
    c.expect(res3.lambda_w_hat == 0.1, "max_iter=1 lambda_w not selected");
    c.expect(res3.lambda_b_hat == 0.05 && res3.c_hat == 1.0,
             "max_iter=1 should leave lambda_b and c at their initial values");

    // all returned values are members of the supplied grids
    for (const auto& r : {res, res2, res3}) {
        c.expect(std::count(lw.begin(), lw.end(), r.lambda_w_hat) == 1, "lambda_w not in grid");
        c.expect(std::count(lb.begin(), lb.end(), r.lambda_b_hat) == 1, "lambda_b not in grid");
        c.expect(std::count(cs.begin(), cs.end(), r.c_hat) == 1, "c not in grid");
    }
    return c;
}

// ---- criterion 9: selection determinism and sanity --------------------------
Checker criterion_9() {
    Checker c;
    const auto spec = scenario_preset(1);
    BenchConfig cfg;
    cfg.run_oracle = false;
    const auto a = run_scenario(spec, 5, 7, cfg);
    const auto b = run_scenario(spec, 5, 7, cfg);
    c.expect(a.complete && b.complete, "selection run had replicate failures");

    Provenance prov;
    prov.seed = 7;
    c.expect(bench_records_csv(a, prov) == bench_records_csv(b, prov),
             "records CSV not byte-identical across runs");
    c.expect(bench_summary_json(a, prov) == bench_summary_json(b, prov),
             "summary JSON not byte-identical across runs");

    std::vector<double> f1_cog, f1_gl;
    for (const auto& r : a.selection) {
        f1_cog.push_back(r.cog_f1);
        f1_gl.push_back(r.gl_f1);
    }
    const double med_cog = quantile(f1_cog, 0.5);
    const double med_gl = quantile(f1_gl, 0.5);
    c.expect(med_cog >= med_gl,
             "median selected F1 " + fmt(med_cog) + " < glasso " + fmt(med_gl));
    if (c.ok) c.detail = "median selected F1 " + fmt(med_cog) + " vs " + fmt(med_gl);
    return c;
}

// ---- criterion 10: CLI round trip and exit codes -----------------------------
struct CliRun {
    int code = -1;
    std::string err;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
    const fs::path errfile = dir / "stderr.txt";
    const std::string cmd = std::string(COGLASSO_CLI_PATH) + " " + args + " > /dev/null 2> " +
                            errfile.string();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(errfile);
    r.err.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

Checker criterion_10() {
    Checker c;
    const fs::path dir =
        fs::temp_directory_path() / ("coglasso_acceptance_" + std::to_string(Rng(0).next_u64()));
    fs::create_directories(dir);

    const std::string sim_dir = (dir / "sim").string();
    c.expect(run_cli(dir, "simulate --scenario 1 --replicates 1 --seed 11 --out " + sim_dir)
                     .code == 0,
             "simulate failed");
    const std::string data = sim_dir + "/replicates/rep_000.csv";
    const std::string fit_file = (dir / "fit.json").string();
    c.expect(run_cli(dir, "fit --data " + data + " --px 40 --lambda-w 0.3 --lambda-b 0.2 "
                          "--c 0.5 --out " + fit_file)
                     .code == 0,
             "fit failed");
    const std::string net_file = (dir / "net.json").string();
    c.expect(run_cli(dir, "export --fit " + fit_file + " --format json --out " + net_file)
                     .code == 0,
             "export failed");
    if (!c.ok) {
        fs::remove_all(dir);
        return c;
    }

    // the reloaded network must match the in-memory export bit for bit
    const FitRecord rec = load_fit_json(fit_file);
    const auto expected = make_network_export(rec, SignConvention::Paper);
    const auto loaded = load_network_json(net_file);
    c.expect(loaded.edges.size() == expected.edges.size(), "edge count mismatch after reload");
    for (std::size_t e = 0; c.ok && e < expected.edges.size(); ++e) {
        c.expect(loaded.edges[e].a == expected.edges[e].a &&
                     loaded.edges[e].b == expected.edges[e].b,
                 "edge endpoints differ at " + std::to_string(e));
        c.expect(loaded.edges[e].weight == expected.edges[e].weight,
                 "edge weight differs at " + std::to_string(e));
        c.expect(loaded.edges[e].quartile == expected.edges[e].quartile,
                 "edge quartile differs at " + std::to_string(e));
    }
    c.expect(loaded.labels == expected.labels, "labels differ after reload");

    // and the fit file itself reloads to an equal record
    const FitRecord rec2 = load_fit_json(fit_file);
    c.expect(fit_records_equal(rec, rec2), "fit JSON reload mismatch");

    // exit-code contract
    const auto usage = run_cli(dir, "fit --data " + data + " --px 40 --lambda-b 0.2 --out x.json");
    c.expect(usage.code == 1, "missing flag exit " + std::to_string(usage.code));
    c.expect(usage.err.find("--lambda-w") != std::string::npos,
             "usage error does not name --lambda-w");
    c.expect(run_cli(dir, "").code == 1, "bare invocation should exit 1");
    c.expect(run_cli(dir, "fit --data " + (dir / "missing.csv").string() +
                          " --px 2 --lambda-w 0.1 --lambda-b 0.1 --out x.json")
                     .code == 2,
             "missing file should exit 2");

    FitRecord bad;
    bad.hyper = Hyperparameters(0.1, 0.1, 0.0);
    bad.partition = LayerPartition(1, 1);
    bad.labels = {"a", "b"};
    bad.theta.resize(2, 2);
    bad.theta << -1.0, 0.5, 0.5, 1.0;
    bad.adjacency = BinaryMatrix::Zero(2, 2);
    bad.adjacency(0, 1) = bad.adjacency(1, 0) = 1;
    bad.converged = true;
    write_fit_json((dir / "bad.json").string(), bad);
    c.expect(run_cli(dir, "export --fit " + (dir / "bad.json").string() +
                          " --format edgelist --out x.tsv")
                     .code == 3,
             "numerical failure should exit 3");

    fs::remove_all(dir);
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Checker()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "glasso-collapse equivalence (50 random instances)", 60, criterion_1},
        {2, "KKT optimality (200 random draws)", 120, criterion_2},
        {3, "brute-force row oracle (20 fixtures)", 60, criterion_3},
        {4, "metric formula oracles (100 fixtures)", 30, criterion_4},
        {5, "simulator fidelity (3 scenarios x 10 seeds)", 120, criterion_5},
        {6, "desk-scale oracle directions (criteria 6 and 7)", 900, criterion_6_and_7},
        {8, "xstars control flow with stubbed sweeps", 1, criterion_8},
        {9, "selection determinism and sanity (5 replicates, two runs)", 1200, criterion_9},
        {10, "CLI round trip and exit codes", 60, criterion_10},
    };

    std::set<int> selected;
    for (int a = 1; a < argc; ++a) {
        const int id = std::atoi(argv[a]);
        selected.insert(id == 7 ? 6 : id);
    }

    bool all_ok = true;
    for (const auto& crit : criteria) {
        if (!selected.empty() && selected.count(crit.id) == 0) continue;
        const auto start = std::chrono::steady_clock::now();
        Checker result;
        try {
            result = crit.run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > crit.budget_seconds) {
            result.ok = false;
            result.detail = "over budget (" + fmt(secs) + "s > " + fmt(crit.budget_seconds) + "s)";
        }
        std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", result.ok ? "PASS" : "FAIL", crit.id,
                    crit.name, secs, result.detail.empty() ? "" : " -- ", result.detail.c_str());
        std::fflush(stdout);
        all_ok = all_ok && result.ok;
    }
    return all_ok ? 0 : 1;
}
