#include <CLI11.hpp>
#include <cstdio>
#include <sstream>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "coglasso/bench.hpp"
#include "coglasso/io.hpp"
#include "coglasso/parallel.hpp"
#include "coglasso/util.hpp"
#include "coglasso/version.hpp"

namespace fs = std::filesystem;
using namespace coglasso;

namespace {

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            const std::string tok = text.substr(start, i - start);
            start = i + 1;
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ParameterError("cannot parse '" + tok + "' as a number in list '" + text +
                                     "'");
            }
        }
    }
    if (out.empty()) throw ParameterError("empty value list '" + text + "'");
    return out;
}

Provenance make_provenance(const CLI::App& app, const std::string& command, std::uint64_t seed) {
    Provenance prov;
    prov.seed = seed;
    // canonical key=value dump of the effective configuration; output
    // destinations are excluded so identical runs hash identically no matter
    // where their results land
    std::string canonical = "command=" + command + "\n";
    std::istringstream lines(const_cast<CLI::App&>(app).config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            std::string key = line.substr(0, eq);
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            if (key == "out" || (key.size() > 4 && key.compare(key.size() - 4, 4, ".out") == 0))
                continue;
        }
        canonical += line;
        canonical += '\n';
    }
    prov.config_hash = to_hex(fnv1a64(canonical));
    return prov;
}

void print_run_line(const std::string& command, const Provenance& prov) {
    std::cout << "# coglasso run: command=" << command << " seed=" << prov.seed
              << " config_hash=" << prov.config_hash << " version=" << prov.version << "\n";
}

struct DataOptions {
    std::string data;
    std::string data_z;
    std::size_t px = 0;
    bool no_header = false;
    bool no_standardize = false;
    std::string delimiter;
};

void add_data_options(CLI::App* cmd, DataOptions& opt) {
    cmd->add_option("--data", opt.data, "data table, samples x variables (layer X when --data-z is given)")
        ->required();
    cmd->add_option("--data-z", opt.data_z, "optional layer-Z data table");
    cmd->add_option("--px", opt.px, "number of layer-X columns when --data holds both layers");
    cmd->add_flag("--no-header", opt.no_header, "tables have no label row");
    cmd->add_flag("--no-standardize", opt.no_standardize, "skip column standardization");
    cmd->add_option("--delimiter", opt.delimiter, "cell delimiter (default: auto-detect)");
}

Dataset load_from_options(const DataOptions& opt) {
    DatasetSpec spec;
    spec.path = opt.data;
    spec.path_z = opt.data_z;
    spec.split_px = opt.px;
    spec.header = !opt.no_header;
    spec.standardize = !opt.no_standardize;
    if (!opt.delimiter.empty()) {
        if (opt.delimiter == "\\t" || opt.delimiter == "tab")
            spec.delimiter = '\t';
        else if (opt.delimiter.size() == 1)
            spec.delimiter = opt.delimiter[0];
        else
            throw ParameterError("delimiter must be a single character or 'tab'");
    }
    if (opt.data_z.empty() && opt.px == 0)
        throw ParameterError("either --data-z or --px is required to define the two layers");
    return load_dataset(spec);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collaborative graphical lasso: two-layer sparse GGM estimation, "
                 "stability selection, simulation and benchmarking"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file; command-line flags override");
    unsigned threads = 0;
    app.add_option("--threads", threads, "cap on worker threads (0 = all cores)");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic two-layer scenario");
    int sim_scenario = 1;
    std::size_t sim_replicates = 100;
    std::uint64_t sim_seed = 42;
    std::string sim_out;
    sim_cmd->add_option("--scenario", sim_scenario, "scenario preset id")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    sim_cmd->add_option("--replicates", sim_replicates, "number of simulated datasets");
    sim_cmd->add_option("--seed", sim_seed, "master seed");
    sim_cmd->add_option("--out", sim_out, "output directory")->required();

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "fit a collaborative graphical lasso model");
    DataOptions fit_data;
    add_data_options(fit_cmd, fit_data);
    double fit_lw = 0, fit_lb = 0, fit_c = 0;
    std::string fit_out;
    std::uint64_t fit_seed = 0;
    fit_cmd->add_option("--lambda-w", fit_lw, "within-layer penalty")->required();
    fit_cmd->add_option("--lambda-b", fit_lb, "between-layer penalty")->required();
    fit_cmd->add_option("--c", fit_c, "collaboration value (default 0)");
    fit_cmd->add_option("--seed", fit_seed, "seed recorded in provenance");
    fit_cmd->add_option("--out", fit_out, "output fit JSON")->required();
    double fit_outer_tol = ConvergenceConfig{}.outer_tol;
    double fit_inner_tol = ConvergenceConfig{}.inner_tol;
    int fit_max_outer = ConvergenceConfig{}.max_outer;
    int fit_max_inner = ConvergenceConfig{}.max_inner;
    fit_cmd->add_option("--outer-tol", fit_outer_tol, "relative outer tolerance");
    fit_cmd->add_option("--inner-tol", fit_inner_tol, "relative inner tolerance");
    fit_cmd->add_option("--max-outer", fit_max_outer, "outer sweep cap");
    fit_cmd->add_option("--max-inner", fit_max_inner, "inner sweep cap");

    // ---- select ----
    auto* sel_cmd = app.add_subcommand("select", "stability-based hyperparameter selection");
    DataOptions sel_data;
    add_data_options(sel_cmd, sel_data);
    int sel_grid_w = 20, sel_grid_b = 20;
    std::string sel_c_list = "0,0.1,0.5,1,10,100";
    std::size_t sel_subsamples = 20;
    std::size_t sel_subsample_size = 0;
    double sel_threshold = 0.05;
    double sel_grid_ratio = 0.1;
    int sel_max_iter = kXstarsDefaultMaxIter;
    std::uint64_t sel_seed = 42;
    std::string sel_out;
    sel_cmd->add_option("--grid-w", sel_grid_w, "number of lambda_w grid values");
    sel_cmd->add_option("--grid-b", sel_grid_b, "number of lambda_b grid values");
    sel_cmd->add_option("--c-list", sel_c_list, "comma-separated collaboration values");
    sel_cmd->add_option("--subsamples", sel_subsamples, "number of subsamples per sweep");
    sel_cmd->add_option("--subsample-size", sel_subsample_size,
                        "rows per subsample (0 = min(floor(10*sqrt(n)), n-1))");
    sel_cmd->add_option("--stars-threshold", sel_threshold, "instability threshold");
    sel_cmd->add_option("--grid-ratio", sel_grid_ratio, "lambda grid tail/head ratio");
    sel_cmd->add_option("--max-iter", sel_max_iter, "cap on single-axis sweeps");
    sel_cmd->add_option("--seed", sel_seed, "subsampling seed");
    sel_cmd->add_option("--out", sel_out, "output selection JSON")->required();

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "replicated oracle and selection benchmark");
    int bench_scenario = 1;
    std::size_t bench_replicates = 20;
    bool bench_full_scale = false;
    bool bench_skip_oracle = false;
    bool bench_skip_selection = false;
    std::uint64_t bench_seed = 42;
    std::string bench_out;
    bench_cmd->add_option("--scenario", bench_scenario, "scenario preset id")
        ->required()
        ->check(CLI::IsMember({1, 2, 3}));
    auto* bench_rep_opt =
        bench_cmd->add_option("--replicates", bench_replicates, "number of replicates");
    bench_cmd->add_flag("--full-scale", bench_full_scale,
                        "paper-scale grids (10x10 lambda, 5 c values, 20 glasso lambdas) and "
                        "100 replicates unless --replicates is given");
    bench_cmd->add_flag("--skip-oracle", bench_skip_oracle, "skip the oracle grid sweeps");
    bench_cmd->add_flag("--skip-selection", bench_skip_selection,
                        "skip the stability-selection comparison");
    bench_cmd->add_option("--seed", bench_seed, "master seed");
    bench_cmd->add_option("--out", bench_out, "output directory")->required();

    // ---- export ----
    auto* exp_cmd = app.add_subcommand("export", "export a fitted network");
    std::string exp_fit, exp_format, exp_sign = "paper", exp_out;
    exp_cmd->add_option("--fit", exp_fit, "fit JSON produced by the fit command")->required();
    exp_cmd->add_option("--format", exp_format, "edgelist, graphml or json")->required();
    exp_cmd->add_option("--sign", exp_sign, "partial-correlation sign convention")
        ->check(CLI::IsMember({"paper", "standard"}));
    exp_cmd->add_option("--out", exp_out, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        set_max_threads(threads);

        if (sim_cmd->parsed()) {
            const Provenance prov = make_provenance(app, "simulate", sim_seed);
            print_run_line("simulate", prov);
            const ScenarioSpec spec = scenario_preset(sim_scenario);
            const SimulatedScenario sim = generate_replicates(spec, sim_replicates, sim_seed);
            write_scenario(sim_out, spec, sim, prov);
            std::cout << "scenario " << sim_scenario << ": p=" << spec.p()
                      << ", cross-block activation=" << sim.cross_block.activation
                      << ", epsilon=" << sim.truth.epsilon << " (" << sim.truth.epsilon_doublings
                      << " doublings), replicates=" << sim.replicates.size() << " -> " << sim_out
                      << "\n";
        } else if (fit_cmd->parsed()) {
            const Provenance prov = make_provenance(app, "fit", fit_seed);
            print_run_line("fit", prov);
            const Dataset ds = load_from_options(fit_data);
            const EmpiricalCovariance cov =
                empirical_covariance(ds.data, !fit_data.no_standardize);
            ConvergenceConfig conv;
            conv.outer_tol = fit_outer_tol;
            conv.inner_tol = fit_inner_tol;
            conv.max_outer = fit_max_outer;
            conv.max_inner = fit_max_inner;
            const CoglassoFit f =
                fit(cov, Hyperparameters(fit_lw, fit_lb, fit_c), ds.partition, conv);
            write_fit_json(fit_out, make_fit_record(f, ds.partition, ds.labels, prov));
            std::cout << "fit: p=" << f.p() << ", edges="
                      << (f.adjacency.cast<long>().sum() / 2) << ", iterations=" << f.iterations
                      << ", converged=" << (f.converged ? "yes" : "no") << " -> " << fit_out
                      << "\n";
            if (!f.converged) std::cerr << "warning: fit did not converge\n";
        } else if (sel_cmd->parsed()) {
            const Provenance prov = make_provenance(app, "select", sel_seed);
            print_run_line("select", prov);
            const Dataset ds = load_from_options(sel_data);
            const EmpiricalCovariance cov =
                empirical_covariance(ds.data, !sel_data.no_standardize);
            CoglassoGrids grids;
            grids.lambda_w = default_lambda_grid(cov, sel_grid_w, sel_grid_ratio).values;
            grids.lambda_b = default_lambda_grid(cov, sel_grid_b, sel_grid_ratio).values;
            grids.c = parse_double_list(sel_c_list);
            StabilityConfig stab;
            stab.num_subsamples = sel_subsamples;
            stab.subsample_size = sel_subsample_size;
            stab.instability_threshold = sel_threshold;
            stab.seed = sel_seed;
            const SelectionResult sel =
                xstars(ds.data, grids.lambda_w, grids.lambda_b, grids.c, stab, ds.partition,
                       ConvergenceConfig{}, sel_max_iter);
            write_selection_json(sel_out, sel, grids, prov);
            std::cout << "selected: lambda_w=" << sel.lambda_w_hat
                      << ", lambda_b=" << sel.lambda_b_hat << ", c=" << sel.c_hat
                      << " (iterations=" << sel.iterations
                      << ", converged=" << (sel.converged ? "yes" : "no") << ") -> " << sel_out
                      << "\n";
        } else if (bench_cmd->parsed()) {
            const Provenance prov = make_provenance(app, "bench", bench_seed);
            print_run_line("bench", prov);
            BenchConfig cfg = bench_full_scale ? BenchConfig::full_scale() : BenchConfig{};
            cfg.run_oracle = !bench_skip_oracle;
            cfg.run_selection = !bench_skip_selection;
            std::size_t replicates = bench_replicates;
            if (bench_full_scale && bench_rep_opt->count() == 0) replicates = 100;
            const ScenarioSpec spec = scenario_preset(bench_scenario);
            const BenchReport report = run_scenario(spec, replicates, bench_seed, cfg);
            write_bench_report(bench_out, report, prov);
            std::cout << "bench scenario " << bench_scenario << ": replicates=" << replicates
                      << ", complete=" << (report.complete ? "yes" : "no")
                      << " -> " << bench_out << "\n";
            std::cout << "runtime: generation=" << report.seconds_generation
                      << "s, oracle=" << report.seconds_oracle
                      << "s, selection=" << report.seconds_selection << "s\n";
            for (const auto& row : summarize(report))
                std::cout << "  " << row.method << " " << row.kind << " " << row.metric
                          << ": median=" << row.median << " (q1=" << row.q1 << ", q3=" << row.q3
                          << ", n=" << row.count << ")\n";
        } else if (exp_cmd->parsed()) {
            const FitRecord rec = load_fit_json(exp_fit);
            const Provenance prov = rec.provenance;  // exports inherit the fit's provenance
            print_run_line("export", prov);
            if (!rec.converged)
                std::cerr << "warning: exporting a non-converged fit\n";
            const SignConvention sign =
                exp_sign == "paper" ? SignConvention::Paper : SignConvention::Standard;
            const NetworkExport net = make_network_export(rec, sign);
            write_network(exp_out, net, parse_export_format(exp_format));
            std::cout << "export: " << net.edges.size() << " edges (" << exp_format << ", "
                      << exp_sign << " sign) -> " << exp_out << "\n";
        }
        return 0;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
