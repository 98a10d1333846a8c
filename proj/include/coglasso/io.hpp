#ifndef COGLASSO_IO_HPP
#define COGLASSO_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "coglasso/bench.hpp"
#include "coglasso/core.hpp"
#include "coglasso/selection.hpp"
#include "coglasso/simgen.hpp"
#include "coglasso/solver.hpp"
#include "coglasso/version.hpp"

namespace coglasso {

// Reproducibility stamp embedded in every output file. Contains no
// wall-clock data, so identical runs produce identical bytes.
struct Provenance {
    std::uint64_t seed = 0;
    std::string config_hash = "0";
    std::string version = kVersion;

    bool operator==(const Provenance&) const = default;
};

struct DatasetSpec {
    std::string path;       // single table, or the layer-X table when path_z is set
    std::string path_z;     // optional layer-Z table
    std::size_t split_px = 0;  // layer-X width when loading a single table
    char delimiter = '\0';  // '\0' = auto-detect (comma default, tab recognized)
    bool header = true;
    bool standardize = true;
};

struct Dataset {
    Matrix data;  // layer-X columns first
    LayerPartition partition{1, 1};
    std::vector<std::string> labels;
};

Dataset load_dataset(const DatasetSpec& spec);

// ---- matrix / table files -------------------------------------------------

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& labels, const Provenance& prov);
void write_adjacency_csv(const std::string& path, const BinaryMatrix& m,
                         const std::vector<std::string>& labels, const Provenance& prov);

// ---- network export -------------------------------------------------------

enum class ExportFormat { EdgeList, GraphML, Json };
enum class SignConvention { Paper, Standard };

ExportFormat parse_export_format(const std::string& name);

struct NetworkEdge {
    std::size_t a = 0;
    std::size_t b = 0;      // a < b
    double weight = 0.0;    // partial correlation in the chosen convention
    int quartile = 1;       // 1 (weakest) .. 4 (strongest) by |weight|

    bool operator==(const NetworkEdge&) const = default;
};

struct NetworkExport {
    std::vector<std::string> labels;
    std::vector<int> layer_of;  // 0 = X, 1 = Z
    std::vector<NetworkEdge> edges;
    Hyperparameters hyper;
    SignConvention convention = SignConvention::Paper;
    Provenance provenance;
};

// Serializable view of a fit: hyperparameters, structure, precision values,
// convergence record, provenance.
struct FitRecord {
    Hyperparameters hyper;
    LayerPartition partition{1, 1};
    std::vector<std::string> labels;
    BinaryMatrix adjacency;
    Matrix theta;
    int iterations = 0;
    bool converged = false;
    double inversion_residual = 0.0;
    Provenance provenance;
};

FitRecord make_fit_record(const CoglassoFit& fit, const LayerPartition& partition,
                          const std::vector<std::string>& labels, const Provenance& prov);

// Edge weights are partial correlations of the recovered precision matrix.
// The `paper` convention emits theta_ij / sqrt(theta_ii * theta_jj) as-is;
// `standard` negates it.
NetworkExport make_network_export(const FitRecord& record, SignConvention sign);

std::string network_to_string(const NetworkExport& net, ExportFormat format);
void write_network(const std::string& path, const NetworkExport& net, ExportFormat format);
NetworkExport load_network_json(const std::string& path);

bool fit_records_equal(const FitRecord& a, const FitRecord& b);

std::string fit_to_json_string(const FitRecord& record);
void write_fit_json(const std::string& path, const FitRecord& record);
FitRecord load_fit_json(const std::string& path);

// ---- selection files ------------------------------------------------------

std::string selection_to_json_string(const SelectionResult& sel, const CoglassoGrids& grids,
                                     const Provenance& prov);
void write_selection_json(const std::string& path, const SelectionResult& sel,
                          const CoglassoGrids& grids, const Provenance& prov);

// ---- bench files ----------------------------------------------------------

std::string bench_records_csv(const BenchReport& report, const Provenance& prov);
std::string bench_summary_json(const BenchReport& report, const Provenance& prov);
void write_bench_report(const std::string& dir, const BenchReport& report, const Provenance& prov);

// ---- simulate files -------------------------------------------------------

void write_scenario(const std::string& dir, const ScenarioSpec& spec, const SimulatedScenario& sim,
                    const Provenance& prov);

}  // namespace coglasso

#endif
