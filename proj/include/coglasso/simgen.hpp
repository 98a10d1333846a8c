#ifndef COGLASSO_SIMGEN_HPP
#define COGLASSO_SIMGEN_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "coglasso/core.hpp"
#include "coglasso/rng.hpp"

namespace coglasso {

// Parameters of one synthetic two-layer scenario. Layer Z is the smaller,
// fixed layer; layer X grows with the scenario id.
struct ScenarioSpec {
    int id = 0;
    std::size_t p_x = 40;
    std::size_t clusters_x = 3;
    double within_prob_x = 0.25;
    std::size_t extra_edges_x = 7;

    std::size_t p_z = 20;
    std::size_t clusters_z = 2;
    double within_prob_z = 0.35;
    std::size_t extra_edges_z = 4;

    double epsilon = 0.3;            // diagonal repair constant
    double target_activation = 0.40; // cross-block nonzero fraction aimed for
    std::size_t n_regression = 100;  // observations drawn per layer for the cross block
    std::size_t n_replicate = 50;    // rows per simulated replicate

    std::size_t p() const { return p_x + p_z; }

    void validate() const {
        if (p_x < 1 || p_z < 1 || clusters_x < 1 || clusters_z < 1)
            throw ParameterError("scenario sizes must be positive");
        if (within_prob_x <= 0 || within_prob_x > 1 || within_prob_z <= 0 || within_prob_z > 1)
            throw ParameterError("within-cluster probabilities must lie in (0, 1]");
        if (epsilon <= 0) throw ParameterError("epsilon must be positive");
        if (target_activation < 0 || target_activation > 1)
            throw ParameterError("target activation must lie in [0, 1]");
        if (n_regression < 2 || n_replicate < 2)
            throw ParameterError("sample counts must be at least 2");
    }
};

ScenarioSpec scenario_preset(int id);

// Within-layer cluster network: near-equal contiguous clusters, independent
// within-cluster edges, plus exactly extra_edges bridges between clusters.
struct ClusterGraph {
    BinaryMatrix adjacency;
    std::vector<std::size_t> cluster_assignment;
    std::vector<std::pair<std::size_t, std::size_t>> extra_edge_list;

    std::size_t edge_count() const;
};

ClusterGraph cluster_graph(std::size_t p, std::size_t k_clusters, double within_prob,
                           std::size_t extra_edges, Rng& rng);

// Precision block with the graph's support: off-diagonal entries equal
// edge_value on edges, diagonal lifted to guarantee positive definiteness.
Matrix block_precision(const ClusterGraph& graph, double edge_value, Rng& rng);

constexpr double kDefaultEdgeValue = 0.3;

// Cross-layer coefficient block fitted by L1-penalized least squares.
struct RegressionBlock {
    Matrix B;                  // p_z x p_x
    double activation = 0.0;   // achieved nonzero fraction
    double penalty_used = 0.0;
    bool fallback_weakest = false;  // grid never activated anything
};

RegressionBlock sparse_multireg(const Matrix& X_data, const Matrix& Z_data,
                                double target_activation, const std::vector<double>& penalty_grid);

// Assembles theta = [[theta_xx, B^T], [B, theta_zz]] + epsilon*I, doubling
// epsilon (up to 10 times) until positive definite.
GroundTruthModel assemble_theta(const Matrix& theta_xx, const Matrix& theta_zz,
                                const RegressionBlock& block, double epsilon);

// n rows drawn from a mean-zero multivariate normal with covariance sigma.
Matrix sample_mvn(const Matrix& sigma, std::size_t n, Rng& rng);

struct SimulatedScenario {
    GroundTruthModel truth;
    RegressionBlock cross_block;
    std::vector<Matrix> replicates;
};

SimulatedScenario generate_replicates(const ScenarioSpec& spec, std::size_t num_replicates,
                                      std::uint64_t seed);

}  // namespace coglasso

#endif
