#include "coglasso/simgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "coglasso/solver.hpp"

namespace coglasso {

namespace {

Matrix symmetric_inverse(const Matrix& M, const char* name) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
        throw NumericalError(std::string(name) + " is not positive definite (smallest eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    Matrix inv = llt.solve(Matrix::Identity(M.rows(), M.cols()));
    return 0.5 * (inv + inv.transpose());
}

Matrix centered(const Matrix& data) {
    return data.rowwise() - data.colwise().mean();
}

// Descending penalty grid for the cross-block regression, anchored at the
// weakest penalty that zeroes every coefficient.
std::vector<double> regression_penalty_grid(const Matrix& X, const Matrix& Z, int count,
                                            double ratio) {
    const double n = static_cast<double>(X.rows());
    const Matrix cxz = (centered(X).transpose() * centered(Z)) / n;
    double lambda_max = cxz.cwiseAbs().maxCoeff();
    if (lambda_max <= 0.0) lambda_max = 1.0;
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] =
            lambda_max * std::pow(ratio, static_cast<double>(k) / static_cast<double>(count - 1));
    return grid;
}

}  // namespace

ScenarioSpec scenario_preset(int id) {
    ScenarioSpec spec;
    spec.id = id;
    switch (id) {
        case 1:
            spec.p_x = 40;
            spec.within_prob_x = 0.25;
            spec.extra_edges_x = 7;
            spec.epsilon = 0.3;
            break;
        case 2:
            spec.p_x = 80;
            spec.within_prob_x = 1.0 / 6.0;
            spec.extra_edges_x = 13;
            spec.epsilon = 0.3;
            break;
        case 3:
            spec.p_x = 130;
            spec.within_prob_x = 1.0 / 12.0;
            spec.extra_edges_x = 17;
            spec.epsilon = 0.4;
            break;
        default:
            throw ParameterError("unknown scenario id " + std::to_string(id) +
                                 " (expected 1, 2 or 3)");
    }
    return spec;
}

std::size_t ClusterGraph::edge_count() const {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != 0) ++count;
    return count;
}

ClusterGraph cluster_graph(std::size_t p, std::size_t k_clusters, double within_prob,
                           std::size_t extra_edges, Rng& rng) {
    if (k_clusters < 1 || k_clusters > p)
        throw ParameterError("cluster count must lie in [1, p]");
    ClusterGraph graph;
    graph.adjacency = BinaryMatrix::Zero(static_cast<Eigen::Index>(p),
                                         static_cast<Eigen::Index>(p));
    graph.cluster_assignment.resize(p);

    // contiguous near-equal clusters; the first p % k clusters take the extra node
    const std::size_t base = p / k_clusters;
    const std::size_t remainder = p % k_clusters;
    std::size_t node = 0;
    for (std::size_t cl = 0; cl < k_clusters; ++cl) {
        const std::size_t size = base + (cl < remainder ? 1 : 0);
        for (std::size_t s = 0; s < size; ++s) graph.cluster_assignment[node++] = cl;
    }

    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (graph.cluster_assignment[i] == graph.cluster_assignment[j] &&
                rng.bernoulli(within_prob)) {
                graph.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1;
                graph.adjacency(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1;
            }

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (graph.cluster_assignment[i] != graph.cluster_assignment[j])
                candidates.emplace_back(i, j);
    if (extra_edges > candidates.size())
        throw ParameterError("requested " + std::to_string(extra_edges) +
                             " between-cluster edges but only " +
                             std::to_string(candidates.size()) + " pairs exist");

    // partial Fisher-Yates for a uniform sample of distinct pairs
    for (std::size_t e = 0; e < extra_edges; ++e) {
        const std::size_t pick =
            e + static_cast<std::size_t>(rng.uniform_below(candidates.size() - e));
        std::swap(candidates[e], candidates[pick]);
        const auto [a, b] = candidates[e];
        graph.adjacency(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1;
        graph.adjacency(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1;
        graph.extra_edge_list.emplace_back(a, b);
    }
    return graph;
}

Matrix block_precision(const ClusterGraph& graph, double edge_value, Rng& /*rng*/) {
    if (edge_value == 0.0) throw ParameterError("edge value must be nonzero");
    Matrix theta = edge_value * graph.adjacency.cast<double>();
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
    const double diag = std::abs(es.eigenvalues().minCoeff()) + 0.1 + edge_value;
    theta.diagonal().array() += diag;
    return theta;
}

RegressionBlock sparse_multireg(const Matrix& X_data, const Matrix& Z_data,
                                double target_activation,
                                const std::vector<double>& penalty_grid) {
    const auto n = X_data.rows();
    if (n < 2) throw DataError("need at least 2 samples for the cross-block regression");
    if (Z_data.rows() != n)
        throw DataError("X and Z sample counts differ: " + std::to_string(n) + " vs " +
                        std::to_string(Z_data.rows()));
    if (penalty_grid.empty()) throw ParameterError("penalty grid is empty");
    for (std::size_t k = 1; k < penalty_grid.size(); ++k)
        if (penalty_grid[k] > penalty_grid[k - 1])
            throw ParameterError("penalty grid must descend from strong to weak");

    const auto p_x = X_data.cols();
    const auto p_z = Z_data.cols();
    const Matrix Xc = centered(X_data);
    const Matrix Zc = centered(Z_data);
    const double inv_n = 1.0 / static_cast<double>(n);
    const Matrix gram = (Xc.transpose() * Xc) * inv_n;
    const Matrix cxz = (Xc.transpose() * Zc) * inv_n;
    for (Eigen::Index k = 0; k < p_x; ++k)
        if (gram(k, k) <= 0.0)
            throw NumericalError("predictor column " + std::to_string(k) + " has zero variance");

    const double tol = 1e-8 * std::max(1.0, cxz.cwiseAbs().maxCoeff());
    const double total = static_cast<double>(p_x * p_z);

    Matrix B = Matrix::Zero(p_z, p_x);  // row j holds the coefficients of response j
    RegressionBlock best;
    best.B = B;
    double best_gap = std::abs(0.0 - target_activation) + 1.0;
    bool any_active = false;

    for (double lambda : penalty_grid) {
        for (Eigen::Index j = 0; j < p_z; ++j) {
            Vector b = B.row(j).transpose();  // warm start from the previous penalty
            Vector t = gram * b;
            for (int sweep = 0; sweep < 1000; ++sweep) {
                double max_delta = 0.0;
                for (Eigen::Index k = 0; k < p_x; ++k) {
                    const double r = cxz(k, j) - (t(k) - gram(k, k) * b(k));
                    const double bnew = soft_threshold(r, lambda) / gram(k, k);
                    const double delta = bnew - b(k);
                    if (delta != 0.0) {
                        b(k) = bnew;
                        t += delta * gram.col(k);
                        max_delta = std::max(max_delta, std::abs(delta));
                    }
                }
                if (max_delta <= tol) break;
            }
            B.row(j) = b.transpose();
        }
        const double activation =
            static_cast<double>((B.array() != 0.0).count()) / total;
        if (activation > 0.0) any_active = true;
        const double gap = std::abs(activation - target_activation);
        if (gap < best_gap) {  // strict: ties go to the sparser (earlier) penalty
            best_gap = gap;
            best.B = B;
            best.activation = activation;
            best.penalty_used = lambda;
        }
    }

    if (!any_active && target_activation > 0.0) {
        best.B = B;  // weakest penalty's coefficients (all zero)
        best.activation = 0.0;
        best.penalty_used = penalty_grid.back();
        best.fallback_weakest = true;
    }
    return best;
}

GroundTruthModel assemble_theta(const Matrix& theta_xx, const Matrix& theta_zz,
                                const RegressionBlock& block, double epsilon) {
    if (epsilon <= 0) throw ParameterError("epsilon must be positive");
    const auto p_x = theta_xx.rows();
    const auto p_z = theta_zz.rows();
    if (theta_xx.cols() != p_x || theta_zz.cols() != p_z)
        throw ParameterError("precision blocks must be square");
    if (block.B.rows() != p_z || block.B.cols() != p_x)
        throw ParameterError("cross block must be p_z x p_x");

    const auto p = p_x + p_z;
    Matrix base(p, p);
    base.topLeftCorner(p_x, p_x) = theta_xx;
    base.bottomRightCorner(p_z, p_z) = theta_zz;
    base.bottomLeftCorner(p_z, p_x) = block.B;
    base.topRightCorner(p_x, p_z) = block.B.transpose();

    GroundTruthModel model;
    model.partition = LayerPartition(static_cast<std::size_t>(p_x), static_cast<std::size_t>(p_z));
    double eps = epsilon;
    int doublings = 0;
    for (;;) {
        Matrix candidate = base;
        candidate.diagonal().array() += eps;
        Eigen::SelfAdjointEigenSolver<Matrix> es(candidate, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() > 0.0) {
            model.theta = candidate;
            break;
        }
        if (++doublings > 10)
            throw NumericalError("diagonal repair failed: theta still indefinite after 10 "
                                 "doublings of epsilon (last tried " + std::to_string(eps) + ")");
        eps *= 2.0;
    }
    model.epsilon = eps;
    model.epsilon_doublings = doublings;
    model.sigma = symmetric_inverse(model.theta, "assembled precision matrix");
    model.adjacency = BinaryMatrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (model.theta(i, j) != 0.0) {
                model.adjacency(i, j) = 1;
                model.adjacency(j, i) = 1;
            }
    return model;
}

Matrix sample_mvn(const Matrix& sigma, std::size_t n, Rng& rng) {
    if (sigma.rows() != sigma.cols()) throw ParameterError("covariance must be square");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
        throw NumericalError("covariance factorization failed (smallest eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    const Matrix L = llt.matrixL();
    const auto p = sigma.rows();
    Matrix data(static_cast<Eigen::Index>(n), p);
    Vector z(p);
    for (std::size_t row = 0; row < n; ++row) {
        for (Eigen::Index k = 0; k < p; ++k) z(k) = rng.normal();
        data.row(static_cast<Eigen::Index>(row)) = (L * z).transpose();
    }
    return data;
}

SimulatedScenario generate_replicates(const ScenarioSpec& spec, std::size_t num_replicates,
                                      std::uint64_t seed) {
    spec.validate();
    Rng master(seed);

    Rng rng_gx = master.child(1);
    Rng rng_gz = master.child(2);
    const ClusterGraph graph_x =
        cluster_graph(spec.p_x, spec.clusters_x, spec.within_prob_x, spec.extra_edges_x, rng_gx);
    const ClusterGraph graph_z =
        cluster_graph(spec.p_z, spec.clusters_z, spec.within_prob_z, spec.extra_edges_z, rng_gz);

    const Matrix theta_xx = block_precision(graph_x, kDefaultEdgeValue, rng_gx);
    const Matrix theta_zz = block_precision(graph_z, kDefaultEdgeValue, rng_gz);

    Rng rng_x = master.child(3);
    Rng rng_z = master.child(4);
    const Matrix X_data =
        sample_mvn(symmetric_inverse(theta_xx, "layer-X precision block"), spec.n_regression,
                   rng_x);
    const Matrix Z_data =
        sample_mvn(symmetric_inverse(theta_zz, "layer-Z precision block"), spec.n_regression,
                   rng_z);

    SimulatedScenario sim;
    sim.cross_block = sparse_multireg(X_data, Z_data, spec.target_activation,
                                      regression_penalty_grid(X_data, Z_data, 60, 1e-3));
    sim.truth = assemble_theta(theta_xx, theta_zz, sim.cross_block, spec.epsilon);
    sim.truth.scenario_id = spec.id;

    sim.replicates.reserve(num_replicates);
    for (std::size_t r = 0; r < num_replicates; ++r) {
        Rng rng_r = master.child(1000 + r);
        sim.replicates.push_back(sample_mvn(sim.truth.sigma, spec.n_replicate, rng_r));
    }
    return sim;
}

}  // namespace coglasso
