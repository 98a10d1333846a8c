#ifndef COGLASSO_CORE_HPP
#define COGLASSO_CORE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "coglasso/errors.hpp"

namespace coglasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

enum class Layer { X, Z };

// Split of the p variables into two layers: X occupies indices
// [0, p_x), Z occupies [p_x, p). Ingestion reorders columns on load so the
// block structure is index-computable.
class LayerPartition {
public:
    LayerPartition(std::size_t p_x, std::size_t p_z) : p_x_(p_x), p_z_(p_z) {
        if (p_x < 1 || p_z < 1)
            throw ParameterError("layer sizes must be at least 1 (got p_x=" +
                                 std::to_string(p_x) + ", p_z=" + std::to_string(p_z) + ")");
    }

    std::size_t p_x() const { return p_x_; }
    std::size_t p_z() const { return p_z_; }
    std::size_t p() const { return p_x_ + p_z_; }

    Layer layer(std::size_t i) const { return i < p_x_ ? Layer::X : Layer::Z; }
    bool same_layer(std::size_t i, std::size_t j) const { return layer(i) == layer(j); }

private:
    std::size_t p_x_;
    std::size_t p_z_;
};

// Empirical variance-covariance matrix, 1/n normalization.
struct EmpiricalCovariance {
    Matrix S;
    bool standardized = false;

    std::size_t p() const { return static_cast<std::size_t>(S.rows()); }

    // Mean absolute off-diagonal entry; the unit-free scale used by the
    // solver's relative convergence tolerances.
    double offdiag_scale() const;
};

// Block penalty matrix: entries are lambda_w within a layer and lambda_b
// across layers. Materialized lazily through operator().
class PenaltyMatrix {
public:
    PenaltyMatrix(double lambda_w, double lambda_b, LayerPartition partition)
        : lambda_w_(lambda_w), lambda_b_(lambda_b), partition_(partition) {
        if (lambda_w < 0 || lambda_b < 0)
            throw ParameterError("penalty parameters must be nonnegative");
    }

    double operator()(std::size_t i, std::size_t j) const {
        return partition_.same_layer(i, j) ? lambda_w_ : lambda_b_;
    }

    double lambda_w() const { return lambda_w_; }
    double lambda_b() const { return lambda_b_; }
    const LayerPartition& partition() const { return partition_; }

private:
    double lambda_w_;
    double lambda_b_;
    LayerPartition partition_;
};

inline PenaltyMatrix make_penalty_matrix(double lambda_w, double lambda_b,
                                         const LayerPartition& partition) {
    return PenaltyMatrix(lambda_w, lambda_b, partition);
}

// Hyperparameter triplet (lambda_w, lambda_b, c) with the derived rescaling
// alpha = 1/(1+c). c is capped to keep alpha well away from underflow.
struct Hyperparameters {
    double lambda_w = 0;
    double lambda_b = 0;
    double c = 0;

    static constexpr double kMaxCollaboration = 1e6;

    Hyperparameters() = default;
    Hyperparameters(double lw, double lb, double collab) : lambda_w(lw), lambda_b(lb), c(collab) {
        if (lw < 0 || lb < 0) throw ParameterError("penalty parameters must be nonnegative");
        if (collab < 0) throw ParameterError("collaboration value c must be nonnegative");
        if (collab > kMaxCollaboration)
            throw ParameterError("collaboration value c exceeds cap " +
                                 std::to_string(kMaxCollaboration));
        if (alpha() < 1e-7) throw ParameterError("alpha = 1/(1+c) underflow");
    }

    double alpha() const { return 1.0 / (1.0 + c); }
};

// Result of a coglasso (or glasso) fit. Column i of B_hat stores the i-th
// row-regression coefficients with a structural zero at position i.
struct CoglassoFit {
    Matrix W;
    Matrix B_hat;
    Matrix Theta_hat;
    BinaryMatrix adjacency;
    Hyperparameters hyper;
    int iterations = 0;
    bool converged = false;
    // max |W * Theta_hat - I| recorded at recovery time
    double inversion_residual = 0.0;

    std::size_t p() const { return static_cast<std::size_t>(W.rows()); }
};

// Simulated ground truth: precision matrix, its inverse, and the true
// structure it encodes.
struct GroundTruthModel {
    Matrix theta;
    Matrix sigma;
    BinaryMatrix adjacency;
    LayerPartition partition{1, 1};
    double epsilon = 0.0;   // diagonal constant actually applied
    int epsilon_doublings = 0;
    int scenario_id = 0;

    std::size_t p() const { return static_cast<std::size_t>(theta.rows()); }
};

// S = (1/n) Xc^T Xc with Xc column-centered; standardize rescales columns to
// unit variance so diag(S) = 1.
EmpiricalCovariance empirical_covariance(const Matrix& data, bool standardize);

// Log-spaced descending grid from lambda_max = max off-diagonal |S_ij| down
// to ratio * lambda_max. When S has no off-diagonal signal the head falls
// back to 1.0 and the flag records it.
struct LambdaGrid {
    std::vector<double> values;
    bool unit_fallback = false;
};

LambdaGrid default_lambda_grid(const EmpiricalCovariance& S, int count = 10, double ratio = 0.1);

}  // namespace coglasso

#endif
