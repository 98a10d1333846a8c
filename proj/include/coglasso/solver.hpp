#ifndef COGLASSO_SOLVER_HPP
#define COGLASSO_SOLVER_HPP

#include <cstddef>
#include <vector>

#include "coglasso/core.hpp"

namespace coglasso {

// One row-regression subproblem: variable i against the rest, in the reduced
// (p-1)-dimensional index space with row/column i removed.
struct RowProblem {
    std::size_t i = 0;             // active variable, full-index
    Vector s_i;                    // column i of S, entry i removed
    Matrix W_sub;                  // W without row/column i
    Vector lambda_i;               // column i of the penalty matrix, diagonal removed
    std::vector<bool> layer_mask;  // true where the reduced coordinate lies in layer X
    double tol_scale = 1.0;        // mean |S off-diagonal|, scales relative tolerances
};

struct ConvergenceConfig {
    double outer_tol = 1e-4;  // relative, on the mean W off-diagonal change per sweep
    double inner_tol = 1e-4;  // relative, on the max coordinate change per sweep
    int max_outer = 100;
    int max_inner = 1000;

    void validate() const {
        if (outer_tol <= 0 || inner_tol <= 0)
            throw ParameterError("convergence tolerances must be positive");
        if (max_outer < 1 || max_inner < 1)
            throw ParameterError("iteration caps must be at least 1");
    }
};

inline double soft_threshold(double r, double t) {
    if (r > t) return r - t;
    if (r < -t) return r + t;
    return 0.0;
}

RowProblem make_row_problem(const EmpiricalCovariance& S, const Matrix& W,
                            const PenaltyMatrix& penalty, std::size_t i);

// Single-penalty coordinate update: soft_threshold(r, lambda) / W_jj with
// r = S_ji - sum_{k != j} W_jk beta_k.
double glasso_coordinate_update(const RowProblem& problem, const Vector& beta, std::size_t j,
                                double lambda);

// Collaborative update. With A the layer containing coordinate j and
// alpha = 1/(1+c):
//   r = alpha*S_ji - sum_{k in A, k != j} W_jk beta_k
//       - alpha*(1-c) * sum_{k not in A} W_jk beta_k
// and the penalty interval becomes (-alpha*Lambda_ji, alpha*Lambda_ji).
// Collapses exactly to the single-penalty rule when c = 0.
double coglasso_coordinate_update(const RowProblem& problem, const Vector& beta, std::size_t j,
                                  const Hyperparameters& hyper);

struct RowSolution {
    Vector beta;
    bool converged = false;
    int sweeps = 0;
};

// Cycles the collaborative update over all coordinates until the largest
// coordinate change in a full sweep drops below inner_tol * tol_scale.
RowSolution solve_row(const RowProblem& problem, const Hyperparameters& hyper,
                      const ConvergenceConfig& cfg, const Vector& warm_start);

// Full coglasso estimation. Initializes W = S with W_ii = S_ii + lambda_w,
// then cycles row problems, updating row/column i of W to W_sub * beta_i
// after each solve, until the mean absolute off-diagonal change of W over a
// sweep drops below outer_tol * scale. An optional previous fit seeds W and
// B_hat (grid warm start).
CoglassoFit fit(const EmpiricalCovariance& S, const Hyperparameters& hyper,
                const LayerPartition& partition, const ConvergenceConfig& cfg = {},
                const CoglassoFit* warm = nullptr);

// Plain graphical lasso: single penalty, no layer structure. Shares the
// c = 0 code path of fit, so fit(S, {lambda, lambda, 0}, ...) matches it
// exactly.
CoglassoFit fit_glasso(const EmpiricalCovariance& S, double lambda,
                       const ConvergenceConfig& cfg = {}, const CoglassoFit* warm = nullptr);

struct PrecisionRecovery {
    Matrix theta;
    double inversion_residual = 0.0;  // max |W * theta - I|
};

// Dual recovery of the precision matrix from (W, B_hat):
//   theta_ii    = 1 / (W_ii - W_{i,\i} beta_i)
//   theta_{\i,i} = -beta_i * theta_ii
// symmetrized by averaging. Preserves the support of B_hat exactly.
PrecisionRecovery recover_precision(const Matrix& W, const Matrix& B_hat);

// OR-symmetrized support: A_ij = 1 iff |B_ij| > eps or |B_ji| > eps, i != j.
BinaryMatrix extract_adjacency(const Matrix& B_hat, double eps = 0.0);

// Stationarity residuals of a converged fit: active coordinates must satisfy
// the subgradient equation, inactive ones must fall inside the penalty
// interval. Each row is evaluated against its own sweep state, reconstructed
// by replaying the W updates from the returned fit (a no-op at c = 0, where
// the converged W is a joint fixed point).
struct KktReport {
    double max_active_residual = 0.0;
    double max_inactive_excess = 0.0;
};

KktReport kkt_residuals(const EmpiricalCovariance& S, const LayerPartition& partition,
                        const CoglassoFit& fit);

}  // namespace coglasso

#endif
