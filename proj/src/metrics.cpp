#include "coglasso/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace coglasso {

namespace {

void check_adjacency(const BinaryMatrix& A, const char* name) {
    if (A.rows() != A.cols()) throw ParameterError(std::string(name) + " is not square");
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (A(i, i) != 0) throw ParameterError(std::string(name) + " has a nonzero diagonal");
        for (Eigen::Index j = i + 1; j < A.cols(); ++j)
            if (A(i, j) != A(j, i))
                throw ParameterError(std::string(name) + " is not symmetric");
    }
}

// Cholesky with an informative failure: reports the smallest eigenvalue.
Eigen::LLT<Matrix> checked_llt(const Matrix& M, const char* name) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
        throw NumericalError(std::string(name) + " is not positive definite (smallest eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    return llt;
}

}  // namespace

Confusion confusion(const BinaryMatrix& truth, const BinaryMatrix& estimate) {
    check_adjacency(truth, "truth adjacency");
    check_adjacency(estimate, "estimated adjacency");
    if (truth.rows() != estimate.rows())
        throw ParameterError("adjacency shapes differ: " + std::to_string(truth.rows()) + " vs " +
                             std::to_string(estimate.rows()));
    Confusion c;
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = i + 1; j < truth.cols(); ++j) {
            const bool t = truth(i, j) != 0;
            const bool e = estimate(i, j) != 0;
            if (t && e)
                ++c.tp;
            else if (!t && e)
                ++c.fp;
            else if (t && !e)
                ++c.fn;
            else
                ++c.tn;
        }
    return c;
}

double f1(const Confusion& c) {
    if (c.tp == 0) return 0.0;
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 2.0 * precision * recall / (precision + recall);
}

double mcc(const Confusion& c) {
    const double pp = static_cast<double>(c.tp + c.fp);
    const double ap = static_cast<double>(c.tp + c.fn);
    const double pn = static_cast<double>(c.tn + c.fp);
    const double an = static_cast<double>(c.tn + c.fn);
    if (pp == 0 || ap == 0 || pn == 0 || an == 0) return 0.0;
    const double num =
        static_cast<double>(c.tp) * static_cast<double>(c.tn) -
        static_cast<double>(c.fp) * static_cast<double>(c.fn);
    return num / std::sqrt(pp * ap * pn * an);
}

double kld(const Matrix& theta_true, const Matrix& theta_hat) {
    if (theta_true.rows() != theta_true.cols() || theta_hat.rows() != theta_hat.cols())
        throw ParameterError("precision matrices must be square");
    if (theta_true.rows() != theta_hat.rows())
        throw ParameterError("precision matrix shapes differ");
    const auto p = theta_true.rows();

    const auto llt_true = checked_llt(theta_true, "true precision matrix");
    if (theta_true == theta_hat) return 0.0;  // identical models, exactly
    const auto llt_hat = checked_llt(theta_hat, "estimated precision matrix");

    const double tr_true_hat_inv = llt_hat.solve(theta_true).trace();
    const double tr_hat_true_inv = llt_true.solve(theta_hat).trace();
    // symmetrized Gaussian KL divergence; zero exactly when the matrices agree
    return 0.5 * (tr_true_hat_inv + tr_hat_true_inv) - static_cast<double>(p);
}

}  // namespace coglasso
