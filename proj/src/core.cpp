#include "coglasso/core.hpp"

#include <cmath>
#include <string>

namespace coglasso {

double EmpiricalCovariance::offdiag_scale() const {
    const auto n = S.rows();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) sum += std::abs(S(i, j));
    return sum / static_cast<double>(n * (n - 1));
}

EmpiricalCovariance empirical_covariance(const Matrix& data, bool standardize) {
    const auto n = data.rows();
    const auto p = data.cols();
    if (n < 2) throw DataError("need at least 2 samples, got " + std::to_string(n));
    if (!data.allFinite()) throw DataError("data contains non-finite values");

    Matrix centered = data.rowwise() - data.colwise().mean();
    if (standardize) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double var = centered.col(j).squaredNorm() / static_cast<double>(n);
            if (var <= 0.0)
                throw DataError("column " + std::to_string(j) +
                                " is constant; cannot standardize");
            centered.col(j) /= std::sqrt(var);
        }
    }

    EmpiricalCovariance cov;
    cov.S = (centered.transpose() * centered) / static_cast<double>(n);
    // symmetrize away accumulation noise
    cov.S = ((cov.S + cov.S.transpose()) * 0.5).eval();
    cov.standardized = standardize;
    return cov;
}

LambdaGrid default_lambda_grid(const EmpiricalCovariance& S, int count, double ratio) {
    if (count < 2) throw ParameterError("grid count must be at least 2");
    if (ratio <= 0.0 || ratio >= 1.0) throw ParameterError("grid ratio must lie in (0, 1)");

    const auto p = S.S.rows();
    double lambda_max = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (i != j) lambda_max = std::max(lambda_max, std::abs(S.S(i, j)));

    LambdaGrid grid;
    if (lambda_max <= 0.0) {
        lambda_max = 1.0;
        grid.unit_fallback = true;
    }

    grid.values.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        grid.values[static_cast<std::size_t>(k)] =
            lambda_max * std::pow(ratio, static_cast<double>(k) / static_cast<double>(count - 1));
    return grid;
}

}  // namespace coglasso
