#ifndef COGLASSO_METRICS_HPP
#define COGLASSO_METRICS_HPP

#include "coglasso/core.hpp"

namespace coglasso {

// Edge-recovery confusion counts over unordered off-diagonal pairs.
struct Confusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

Confusion confusion(const BinaryMatrix& truth, const BinaryMatrix& estimate);

// F1 = 2 * precision * recall / (precision + recall); 0 when TP = 0.
double f1(const Confusion& c);

// Matthews correlation coefficient; 0 when any denominator factor vanishes.
double mcc(const Confusion& c);

// Symmetrized Gaussian Kullback-Leibler divergence between the models
// defined by two precision matrices:
//   0.5 * (tr(theta_true * theta_hat^-1) + tr(theta_hat * theta_true^-1)) - p
// Zero exactly when the two matrices coincide.
double kld(const Matrix& theta_true, const Matrix& theta_hat);

}  // namespace coglasso

#endif
