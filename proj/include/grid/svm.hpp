#pragma once

#include <cstdint>
#include <vector>

#include "grid/linalg.hpp"

namespace grid {

// Linear binary classifier: score(x) = w . x + b.
struct LinearSVMModel {
    std::vector<double> w;
    double b = 0.0;
    double C = 1.0;

    std::size_t dim() const { return w.size(); }
};

struct SVMTrainOptions {
    double C = 1.0;
    double eps = 1e-6;      // max projected-gradient violation at convergence
    int max_epochs = 10000;
    std::uint64_t seed = 1;  // per-epoch permutation
};

struct SVMTrainResult {
    LinearSVMModel model;
    std::vector<double> alpha;  // dual variables, 0 <= alpha_i <= C
    int epochs = 0;
    double final_violation = 0.0;
    bool converged = false;
};

// Soft-margin L2-regularized hinge loss,
//   min_{w,b} 1/2 (||w||^2 + b^2) + C sum_i max(0, 1 - y_i (w.x_i + b)),
// solved by dual coordinate descent with shrinking. The bias is an
// augmented always-1 feature regularized like the rest, so large C
// recovers the hard-margin solution on separable data. Deterministic for
// a fixed seed. y entries must be +-1 and both classes present.
SVMTrainResult train_linear_svm_detailed(const std::vector<const double*>& rows,
                                         std::size_t dim,
                                         const std::vector<int>& y,
                                         const SVMTrainOptions& opts);

LinearSVMModel train_linear_svm(const Matrix& X, const std::vector<int>& y,
                                const SVMTrainOptions& opts = {});

// Exact affine evaluation; throws on dimension mismatch.
double svm_score(const LinearSVMModel& model, const std::vector<double>& x);
double svm_score(const LinearSVMModel& model, const double* x, std::size_t n);

}  // namespace grid
