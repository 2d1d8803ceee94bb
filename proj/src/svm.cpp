#include "grid/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "grid/rng.hpp"

namespace grid {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

SVMTrainResult train_linear_svm_detailed(const std::vector<const double*>& rows,
                                         std::size_t dim,
                                         const std::vector<int>& y,
                                         const SVMTrainOptions& opts) {
    const std::size_t n = rows.size();
    if (n == 0 || y.size() != n)
        throw std::invalid_argument("train_linear_svm: bad problem shape");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw std::invalid_argument("train_linear_svm: labels must be +-1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument(
            "train_linear_svm: both classes must be present");
    if (!(opts.C > 0.0))
        throw std::invalid_argument("train_linear_svm: C must be positive");

    // Q_ii for the bias-augmented rows (x_i, 1).
    std::vector<double> q_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 1.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double v = rows[i][j];
            if (!std::isfinite(v))
                throw std::invalid_argument(
                    "train_linear_svm: non-finite feature value");
            sq += v * v;
        }
        q_diag[i] = sq;
    }

    SVMTrainResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> w(dim, 0.0);
    double b = 0.0;

    Rng rng(derive_seed(opts.seed, 0x53564dULL));
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    const double inf = std::numeric_limits<double>::infinity();
    double shrink_hi = inf;   // alpha==0 entries with G above this get shrunk
    double shrink_lo = -inf;  // alpha==C entries with G below this get shrunk

    int epoch = 0;
    for (; epoch < opts.max_epochs; ++epoch) {
        rng.shuffle(active);
        double pg_max = -inf, pg_min = inf, violation = 0.0;

        for (std::size_t t = 0; t < active.size();) {
            const std::size_t i = active[t];
            const double yi = static_cast<double>(y[i]);
            const double G = yi * (dot(w.data(), rows[i], dim) + b) - 1.0;

            double pg = G;
            if (res.alpha[i] == 0.0) {
                if (G > shrink_hi) {  // confidently inactive, drop this epoch
                    active[t] = active.back();
                    active.pop_back();
                    continue;
                }
                if (G >= 0.0) pg = 0.0;
            } else if (res.alpha[i] == opts.C) {
                if (G < shrink_lo) {
                    active[t] = active.back();
                    active.pop_back();
                    continue;
                }
                if (G <= 0.0) pg = 0.0;
            }
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            violation = std::max(violation, std::abs(pg));

            if (std::abs(pg) > 1e-14) {
                const double old = res.alpha[i];
                const double next =
                    std::clamp(old - G / q_diag[i], 0.0, opts.C);
                if (next != old) {
                    const double delta = (next - old) * yi;
                    axpy(delta, rows[i], w.data(), dim);
                    b += delta;
                    res.alpha[i] = next;
                }
            }
            ++t;
        }

        res.final_violation = violation;
        if (violation < opts.eps) {
            if (active.size() == n) {
                res.converged = true;
                break;
            }
            // Re-check the full set before declaring convergence.
            active.resize(n);
            for (std::size_t i = 0; i < n; ++i) active[i] = i;
            shrink_hi = inf;
            shrink_lo = -inf;
            continue;
        }
        shrink_hi = (pg_max <= 0.0) ? inf : pg_max;
        shrink_lo = (pg_min >= 0.0) ? -inf : pg_min;
    }

    res.epochs = epoch;
    res.model.w = std::move(w);
    res.model.b = b;
    res.model.C = opts.C;
    return res;
}

LinearSVMModel train_linear_svm(const Matrix& X, const std::vector<int>& y,
                                const SVMTrainOptions& opts) {
    std::vector<const double*> rows(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        rows[i] = X.data.data() + i * X.cols;
    return train_linear_svm_detailed(rows, X.cols, y, opts).model;
}

double svm_score(const LinearSVMModel& model, const double* x, std::size_t n) {
    if (n != model.w.size())
        throw std::invalid_argument("svm_score: dimension mismatch");
    return dot(model.w.data(), x, n) + model.b;
}

double svm_score(const LinearSVMModel& model, const std::vector<double>& x) {
    return svm_score(model, x.data(), x.size());
}

}  // namespace grid
