#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grid/dsp.hpp"
#include "grid/linalg.hpp"
#include "grid/signal.hpp"

namespace grid {

// Tunables shared by every feature space. Defaults are the working values;
// the CLI can override C-like knobs per run.
struct FeatureParams {
    int pca_k = 100;
    int rica_k = 80;
    int hist_bins = kHistogramBins;
    double hist_lo = kHistogramLo;
    double hist_hi = kHistogramHi;
    int filter_order = 8;
    double filter_cutoff_hz = 23.0;
    bool zero_phase_filter = false;  // forward-backward instead of causal
    double rica_lambda = 1.0;
    int rica_max_iter = 500;
    std::uint64_t seed = 0;  // drives RICA initialization
};

struct FeatureSpaceSpec {
    std::string id;
    FeatureParams params;
};

// All registered space ids, in report order.
const std::vector<std::string>& all_space_ids();
bool is_registered_space(const std::string& id);

// Output dimension for canonical 6x1600 recordings.
std::size_t space_dim(const FeatureSpaceSpec& spec);

using ChannelRanges = std::array<std::pair<double, double>, kNumChannels>;

// Base features of one canonical recording. raw_hist bins each channel over
// a range fitted on training data, so it needs `ranges`; every other space
// is stateless. Throws on a non-canonical shape.
FeatureVector extract_base(const FeatureSpaceSpec& spec, const FTSignal& signal,
                           const ChannelRanges* ranges = nullptr);

struct PCAResult {
    std::vector<double> mean;        // d
    Matrix basis;                    // d x k, columns orthonormal
    std::vector<double> eigenvalues; // k, descending
    double total_variance = 0.0;     // trace of the sample covariance
};

// Top-k principal components of the rows of X (sample covariance, n-1
// denominator). Uses the n x n Gram matrix when n < d. Sign convention:
// the largest-magnitude entry of each basis column is positive.
PCAResult pca_fit(const Matrix& X, std::size_t k);

// RICA objective J(W) = (1/n) sum_i ||W^T W x_i - x_i||^2
//                     + (lambda/n) sum_i sum_j log cosh(w_j . x_i)
// for W with shape k x d. Returns J and fills grad (k x d) when non-null.
double rica_objective(const Matrix& W, const Matrix& X, double lambda,
                      Matrix* grad = nullptr);

// Minimizes the RICA objective by L-BFGS with Armijo backtracking from a
// seeded random orthonormal initialization. Stops when the gradient
// max-norm drops below grad_tol or after max_iter iterations.
Matrix rica_fit(const Matrix& X, std::size_t k, double lambda, int max_iter,
                std::uint64_t seed, double grad_tol = 1e-6);

std::vector<double> rica_transform(const Matrix& weights,
                                   const std::vector<double>& x);

// Everything fitted on a training split: raw_hist bin ranges, the per-
// dimension standardizer, and the optional PCA/RICA stages. Immutable
// after fit; apply() is pure.
struct FittedExtractor {
    FeatureSpaceSpec spec;
    std::size_t base_dim = 0;
    std::size_t out_dim = 0;

    ChannelRanges raw_hist_ranges{};
    bool has_raw_hist = false;

    std::vector<double> std_mean;   // base_dim
    std::vector<double> std_scale;  // base_dim, floored stds

    Matrix pca_basis;                    // base_dim x pca_k when used
    std::vector<double> pca_mean;        // base_dim when used
    std::vector<double> pca_eigenvalues; // retained, descending

    std::vector<double> rica_in_mean;  // pca_k; whitening of PCA outputs
    std::vector<double> rica_in_std;   // pca_k
    Matrix rica_weights;               // rica_k x pca_k when used

    FilterCascade highpass;  // rebuilt from params, not serialized

    FeatureVector apply(const FTSignal& signal) const;

    // FNV-1a over every fitted numeric field; lets tests assert that no
    // information from a test split leaked into the fit.
    std::uint64_t state_digest() const;
};

// Fits the extractor for `spec` on the training signals (>= 2 required).
FittedExtractor fit_extractor(const FeatureSpaceSpec& spec,
                              const std::vector<const FTSignal*>& training);
FittedExtractor fit_extractor(const FeatureSpaceSpec& spec,
                              const std::vector<LabeledSample>& training);

}  // namespace grid
