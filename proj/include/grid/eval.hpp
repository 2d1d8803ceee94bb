#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grid/features.hpp"
#include "grid/linalg.hpp"
#include "grid/signal.hpp"

namespace grid {

// Repeated random splits: per repeat, per class, a seeded shuffle assigns
// the first n_train samples to training and the next n_test to testing.
// Deterministic given (dataset order, seed).
struct SplitPlan {
    std::size_t repeats = 20;
    std::size_t train_per_class = 50;
    std::size_t test_per_class = 12;
    std::uint64_t seed = 0;
    // assignments[r][k] = global sample indices, train first then test.
    struct ClassSplit {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
    };
    std::vector<std::vector<ClassSplit>> assignments;
};

SplitPlan make_split_plan(const Dataset& dataset, std::size_t repeats,
                          std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed);

struct EvalReport {
    std::string space_id;
    std::vector<std::string> classes;
    std::vector<double> per_repeat_accuracy;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, n-1 denominator
    Matrix confusion;  // K x K, row-normalized, averaged over repeats
    // Digest of all fitted state (extractor + learners) per repeat;
    // identical digests across runs certify that nothing from the test
    // split reached any fitting step.
    std::vector<std::uint64_t> fitted_digests;
};

// Fits the extractor and the ECOC model on each repeat's training split
// only, evaluates on the test split, and aggregates accuracy mean/sd plus
// the averaged row-normalized confusion matrix.
EvalReport run_experiment(const Dataset& dataset, const FeatureSpaceSpec& spec,
                          const SplitPlan& plan, double C);

struct ConfusionResult {
    Matrix normalized;                   // entry (i,j) = P(pred=j | truth=i)
    std::vector<std::size_t> row_counts; // truth counts; 0 marks an empty row
};

ConfusionResult confusion_matrix(const std::vector<std::size_t>& predicted,
                                 const std::vector<std::size_t>& truth,
                                 std::size_t K);

struct MWUResult {
    double U = 0.0;           // U statistic of the first sample
    double p_two_sided = 1.0;
    bool exact = false;       // exact enumeration (small samples) vs normal
};

// Rank-sum U with midrank tie handling. Exact enumeration of all
// assignments when n_a + n_b <= 12; otherwise normal approximation with
// tie-corrected variance and continuity correction.
MWUResult mann_whitney_u(const std::vector<double>& a,
                         const std::vector<double>& b);

// Returns a copy of the dataset with every channel's time indices
// independently permuted (seeded). Multiset-preserving: histograms of each
// channel are unchanged, all dynamics are destroyed.
Dataset permute_dataset_time(const Dataset& dataset, std::uint64_t seed);

// Runs the experiment on time-permuted signals; everything downstream of
// the permutation is unchanged.
EvalReport permuted_signal_ablation(const Dataset& dataset,
                                    const FeatureSpaceSpec& spec,
                                    const SplitPlan& plan, double C,
                                    std::uint64_t permutation_seed);

struct CompareResult {
    std::vector<EvalReport> reports;  // one per spec, input order
    Matrix pvals;                     // pairwise two-sided Mann-Whitney p
};

// Runs every spec on the SAME plan (paired splits) and tests all pairs of
// per-repeat accuracy vectors.
CompareResult compare_spaces(const Dataset& dataset,
                             const std::vector<FeatureSpaceSpec>& specs,
                             const SplitPlan& plan, double C);

// Plot-ready CSV emitters (UTF-8, LF, '.' decimal).
void write_report_csv(const std::string& path,
                      const std::vector<EvalReport>& reports);
void write_confusion_csv(const std::string& path, const EvalReport& report);
void write_pvals_csv(const std::string& path,
                     const std::vector<std::string>& space_ids,
                     const Matrix& pvals);

}  // namespace grid
