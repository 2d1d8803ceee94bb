#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grid/features.hpp"
#include "grid/linalg.hpp"
#include "grid/svm.hpp"

namespace grid {

// Trinary K x L coding matrix over {-1, 0, +1}. One-vs-one coding: each
// column carries exactly one +1 and one -1, and every unordered class pair
// appears exactly once, so L = K(K-1)/2.
struct CodingMatrix {
    std::size_t K = 0;
    std::size_t L = 0;
    std::vector<std::int8_t> m;  // row-major K x L

    std::int8_t at(std::size_t k, std::size_t l) const { return m[k * L + l]; }
    // The (+1 class, -1 class) pair encoded by column l.
    std::pair<std::size_t, std::size_t> column_pair(std::size_t l) const;
};

// Columns enumerate pairs (i, j), i < j, in lexicographic order.
CodingMatrix build_ovo_coding(std::size_t K);

// Decoding loss g(m, s) = max{0, 1 - m*s} / 2.
inline double binary_loss(int m, double s) {
    const double t = 1.0 - static_cast<double>(m) * s;
    return (t > 0.0 ? t : 0.0) / 2.0;
}

// Per-class aggregated loss: sum_l |m_kl| g(m_kl, s_l) / sum_l |m_kl|.
std::vector<double> ecoc_decode_losses(const CodingMatrix& coding,
                                       const std::vector<double>& scores);

struct ECOCPrediction {
    std::size_t class_index = 0;
    std::vector<double> losses;  // one per class
};

// Arg-min of the decoded losses; ties break to the smallest class index.
ECOCPrediction ecoc_predict(const CodingMatrix& coding,
                            const std::vector<LinearSVMModel>& learners,
                            const std::vector<double>& x);

// Trained multiclass model bundled with its fitted feature extractor.
struct ECOCModel {
    CodingMatrix coding;
    std::vector<LinearSVMModel> learners;
    std::vector<std::string> classes;
    FittedExtractor extractor;

    ECOCPrediction predict_features(const std::vector<double>& x) const;
    ECOCPrediction predict_signal(const FTSignal& signal) const;
};

// Trains one linear SVM per coding column on the union of its +1-class and
// -1-class samples. Learners are independent and train in parallel; the
// result does not depend on the worker count.
ECOCModel ecoc_train(const std::vector<Matrix>& per_class_features,
                     const std::vector<std::string>& classes, double C,
                     std::uint64_t seed = 1);

}  // namespace grid
