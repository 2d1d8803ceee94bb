#include "grid/ecoc.hpp"

#include <limits>
#include <stdexcept>

#include "grid/rng.hpp"
#include "grid/threading.hpp"

namespace grid {

std::pair<std::size_t, std::size_t> CodingMatrix::column_pair(
    std::size_t l) const {
    std::size_t pos = std::numeric_limits<std::size_t>::max();
    std::size_t neg = pos;
    for (std::size_t k = 0; k < K; ++k) {
        if (at(k, l) == 1) pos = k;
        if (at(k, l) == -1) neg = k;
    }
    return {pos, neg};
}

CodingMatrix build_ovo_coding(std::size_t K) {
    if (K < 2)
        throw std::invalid_argument("build_ovo_coding: need at least 2 classes");
    CodingMatrix coding;
    coding.K = K;
    coding.L = K * (K - 1) / 2;
    coding.m.assign(K * coding.L, 0);
    std::size_t l = 0;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j, ++l) {
            coding.m[i * coding.L + l] = 1;
            coding.m[j * coding.L + l] = -1;
        }
    return coding;
}

std::vector<double> ecoc_decode_losses(const CodingMatrix& coding,
                                       const std::vector<double>& scores) {
    if (scores.size() != coding.L)
        throw std::invalid_argument("ecoc_decode_losses: score count mismatch");
    std::vector<double> losses(coding.K, 0.0);
    for (std::size_t k = 0; k < coding.K; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t l = 0; l < coding.L; ++l) {
            const int m = coding.at(k, l);
            if (m == 0) continue;
            num += binary_loss(m, scores[l]);
            den += 1.0;
        }
        losses[k] = den > 0.0 ? num / den : 0.0;
    }
    return losses;
}

ECOCPrediction ecoc_predict(const CodingMatrix& coding,
                            const std::vector<LinearSVMModel>& learners,
                            const std::vector<double>& x) {
    if (learners.size() != coding.L)
        throw std::invalid_argument("ecoc_predict: learner count mismatch");
    std::vector<double> scores(coding.L);
    for (std::size_t l = 0; l < coding.L; ++l)
        scores[l] = svm_score(learners[l], x);

    ECOCPrediction pred;
    pred.losses = ecoc_decode_losses(coding, scores);
    pred.class_index = 0;
    for (std::size_t k = 1; k < pred.losses.size(); ++k)
        if (pred.losses[k] < pred.losses[pred.class_index])
            pred.class_index = k;  // strict <: ties keep the lowest index
    return pred;
}

ECOCPrediction ECOCModel::predict_features(const std::vector<double>& x) const {
    return ecoc_predict(coding, learners, x);
}

ECOCPrediction ECOCModel::predict_signal(const FTSignal& signal) const {
    const FeatureVector fv = extractor.apply(signal);
    return predict_features(fv.values);
}

ECOCModel ecoc_train(const std::vector<Matrix>& per_class_features,
                     const std::vector<std::string>& classes, double C,
                     std::uint64_t seed) {
    const std::size_t K = per_class_features.size();
    if (K < 2)
        throw std::invalid_argument("ecoc_train: need at least 2 classes");
    if (classes.size() != K)
        throw std::invalid_argument("ecoc_train: class name count mismatch");
    std::size_t dim = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (per_class_features[k].rows == 0)
            throw std::invalid_argument("ecoc_train: class '" + classes[k] +
                                        "' has no samples");
        if (k == 0)
            dim = per_class_features[k].cols;
        else if (per_class_features[k].cols != dim)
            throw std::invalid_argument("ecoc_train: feature width mismatch");
    }

    ECOCModel model;
    model.coding = build_ovo_coding(K);
    model.classes = classes;
    model.learners.resize(model.coding.L);

    parallel_for(model.coding.L, [&](std::size_t l) {
        const auto [pos, neg] = model.coding.column_pair(l);
        const Matrix& P = per_class_features[pos];
        const Matrix& N = per_class_features[neg];

        std::vector<const double*> rows;
        std::vector<int> y;
        rows.reserve(P.rows + N.rows);
        y.reserve(P.rows + N.rows);
        for (std::size_t i = 0; i < P.rows; ++i) {
            rows.push_back(P.data.data() + i * dim);
            y.push_back(1);
        }
        for (std::size_t i = 0; i < N.rows; ++i) {
            rows.push_back(N.data.data() + i * dim);
            y.push_back(-1);
        }

        SVMTrainOptions opts;
        opts.C = C;
        opts.seed = derive_seed(seed, l);
        model.learners[l] = train_linear_svm_detailed(rows, dim, y, opts).model;
    });
    return model;
}

}  // namespace grid
