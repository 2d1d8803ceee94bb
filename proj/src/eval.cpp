#include "grid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "grid/ecoc.hpp"
#include "grid/rng.hpp"
#include "grid/threading.hpp"

namespace grid {

namespace {

std::uint64_t fnv1a_u64(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Midranks of the pooled values; returns ranks aligned with `pooled` and
// the tie-group sizes.
std::pair<std::vector<double>, std::vector<std::size_t>> midranks(
    const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

    std::vector<double> ranks(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    return {ranks, tie_sizes};
}

double normal_sf(double z) {  // P(Z > z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

SplitPlan make_split_plan(const Dataset& dataset, std::size_t repeats,
                          std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed) {
    const std::size_t K = dataset.classes.size();
    if (K == 0) throw std::invalid_argument("make_split_plan: empty class list");

    std::vector<std::vector<std::size_t>> by_class(K);
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const int k = dataset.class_index(dataset.samples[i].label);
        if (k < 0)
            throw std::invalid_argument("make_split_plan: unregistered label '" +
                                        dataset.samples[i].label + "'");
        by_class[static_cast<std::size_t>(k)].push_back(i);
    }
    for (std::size_t k = 0; k < K; ++k)
        if (by_class[k].size() < n_train + n_test)
            throw std::invalid_argument(
                "make_split_plan: class '" + dataset.classes[k] + "' has " +
                std::to_string(by_class[k].size()) + " samples, needs " +
                std::to_string(n_train + n_test));

    SplitPlan plan;
    plan.repeats = repeats;
    plan.train_per_class = n_train;
    plan.test_per_class = n_test;
    plan.seed = seed;
    plan.assignments.resize(repeats);

    Rng rng(derive_seed(seed, 0x53504c4954ULL));
    for (std::size_t r = 0; r < repeats; ++r) {
        plan.assignments[r].resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<std::size_t> idx = by_class[k];
            rng.shuffle(idx);
            auto& split = plan.assignments[r][k];
            split.train.assign(idx.begin(),
                               idx.begin() + static_cast<std::ptrdiff_t>(n_train));
            split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                              idx.begin() +
                                  static_cast<std::ptrdiff_t>(n_train + n_test));
        }
    }
    return plan;
}

EvalReport run_experiment(const Dataset& dataset, const FeatureSpaceSpec& spec,
                          const SplitPlan& plan, double C) {
    const std::size_t K = dataset.classes.size();
    EvalReport report;
    report.space_id = spec.id;
    report.classes = dataset.classes;
    report.confusion = Matrix(K, K);
    report.per_repeat_accuracy.reserve(plan.repeats);
    report.fitted_digests.reserve(plan.repeats);

    for (std::size_t r = 0; r < plan.repeats; ++r) {
        const auto& splits = plan.assignments[r];

        std::vector<const FTSignal*> train_signals;
        train_signals.reserve(K * plan.train_per_class);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t idx : splits[k].train)
                train_signals.push_back(&dataset.samples[idx].signal);

        const FittedExtractor ext = fit_extractor(spec, train_signals);

        // Per-class training feature matrices.
        std::vector<Matrix> per_class(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& idx = splits[k].train;
            per_class[k] = Matrix(idx.size(), ext.out_dim);
            parallel_for(idx.size(), [&](std::size_t i) {
                const FeatureVector fv =
                    ext.apply(dataset.samples[idx[i]].signal);
                std::copy(fv.values.begin(), fv.values.end(),
                          per_class[k].data.begin() +
                              static_cast<std::ptrdiff_t>(i * ext.out_dim));
            });
        }

        const ECOCModel model = ecoc_train(per_class, dataset.classes, C,
                                           derive_seed(plan.seed, r));

        // Flat test list, then predict in parallel.
        std::vector<std::size_t> test_idx, test_truth;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t idx : splits[k].test) {
                test_idx.push_back(idx);
                test_truth.push_back(k);
            }
        std::vector<std::size_t> predicted(test_idx.size());
        parallel_for(test_idx.size(), [&](std::size_t i) {
            const FeatureVector fv =
                ext.apply(dataset.samples[test_idx[i]].signal);
            predicted[i] = model.predict_features(fv.values).class_index;
        });

        std::size_t correct = 0;
        for (std::size_t i = 0; i < predicted.size(); ++i)
            if (predicted[i] == test_truth[i]) ++correct;
        report.per_repeat_accuracy.push_back(
            static_cast<double>(correct) / static_cast<double>(predicted.size()));

        const ConfusionResult conf = confusion_matrix(predicted, test_truth, K);
        for (std::size_t i = 0; i < K * K; ++i)
            report.confusion.data[i] += conf.normalized.data[i];

        std::uint64_t digest = ext.state_digest();
        for (const auto& learner : model.learners) {
            digest = fnv1a_u64(digest, learner.w.data(),
                               learner.w.size() * sizeof(double));
            digest = fnv1a_u64(digest, &learner.b, sizeof(double));
        }
        report.fitted_digests.push_back(digest);
    }

    for (double& v : report.confusion.data)
        v /= static_cast<double>(plan.repeats);

    const auto& acc = report.per_repeat_accuracy;
    report.mean = std::accumulate(acc.begin(), acc.end(), 0.0) /
                  static_cast<double>(acc.size());
    double ss = 0.0;
    for (double a : acc) ss += (a - report.mean) * (a - report.mean);
    report.sd = acc.size() > 1
                    ? std::sqrt(ss / static_cast<double>(acc.size() - 1))
                    : 0.0;
    return report;
}

ConfusionResult confusion_matrix(const std::vector<std::size_t>& predicted,
                                 const std::vector<std::size_t>& truth,
                                 std::size_t K) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("confusion_matrix: length mismatch");
    ConfusionResult res;
    res.normalized = Matrix(K, K);
    res.row_counts.assign(K, 0);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] >= K || truth[i] >= K)
            throw std::invalid_argument("confusion_matrix: label out of range");
        res.normalized.at(truth[i], predicted[i]) += 1.0;
        ++res.row_counts[truth[i]];
    }
    for (std::size_t i = 0; i < K; ++i) {
        if (res.row_counts[i] == 0) continue;  // empty row stays all-zero
        const double inv = 1.0 / static_cast<double>(res.row_counts[i]);
        for (std::size_t j = 0; j < K; ++j) res.normalized.at(i, j) *= inv;
    }
    return res;
}

MWUResult mann_whitney_u(const std::vector<double>& a,
                         const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: empty sample");
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto [ranks, tie_sizes] = midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks[i];
    const double U =
        rank_sum_a - static_cast<double>(na) * (static_cast<double>(na) + 1.0) / 2.0;

    MWUResult res;
    res.U = U;

    if (n <= 12) {
        // Exact permutation distribution of U over all C(n, na) subsets.
        res.exact = true;
        std::size_t total = 0, le = 0, ge = 0;
        const std::uint32_t full = static_cast<std::uint32_t>(1u << n);
        for (std::uint32_t mask = 0; mask < full; ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != na)
                continue;
            double rs = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) rs += ranks[i];
            const double u = rs - static_cast<double>(na) *
                                      (static_cast<double>(na) + 1.0) / 2.0;
            ++total;
            if (u <= U + 1e-9) ++le;
            if (u >= U - 1e-9) ++ge;
        }
        const double p_lo = static_cast<double>(le) / static_cast<double>(total);
        const double p_hi = static_cast<double>(ge) / static_cast<double>(total);
        res.p_two_sided = std::min(1.0, 2.0 * std::min(p_lo, p_hi));
        return res;
    }

    // Normal approximation with tie-corrected variance and continuity
    // correction.
    const double mean_u = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double nd = static_cast<double>(n);
    const double var_u = static_cast<double>(na) * static_cast<double>(nb) /
                         12.0 *
                         ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (var_u <= 0.0) {
        res.p_two_sided = 1.0;
        return res;
    }
    const double diff = std::abs(U - mean_u);
    const double z = std::max(0.0, diff - 0.5) / std::sqrt(var_u);
    res.p_two_sided = std::min(1.0, 2.0 * normal_sf(z));
    return res;
}

Dataset permute_dataset_time(const Dataset& dataset, std::uint64_t seed) {
    Dataset out = dataset;
    for (std::size_t s = 0; s < out.samples.size(); ++s) {
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            Rng rng(derive_seed(seed, s * kNumChannels + c));
            auto& ch = out.samples[s].signal.channels[c];
            const auto perm = rng.permutation(ch.size());
            std::vector<double> shuffled(ch.size());
            for (std::size_t i = 0; i < ch.size(); ++i)
                shuffled[i] = ch[perm[i]];
            ch = std::move(shuffled);
        }
    }
    return out;
}

EvalReport permuted_signal_ablation(const Dataset& dataset,
                                    const FeatureSpaceSpec& spec,
                                    const SplitPlan& plan, double C,
                                    std::uint64_t permutation_seed) {
    const Dataset permuted = permute_dataset_time(dataset, permutation_seed);
    EvalReport report = run_experiment(permuted, spec, plan, C);
    report.space_id = spec.id + "_permuted";
    return report;
}

CompareResult compare_spaces(const Dataset& dataset,
                             const std::vector<FeatureSpaceSpec>& specs,
                             const SplitPlan& plan, double C) {
    if (specs.empty())
        throw std::invalid_argument("compare_spaces: need at least one spec");
    CompareResult res;
    res.reports.reserve(specs.size());
    for (const auto& spec : specs)
        res.reports.push_back(run_experiment(dataset, spec, plan, C));

    const std::size_t S = specs.size();
    res.pvals = Matrix(S, S);
    for (std::size_t i = 0; i < S; ++i) {
        res.pvals.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < S; ++j) {
            const double p =
                mann_whitney_u(res.reports[i].per_repeat_accuracy,
                               res.reports[j].per_repeat_accuracy)
                    .p_two_sided;
            res.pvals.at(i, j) = p;
            res.pvals.at(j, i) = p;
        }
    }
    return res;
}

void write_report_csv(const std::string& path,
                      const std::vector<EvalReport>& reports) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) throw std::runtime_error("cannot write report: " + path);
    std::size_t repeats = 0;
    for (const auto& r : reports)
        repeats = std::max(repeats, r.per_repeat_accuracy.size());
    out << "space_id,mean,sd";
    for (std::size_t i = 1; i <= repeats; ++i) out << ",acc_" << i;
    out << "\n";
    for (const auto& r : reports) {
        out << r.space_id << "," << fmt_double(r.mean) << ","
            << fmt_double(r.sd);
        for (double a : r.per_repeat_accuracy) out << "," << fmt_double(a);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_confusion_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write confusion: " + path);
    out << "actual\\predicted";
    for (const auto& c : report.classes) out << "," << c;
    out << "\n";
    const std::size_t K = report.classes.size();
    for (std::size_t i = 0; i < K; ++i) {
        out << report.classes[i];
        for (std::size_t j = 0; j < K; ++j)
            out << "," << fmt_double(report.confusion.at(i, j));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_pvals_csv(const std::string& path,
                     const std::vector<std::string>& space_ids,
                     const Matrix& pvals) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write p-values: " + path);
    out << "space_id";
    for (const auto& id : space_ids) out << "," << id;
    out << "\n";
    for (std::size_t i = 0; i < space_ids.size(); ++i) {
        out << space_ids[i];
        for (std::size_t j = 0; j < space_ids.size(); ++j)
            out << "," << fmt_double(pvals.at(i, j));
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace grid
