#include "grid/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <stdexcept>

#include "grid/rng.hpp"
#include "grid/threading.hpp"

namespace grid {

namespace {

constexpr double kStdFloor = 1e-8;

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const EMat>;
using MapMatMut = Eigen::Map<EMat>;

MapMat as_eigen(const Matrix& m) {
    return MapMat(m.data.data(), static_cast<Eigen::Index>(m.rows),
                  static_cast<Eigen::Index>(m.cols));
}

// Single-part spaces making up each registered id, in concatenation order.
std::vector<std::string> base_parts(const std::string& id) {
    if (id == "raw" || id == "norm_raw" || id == "hfmh" || id == "raw_hist" ||
        id == "dft")
        return {id};
    if (id == "raw_plus_hfmh") return {"raw", "hfmh"};
    if (id == "raw_plus_dft") return {"raw", "dft"};
    if (id == "norm_raw_plus_hfmh") return {"norm_raw", "hfmh"};
    if (id == "norm_raw_plus_dft") return {"norm_raw", "dft"};
    if (id == "pca" || id == "pca_rica") return {"raw"};
    throw std::invalid_argument("unknown feature space id: " + id);
}

std::size_t part_dim(const std::string& part, const FeatureParams& p) {
    const std::size_t n = kCanonicalLength;
    if (part == "raw" || part == "norm_raw") return kNumChannels * n;
    if (part == "hfmh" || part == "raw_hist")
        return kNumChannels * static_cast<std::size_t>(p.hist_bins);
    if (part == "dft") return kNumChannels * (next_pow2(n) / 2 + 1);
    throw std::invalid_argument("unknown base part: " + part);
}

void append_channel_part(const std::string& part, const FTSignal& sig,
                         std::size_t c, const FilterCascade& hp,
                         const FeatureParams& p, const ChannelRanges* ranges,
                         std::vector<double>& out) {
    const auto& ch = sig.channels[c];
    if (part == "raw") {
        out.insert(out.end(), ch.begin(), ch.end());
    } else if (part == "norm_raw") {
        const auto norm = minmax_normalize(ch);
        out.insert(out.end(), norm.begin(), norm.end());
    } else if (part == "hfmh") {
        const auto filtered =
            p.zero_phase_filter ? filter_zero_phase(hp, ch) : filter_forward(hp, ch);
        const auto hist =
            magnitude_histogram(filtered, p.hist_bins, p.hist_lo, p.hist_hi);
        out.insert(out.end(), hist.begin(), hist.end());
    } else if (part == "raw_hist") {
        if (ranges == nullptr)
            throw std::invalid_argument(
                "raw_hist needs channel ranges fitted on training data");
        auto [lo, hi] = (*ranges)[c];
        if (!(hi > lo)) hi = lo + 1.0;  // constant training channel
        const auto hist = magnitude_histogram(ch, p.hist_bins, lo, hi);
        out.insert(out.end(), hist.begin(), hist.end());
    } else if (part == "dft") {
        std::vector<double> padded = ch;
        padded.resize(next_pow2(ch.size()), 0.0);
        const auto mag = dft_magnitude(padded);
        out.insert(out.end(), mag.begin(), mag.end());
    } else {
        throw std::invalid_argument("unknown base part: " + part);
    }
}

FilterCascade design_from_params(const FeatureParams& p) {
    return design_butterworth_highpass(p.filter_order, p.filter_cutoff_hz,
                                       kCanonicalRateHz);
}

void standardize_inplace(std::vector<double>& v,
                         const std::vector<double>& mean,
                         const std::vector<double>& scale) {
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (v[i] - mean[i]) / scale[i];
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, const std::vector<double>& v) {
    return fnv1a(h, v.data(), v.size() * sizeof(double));
}

}  // namespace

const std::vector<std::string>& all_space_ids() {
    static const std::vector<std::string> ids = {
        "raw_plus_hfmh", "raw_plus_dft",  "norm_raw_plus_hfmh",
        "norm_raw_plus_dft", "hfmh",      "raw",
        "raw_hist",      "norm_raw",      "dft",
        "pca",           "pca_rica"};
    return ids;
}

bool is_registered_space(const std::string& id) {
    const auto& ids = all_space_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::size_t space_dim(const FeatureSpaceSpec& spec) {
    if (spec.id == "pca") return static_cast<std::size_t>(spec.params.pca_k);
    if (spec.id == "pca_rica")
        return static_cast<std::size_t>(spec.params.rica_k);
    std::size_t d = 0;
    for (const auto& part : base_parts(spec.id)) d += part_dim(part, spec.params);
    return d;
}

FeatureVector extract_base(const FeatureSpaceSpec& spec, const FTSignal& signal,
                           const ChannelRanges* ranges) {
    if (signal.n_samples() != kCanonicalLength)
        throw std::invalid_argument(
            "extract_base: expected canonical length " +
            std::to_string(kCanonicalLength) + ", got " +
            std::to_string(signal.n_samples()));

    const auto parts = base_parts(spec.id);
    const bool needs_filter =
        std::find(parts.begin(), parts.end(), "hfmh") != parts.end();
    FilterCascade hp;
    if (needs_filter) hp = design_from_params(spec.params);

    FeatureVector fv;
    fv.space_id = spec.id;
    std::size_t total = 0;
    for (const auto& part : parts) total += part_dim(part, spec.params);
    fv.values.reserve(total);
    for (const auto& part : parts)
        for (std::size_t c = 0; c < kNumChannels; ++c)
            append_channel_part(part, signal, c, hp, spec.params, ranges,
                                fv.values);
    return fv;
}

PCAResult pca_fit(const Matrix& X, std::size_t k) {
    const std::size_t n = X.rows, d = X.cols;
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
    if (k < 1 || k > std::min(n - 1, d))
        throw std::invalid_argument("pca_fit: k out of range");

    EMat Xc = as_eigen(X);
    Eigen::RowVectorXd mean = Xc.colwise().mean();
    Xc.rowwise() -= mean;

    PCAResult res;
    res.mean.assign(mean.data(), mean.data() + d);
    res.total_variance = Xc.squaredNorm() / static_cast<double>(n - 1);
    res.basis = Matrix(d, k);
    res.eigenvalues.resize(k);

    if (n < d) {
        // Gram trick: eigenvectors of Xc Xc^T lift to covariance
        // eigenvectors via Xc^T u / ||Xc^T u||.
        Eigen::MatrixXd gram = Xc * Xc.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("pca_fit: eigendecomposition failed");
        for (std::size_t j = 0; j < k; ++j) {
            const auto idx = static_cast<Eigen::Index>(n - 1 - j);  // descending
            const double g = eig.eigenvalues()(idx);
            if (g <= 0.0)
                throw std::invalid_argument(
                    "pca_fit: requested components exceed data rank");
            Eigen::VectorXd v = Xc.transpose() * eig.eigenvectors().col(idx);
            v /= std::sqrt(g);
            res.eigenvalues[j] = g / static_cast<double>(n - 1);
            for (std::size_t r = 0; r < d; ++r)
                res.basis.at(r, j) = v(static_cast<Eigen::Index>(r));
        }
    } else {
        Eigen::MatrixXd cov =
            (Xc.transpose() * Xc) / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("pca_fit: eigendecomposition failed");
        for (std::size_t j = 0; j < k; ++j) {
            const auto idx = static_cast<Eigen::Index>(d - 1 - j);
            res.eigenvalues[j] = eig.eigenvalues()(idx);
            for (std::size_t r = 0; r < d; ++r)
                res.basis.at(r, j) =
                    eig.eigenvectors()(static_cast<Eigen::Index>(r), idx);
        }
    }

    // Deterministic sign: largest-magnitude entry of each column positive.
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            const double mag = std::abs(res.basis.at(r, j));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (res.basis.at(arg, j) < 0.0)
            for (std::size_t r = 0; r < d; ++r) res.basis.at(r, j) *= -1.0;
    }
    return res;
}

double rica_objective(const Matrix& W, const Matrix& X, double lambda,
                      Matrix* grad) {
    const std::size_t n = X.rows, d = X.cols, k = W.rows;
    if (W.cols != d)
        throw std::invalid_argument("rica_objective: dimension mismatch");

    MapMat Wm = as_eigen(W);
    MapMat Xm = as_eigen(X);
    const double inv_n = 1.0 / static_cast<double>(n);

    EMat Z = Xm * Wm.transpose();       // n x k, rows are W x_i
    EMat R = Z * Wm - Xm;               // n x d reconstruction residuals

    double J = R.squaredNorm() * inv_n;
    // log cosh(t) = |t| + log1p(exp(-2|t|)) - log 2, stable for large |t|
    double sparsity = 0.0;
    for (Eigen::Index i = 0; i < Z.size(); ++i) {
        const double t = std::abs(Z.data()[i]);
        sparsity += t + std::log1p(std::exp(-2.0 * t)) - M_LN2;
    }
    J += lambda * inv_n * sparsity;

    if (!std::isfinite(J))
        throw std::runtime_error(
            "rica_objective: non-finite objective (check lambda and scaling)");

    if (grad != nullptr) {
        *grad = Matrix(k, d);
        MapMatMut G(grad->data.data(), static_cast<Eigen::Index>(k),
                    static_cast<Eigen::Index>(d));
        G = 2.0 * inv_n * (Z.transpose() * R + (Wm * R.transpose()) * Xm);
        G += (lambda * inv_n) * (Z.array().tanh().matrix().transpose() * Xm);
    }
    return J;
}

Matrix rica_fit(const Matrix& X, std::size_t k, double lambda, int max_iter,
                std::uint64_t seed, double grad_tol) {
    const std::size_t d = X.cols;
    if (k > d) throw std::invalid_argument("rica_fit: k must be <= d");

    // Random orthonormal rows.
    Rng rng(derive_seed(seed, 0x52494341ULL));
    Matrix W(k, d);
    for (auto& v : W.data) v = rng.normal();
    {
        MapMatMut Wm(W.data.data(), static_cast<Eigen::Index>(k),
                     static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < Wm.rows(); ++i) {
            for (Eigen::Index j = 0; j < i; ++j)
                Wm.row(i) -= Wm.row(i).dot(Wm.row(j)) * Wm.row(j);
            const double nrm = Wm.row(i).norm();
            if (nrm > 0) Wm.row(i) /= nrm;
        }
    }

    // L-BFGS with two-loop recursion and Armijo backtracking.
    const std::size_t mem = 10;
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    Matrix grad;
    double J = rica_objective(W, X, lambda, &grad);
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(W.data.data(),
                                                    static_cast<Eigen::Index>(W.data.size()));
    Eigen::VectorXd g = Eigen::Map<Eigen::VectorXd>(grad.data.data(),
                                                    static_cast<Eigen::Index>(grad.data.size()));

    auto eval = [&](const Eigen::VectorXd& point, Eigen::VectorXd* gout) {
        Matrix Wp(k, d);
        std::memcpy(Wp.data.data(), point.data(), sizeof(double) * Wp.data.size());
        Matrix gm;
        const double val = rica_objective(Wp, X, lambda, gout ? &gm : nullptr);
        if (gout != nullptr)
            *gout = Eigen::Map<Eigen::VectorXd>(gm.data.data(),
                                                static_cast<Eigen::Index>(gm.data.size()));
        return val;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) break;

        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) /
                                 y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {  // fall back to steepest descent
            dir = -g;
            slope = g.dot(dir);
        }

        double step = (iter == 0) ? 1.0 / std::max(1.0, g.norm()) : 1.0;
        double J_new = J;
        Eigen::VectorXd w_new, g_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            w_new = w + step * dir;
            J_new = eval(w_new, nullptr);
            if (J_new <= J + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no progress possible at double precision

        eval(w_new, &g_new);
        Eigen::VectorXd s_vec = w_new - w;
        Eigen::VectorXd y_vec = g_new - g;
        const double sy = s_vec.dot(y_vec);
        if (sy > 1e-12) {
            if (s_hist.size() == mem) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
        }
        w = std::move(w_new);
        g = std::move(g_new);
        J = J_new;
    }

    std::memcpy(W.data.data(), w.data(), sizeof(double) * W.data.size());
    return W;
}

std::vector<double> rica_transform(const Matrix& weights,
                                   const std::vector<double>& x) {
    if (weights.cols != x.size())
        throw std::invalid_argument("rica_transform: dimension mismatch");
    std::vector<double> out(weights.rows, 0.0);
    for (std::size_t r = 0; r < weights.rows; ++r) {
        double acc = 0.0;
        const double* row = weights.data.data() + r * weights.cols;
        for (std::size_t c = 0; c < weights.cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
    return out;
}

FittedExtractor fit_extractor(const FeatureSpaceSpec& spec,
                              const std::vector<const FTSignal*>& training) {
    if (!is_registered_space(spec.id))
        throw std::invalid_argument("unknown feature space id: " + spec.id);
    if (training.size() < 2)
        throw std::invalid_argument(
            "fit_extractor: need at least 2 training samples");

    FittedExtractor ext;
    ext.spec = spec;
    ext.highpass = design_from_params(spec.params);

    const auto parts = base_parts(spec.id);
    ext.has_raw_hist =
        std::find(parts.begin(), parts.end(), "raw_hist") != parts.end();
    if (ext.has_raw_hist) {
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto* sig : training) {
                for (double v : sig->channels[c]) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            ext.raw_hist_ranges[c] = {lo, hi};
        }
    }

    const std::size_t n = training.size();
    std::size_t d = 0;
    for (const auto& part : parts) d += part_dim(part, spec.params);
    ext.base_dim = d;

    Matrix X(n, d);
    const ChannelRanges* ranges = ext.has_raw_hist ? &ext.raw_hist_ranges : nullptr;
    parallel_for(n, [&](std::size_t i) {
        const FeatureVector fv = extract_base(spec, *training[i], ranges);
        std::memcpy(X.data.data() + i * d, fv.values.data(), d * sizeof(double));
    });

    // Per-dimension standardizer (population std, floored).
    ext.std_mean.assign(d, 0.0);
    ext.std_scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) ext.std_mean[j] += X.at(i, j);
    for (double& m : ext.std_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = X.at(i, j) - ext.std_mean[j];
            ext.std_scale[j] += dev * dev;
        }
    for (double& s : ext.std_scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (s < kStdFloor) s = 1.0;  // dead dimension carried through unscaled
    }

    ext.out_dim = d;
    if (spec.id != "pca" && spec.id != "pca_rica") return ext;

    // Standardize in place, then fit PCA (and RICA) on the training matrix.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            X.at(i, j) = (X.at(i, j) - ext.std_mean[j]) / ext.std_scale[j];

    const auto pca_k = static_cast<std::size_t>(spec.params.pca_k);
    PCAResult pca = pca_fit(X, pca_k);
    ext.pca_mean = std::move(pca.mean);
    ext.pca_basis = std::move(pca.basis);
    ext.pca_eigenvalues = std::move(pca.eigenvalues);
    ext.out_dim = pca_k;
    if (spec.id == "pca") return ext;

    // Project the training data, whiten per component, then fit RICA.
    Matrix Z(n, pca_k);
    {
        MapMat Xm = as_eigen(X);
        MapMat Bm = as_eigen(ext.pca_basis);
        Eigen::RowVectorXd mu = Eigen::Map<const Eigen::RowVectorXd>(
            ext.pca_mean.data(), static_cast<Eigen::Index>(d));
        MapMatMut Zm(Z.data.data(), static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(pca_k));
        Zm = (Xm.rowwise() - mu) * Bm;
    }
    ext.rica_in_mean.assign(pca_k, 0.0);
    ext.rica_in_std.assign(pca_k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pca_k; ++j) ext.rica_in_mean[j] += Z.at(i, j);
    for (double& m : ext.rica_in_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pca_k; ++j) {
            const double dev = Z.at(i, j) - ext.rica_in_mean[j];
            ext.rica_in_std[j] += dev * dev;
        }
    for (double& s : ext.rica_in_std) {
        s = std::sqrt(s / static_cast<double>(n));
        if (s < kStdFloor) s = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pca_k; ++j)
            Z.at(i, j) = (Z.at(i, j) - ext.rica_in_mean[j]) / ext.rica_in_std[j];

    ext.rica_weights =
        rica_fit(Z, static_cast<std::size_t>(spec.params.rica_k),
                 spec.params.rica_lambda, spec.params.rica_max_iter,
                 spec.params.seed);
    ext.out_dim = static_cast<std::size_t>(spec.params.rica_k);
    return ext;
}

FittedExtractor fit_extractor(const FeatureSpaceSpec& spec,
                              const std::vector<LabeledSample>& training) {
    std::vector<const FTSignal*> signals;
    signals.reserve(training.size());
    for (const auto& s : training) signals.push_back(&s.signal);
    return fit_extractor(spec, signals);
}

FeatureVector FittedExtractor::apply(const FTSignal& signal) const {
    const ChannelRanges* ranges = has_raw_hist ? &raw_hist_ranges : nullptr;
    FeatureVector fv = extract_base(spec, signal, ranges);
    if (fv.values.size() != base_dim)
        throw std::invalid_argument(
            "apply_extractor: feature dimension mismatch against fitted stats");
    standardize_inplace(fv.values, std_mean, std_scale);
    if (spec.id != "pca" && spec.id != "pca_rica") return fv;

    const std::size_t pca_k = pca_basis.cols;
    std::vector<double> z(pca_k, 0.0);
    for (std::size_t j = 0; j < pca_k; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < base_dim; ++r)
            acc += (fv.values[r] - pca_mean[r]) * pca_basis.at(r, j);
        z[j] = acc;
    }
    if (spec.id == "pca") {
        fv.values = std::move(z);
        return fv;
    }
    standardize_inplace(z, rica_in_mean, rica_in_std);
    fv.values = rica_transform(rica_weights, z);
    return fv;
}

std::uint64_t FittedExtractor::state_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a(h, spec.id.data(), spec.id.size());
    for (const auto& [lo, hi] : raw_hist_ranges) {
        h = fnv1a(h, &lo, sizeof(lo));
        h = fnv1a(h, &hi, sizeof(hi));
    }
    h = fnv1a(h, std_mean);
    h = fnv1a(h, std_scale);
    h = fnv1a(h, pca_mean);
    h = fnv1a(h, pca_basis.data);
    h = fnv1a(h, pca_eigenvalues);
    h = fnv1a(h, rica_in_mean);
    h = fnv1a(h, rica_in_std);
    h = fnv1a(h, rica_weights.data);
    return h;
}

}  // namespace grid
