#include "grid/model_io.hpp"

#include <stdexcept>

#include "grid/container.hpp"

namespace grid {

namespace {

void put_matrix(ContainerWriter& w, const Matrix& m) {
    w.put_u64(m.rows);
    w.put_u64(m.cols);
    w.put_f64_array(m.data);
}

Matrix get_matrix(ContainerReader& r) {
    Matrix m;
    m.rows = static_cast<std::size_t>(r.get_u64());
    m.cols = static_cast<std::size_t>(r.get_u64());
    m.data = r.get_f64_array();
    if (m.data.size() != m.rows * m.cols)
        throw std::runtime_error("corrupt matrix block");
    return m;
}

void put_params(ContainerWriter& w, const FeatureParams& p) {
    w.put_u32(static_cast<std::uint32_t>(p.pca_k));
    w.put_u32(static_cast<std::uint32_t>(p.rica_k));
    w.put_u32(static_cast<std::uint32_t>(p.hist_bins));
    w.put_f64(p.hist_lo);
    w.put_f64(p.hist_hi);
    w.put_u32(static_cast<std::uint32_t>(p.filter_order));
    w.put_f64(p.filter_cutoff_hz);
    w.put_u32(p.zero_phase_filter ? 1 : 0);
    w.put_f64(p.rica_lambda);
    w.put_u32(static_cast<std::uint32_t>(p.rica_max_iter));
    w.put_u64(p.seed);
}

FeatureParams get_params(ContainerReader& r) {
    FeatureParams p;
    p.pca_k = static_cast<int>(r.get_u32());
    p.rica_k = static_cast<int>(r.get_u32());
    p.hist_bins = static_cast<int>(r.get_u32());
    p.hist_lo = r.get_f64();
    p.hist_hi = r.get_f64();
    p.filter_order = static_cast<int>(r.get_u32());
    p.filter_cutoff_hz = r.get_f64();
    p.zero_phase_filter = r.get_u32() != 0;
    p.rica_lambda = r.get_f64();
    p.rica_max_iter = static_cast<int>(r.get_u32());
    p.seed = r.get_u64();
    return p;
}

void put_extractor(ContainerWriter& w, const FittedExtractor& ext) {
    w.put_string(ext.spec.id);
    put_params(w, ext.spec.params);
    w.put_u64(ext.base_dim);
    w.put_u64(ext.out_dim);
    w.put_u32(ext.has_raw_hist ? 1 : 0);
    for (const auto& [lo, hi] : ext.raw_hist_ranges) {
        w.put_f64(lo);
        w.put_f64(hi);
    }
    w.put_f64_array(ext.std_mean);
    w.put_f64_array(ext.std_scale);
    w.put_f64_array(ext.pca_mean);
    put_matrix(w, ext.pca_basis);
    w.put_f64_array(ext.pca_eigenvalues);
    w.put_f64_array(ext.rica_in_mean);
    w.put_f64_array(ext.rica_in_std);
    put_matrix(w, ext.rica_weights);
}

FittedExtractor get_extractor(ContainerReader& r) {
    FittedExtractor ext;
    ext.spec.id = r.get_string();
    ext.spec.params = get_params(r);
    ext.base_dim = static_cast<std::size_t>(r.get_u64());
    ext.out_dim = static_cast<std::size_t>(r.get_u64());
    ext.has_raw_hist = r.get_u32() != 0;
    for (auto& [lo, hi] : ext.raw_hist_ranges) {
        lo = r.get_f64();
        hi = r.get_f64();
    }
    ext.std_mean = r.get_f64_array();
    ext.std_scale = r.get_f64_array();
    ext.pca_mean = r.get_f64_array();
    ext.pca_basis = get_matrix(r);
    ext.pca_eigenvalues = r.get_f64_array();
    ext.rica_in_mean = r.get_f64_array();
    ext.rica_in_std = r.get_f64_array();
    ext.rica_weights = get_matrix(r);
    ext.highpass = design_butterworth_highpass(ext.spec.params.filter_order,
                                               ext.spec.params.filter_cutoff_hz,
                                               kCanonicalRateHz);
    return ext;
}

}  // namespace

void save_model(const ECOCModel& model, const std::string& path) {
    ContainerWriter w("model");
    w.put_u32(static_cast<std::uint32_t>(model.classes.size()));
    for (const auto& name : model.classes) w.put_string(name);

    w.put_u64(model.coding.K);
    w.put_u64(model.coding.L);
    for (std::int8_t v : model.coding.m)
        w.put_u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));

    w.put_u64(model.learners.size());
    for (const auto& learner : model.learners) {
        w.put_f64_array(learner.w);
        w.put_f64(learner.b);
        w.put_f64(learner.C);
    }
    put_extractor(w, model.extractor);
    w.write_file(path);
}

ECOCModel load_model(const std::string& path) {
    ContainerReader r(path, "model");
    ECOCModel model;
    const std::uint32_t n_classes = r.get_u32();
    model.classes.reserve(n_classes);
    for (std::uint32_t i = 0; i < n_classes; ++i)
        model.classes.push_back(r.get_string());

    model.coding.K = static_cast<std::size_t>(r.get_u64());
    model.coding.L = static_cast<std::size_t>(r.get_u64());
    model.coding.m.resize(model.coding.K * model.coding.L);
    for (auto& v : model.coding.m)
        v = static_cast<std::int8_t>(static_cast<std::int32_t>(r.get_u32()));

    const std::uint64_t n_learners = r.get_u64();
    if (n_learners != model.coding.L)
        throw std::runtime_error("model file: learner count mismatch");
    model.learners.resize(n_learners);
    for (auto& learner : model.learners) {
        learner.w = r.get_f64_array();
        learner.b = r.get_f64();
        learner.C = r.get_f64();
    }
    model.extractor = get_extractor(r);
    return model;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    ContainerWriter w("dataset");
    w.put_u32(static_cast<std::uint32_t>(dataset.classes.size()));
    for (const auto& name : dataset.classes) w.put_string(name);
    w.put_u64(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        w.put_string(s.label);
        w.put_string(s.source_id);
        w.put_f64(s.signal.sample_rate_hz);
        for (const auto& ch : s.signal.channels) w.put_f64_array(ch);
    }
    w.write_file(path);
}

Dataset load_dataset(const std::string& path) {
    ContainerReader r(path, "dataset");
    Dataset ds;
    const std::uint32_t n_classes = r.get_u32();
    ds.classes.reserve(n_classes);
    for (std::uint32_t i = 0; i < n_classes; ++i)
        ds.classes.push_back(r.get_string());
    const std::uint64_t n = r.get_u64();
    ds.samples.resize(static_cast<std::size_t>(n));
    for (auto& s : ds.samples) {
        s.label = r.get_string();
        s.source_id = r.get_string();
        s.signal.sample_rate_hz = r.get_f64();
        for (auto& ch : s.signal.channels) ch = r.get_f64_array();
    }
    return ds;
}

}  // namespace grid
