// Command-line front end: dataset ingestion, training, prediction,
// evaluation, feature-space comparison, permutation ablation, synthetic
// data generation and model inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "grid/container.hpp"
#include "grid/ecoc.hpp"
#include "grid/eval.hpp"
#include "grid/io.hpp"
#include "grid/model_io.hpp"
#include "grid/rng.hpp"
#include "grid/synth.hpp"

namespace {

using namespace grid;

FeatureSpaceSpec make_spec(const std::string& id, std::uint64_t seed,
                           int pca_k, int rica_k, bool zero_phase = false) {
    if (!is_registered_space(id))
        throw std::runtime_error("feature space id not registered: " + id);
    FeatureSpaceSpec spec;
    spec.id = id;
    spec.params.seed = seed;
    spec.params.pca_k = pca_k;
    spec.params.rica_k = rica_k;
    spec.params.zero_phase_filter = zero_phase;
    return spec;
}

std::vector<FeatureSpaceSpec> parse_spaces(const std::string& arg,
                                           std::uint64_t seed, int pca_k,
                                           int rica_k) {
    std::vector<FeatureSpaceSpec> specs;
    if (arg == "all") {
        for (const auto& id : all_space_ids())
            specs.push_back(make_spec(id, seed, pca_k, rica_k));
        return specs;
    }
    std::size_t start = 0;
    while (start <= arg.size()) {
        const std::size_t comma = arg.find(',', start);
        const std::string id = arg.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!id.empty()) specs.push_back(make_spec(id, seed, pca_k, rica_k));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (specs.empty()) throw std::runtime_error("no feature spaces given");
    return specs;
}

void print_report_line(const EvalReport& report) {
    std::printf("%-20s mean %.4f  sd %.4f  (%zu repeats)\n",
                report.space_id.c_str(), report.mean, report.sd,
                report.per_repeat_accuracy.size());
}

int run(int argc, char** argv) {
    CLI::App app{"Granular material identification from force-torque recordings"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    double C = 1.0;
    int pca_k = 100, rica_k = 80;
    bool zero_phase = false;

    // ingest
    auto* cmd_ingest = app.add_subcommand("ingest", "Cache a CSV dataset as a binary container");
    std::string manifest_path, ingest_out;
    std::string trim_override;
    std::size_t length_override = 0;
    cmd_ingest->add_option("--manifest", manifest_path, "manifest file")->required();
    cmd_ingest->add_option("--out", ingest_out, "output .bin path")->required();
    cmd_ingest->add_option("--trim", trim_override, "end|head (overrides manifest)");
    cmd_ingest->add_option("--length", length_override, "target length (overrides manifest)");

    // train
    auto* cmd_train = app.add_subcommand("train", "Train an ECOC-SVM model on a full dataset");
    std::string train_data, train_space = "raw_plus_hfmh", train_out;
    cmd_train->add_option("--data", train_data, "dataset (.bin or manifest)")->required();
    cmd_train->add_option("--space", train_space, "feature space id");
    cmd_train->add_option("--c", C, "SVM soft-margin C");
    cmd_train->add_option("--seed", seed, "random seed");
    cmd_train->add_option("--pca-k", pca_k, "PCA components (pca/pca_rica spaces)");
    cmd_train->add_option("--rica-k", rica_k, "RICA features (pca_rica space)");
    cmd_train->add_flag("--zero-phase", zero_phase, "zero-phase high-pass for HFMH");
    cmd_train->add_option("--out", train_out, "output model path")->required();

    // predict
    auto* cmd_predict = app.add_subcommand("predict", "Classify one recording CSV");
    std::string predict_model, predict_input;
    cmd_predict->add_option("--model", predict_model, "model file")->required();
    cmd_predict->add_option("--input", predict_input, "recording CSV")->required();

    // evaluate
    auto* cmd_eval = app.add_subcommand("evaluate", "Repeated random-split evaluation");
    std::string eval_data, eval_space = "raw_plus_hfmh", eval_report, eval_confusion;
    std::size_t repeats = 20, n_train = 50, n_test = 12;
    cmd_eval->add_option("--data", eval_data, "dataset (.bin or manifest)")->required();
    cmd_eval->add_option("--space", eval_space, "feature space id");
    cmd_eval->add_option("--repeats", repeats, "number of random splits");
    cmd_eval->add_option("--train", n_train, "training samples per class");
    cmd_eval->add_option("--test", n_test, "test samples per class");
    cmd_eval->add_option("--seed", seed, "random seed");
    cmd_eval->add_option("--c", C, "SVM soft-margin C");
    cmd_eval->add_option("--pca-k", pca_k, "PCA components (pca/pca_rica spaces)");
    cmd_eval->add_option("--rica-k", rica_k, "RICA features (pca_rica space)");
    cmd_eval->add_flag("--zero-phase", zero_phase, "zero-phase high-pass for HFMH");
    cmd_eval->add_option("--report", eval_report, "output CSV");
    cmd_eval->add_option("--confusion", eval_confusion, "confusion-matrix CSV");

    // compare
    auto* cmd_compare = app.add_subcommand("compare", "Evaluate several feature spaces on paired splits");
    std::string cmp_data, cmp_spaces = "all", cmp_out, cmp_pvals;
    cmd_compare->add_option("--data", cmp_data, "dataset (.bin or manifest)")->required();
    cmd_compare->add_option("--spaces", cmp_spaces, "'all' or comma list of ids");
    cmd_compare->add_option("--repeats", repeats, "number of random splits");
    cmd_compare->add_option("--train", n_train, "training samples per class");
    cmd_compare->add_option("--test", n_test, "test samples per class");
    cmd_compare->add_option("--seed", seed, "random seed");
    cmd_compare->add_option("--c", C, "SVM soft-margin C");
    cmd_compare->add_option("--pca-k", pca_k, "PCA components (pca/pca_rica spaces)");
    cmd_compare->add_option("--rica-k", rica_k, "RICA features (pca_rica space)");
    cmd_compare->add_option("--out", cmp_out, "accuracy table CSV");
    cmd_compare->add_option("--pvals", cmp_pvals, "pairwise Mann-Whitney p-value CSV");

    // ablate-permute
    auto* cmd_ablate = app.add_subcommand("ablate-permute", "Evaluate with time-permuted signals");
    std::string abl_data, abl_space = "raw", abl_report;
    cmd_ablate->add_option("--data", abl_data, "dataset (.bin or manifest)")->required();
    cmd_ablate->add_option("--space", abl_space, "feature space id");
    cmd_ablate->add_option("--repeats", repeats, "number of random splits");
    cmd_ablate->add_option("--train", n_train, "training samples per class");
    cmd_ablate->add_option("--test", n_test, "test samples per class");
    cmd_ablate->add_option("--seed", seed, "random seed");
    cmd_ablate->add_option("--c", C, "SVM soft-margin C");
    cmd_ablate->add_option("--pca-k", pca_k, "PCA components (pca/pca_rica spaces)");
    cmd_ablate->add_option("--rica-k", rica_k, "RICA features (pca_rica space)");
    cmd_ablate->add_option("--report", abl_report, "output CSV");

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::size_t n_classes = 11, per_class = 62;
    double separation = 2.0;
    std::string synth_out;
    cmd_synth->add_option("--classes", n_classes, "number of classes");
    cmd_synth->add_option("--per-class", per_class, "recordings per class");
    cmd_synth->add_option("--separation", separation, "class separation scale (0 = identical)");
    cmd_synth->add_option("--seed", seed, "random seed");
    cmd_synth->add_option("--out", synth_out, "output directory")->required();

    // inspect
    auto* cmd_inspect = app.add_subcommand("inspect", "Print model metadata");
    std::string inspect_model;
    cmd_inspect->add_option("--model", inspect_model, "model file")->required();

    CLI11_PARSE(app, argc, argv);

    if (cmd_ingest->parsed()) {
        DatasetManifest manifest = parse_manifest(manifest_path);
        if (!trim_override.empty()) {
            if (trim_override == "end" || trim_override == "tail")
                manifest.trim = LengthAlign::End;
            else if (trim_override == "head")
                manifest.trim = LengthAlign::Head;
            else
                throw std::runtime_error("--trim must be 'end' or 'head'");
        }
        if (length_override > 0) manifest.target_length = length_override;
        const Dataset ds = ingest(manifest);
        save_dataset(ds, ingest_out);
        const auto counts = ds.class_counts();
        std::printf("ingested %zu samples, %zu classes -> %s\n",
                    ds.samples.size(), ds.classes.size(), ingest_out.c_str());
        for (std::size_t k = 0; k < ds.classes.size(); ++k)
            std::printf("  %-20s %zu\n", ds.classes[k].c_str(), counts[k]);
        return 0;
    }

    if (cmd_train->parsed()) {
        const Dataset ds = load_dataset_any(train_data);
        FeatureSpaceSpec spec = make_spec(train_space, seed, pca_k, rica_k, zero_phase);
        const FittedExtractor ext = fit_extractor(spec, ds.samples);

        const std::size_t K = ds.classes.size();
        std::vector<std::vector<std::size_t>> by_class(K);
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            by_class[static_cast<std::size_t>(
                         ds.class_index(ds.samples[i].label))]
                .push_back(i);
        std::vector<Matrix> per_class(K);
        for (std::size_t k = 0; k < K; ++k) {
            per_class[k] = Matrix(by_class[k].size(), ext.out_dim);
            for (std::size_t i = 0; i < by_class[k].size(); ++i) {
                const auto fv = ext.apply(ds.samples[by_class[k][i]].signal);
                std::copy(fv.values.begin(), fv.values.end(),
                          per_class[k].data.begin() +
                              static_cast<std::ptrdiff_t>(i * ext.out_dim));
            }
        }
        ECOCModel model = ecoc_train(per_class, ds.classes, C, seed);
        model.extractor = ext;
        save_model(model, train_out);
        std::printf("trained %zu learners on %zu samples (space %s, dim %zu) -> %s\n",
                    model.learners.size(), ds.samples.size(), train_space.c_str(),
                    ext.out_dim, train_out.c_str());
        return 0;
    }

    if (cmd_predict->parsed()) {
        const ECOCModel model = load_model(predict_model);
        DatasetManifest manifest;  // default column layout
        FTSignal sig = read_recording_csv(predict_input, manifest);
        sig = fit_to_length(sig, kCanonicalLength, LengthAlign::End);
        const auto pred = model.predict_signal(sig);
        std::printf("predicted: %s\n", model.classes[pred.class_index].c_str());
        std::printf("per-class losses:\n");
        for (std::size_t k = 0; k < model.classes.size(); ++k)
            std::printf("  %-20s %.6f\n", model.classes[k].c_str(),
                        pred.losses[k]);
        return 0;
    }

    if (cmd_eval->parsed()) {
        const Dataset ds = load_dataset_any(eval_data);
        const FeatureSpaceSpec spec = make_spec(eval_space, seed, pca_k, rica_k, zero_phase);
        const SplitPlan plan = make_split_plan(ds, repeats, n_train, n_test, seed);
        const EvalReport report = run_experiment(ds, spec, plan, C);
        print_report_line(report);
        if (!eval_report.empty()) write_report_csv(eval_report, {report});
        if (!eval_confusion.empty()) write_confusion_csv(eval_confusion, report);
        return 0;
    }

    if (cmd_compare->parsed()) {
        const Dataset ds = load_dataset_any(cmp_data);
        const auto specs = parse_spaces(cmp_spaces, seed, pca_k, rica_k);
        const SplitPlan plan = make_split_plan(ds, repeats, n_train, n_test, seed);
        const CompareResult result = compare_spaces(ds, specs, plan, C);
        for (const auto& report : result.reports) print_report_line(report);
        if (!cmp_out.empty()) write_report_csv(cmp_out, result.reports);
        if (!cmp_pvals.empty()) {
            std::vector<std::string> ids;
            for (const auto& s : specs) ids.push_back(s.id);
            write_pvals_csv(cmp_pvals, ids, result.pvals);
        }
        return 0;
    }

    if (cmd_ablate->parsed()) {
        const Dataset ds = load_dataset_any(abl_data);
        const FeatureSpaceSpec spec = make_spec(abl_space, seed, pca_k, rica_k);
        const SplitPlan plan = make_split_plan(ds, repeats, n_train, n_test, seed);
        const EvalReport report =
            permuted_signal_ablation(ds, spec, plan, C, derive_seed(seed, 0xABu));
        print_report_line(report);
        std::printf("chance level for %zu balanced classes: %.4f\n",
                    ds.classes.size(), 1.0 / static_cast<double>(ds.classes.size()));
        if (!abl_report.empty()) write_report_csv(abl_report, {report});
        return 0;
    }

    if (cmd_synth->parsed()) {
        const SynthDataset synth = generate_dataset(n_classes, per_class,
                                                    separation, seed);
        write_dataset_csv(synth.dataset, synth_out);
        std::printf("wrote %zu recordings (%zu classes x %zu) under %s\n",
                    synth.dataset.samples.size(), n_classes, per_class,
                    synth_out.c_str());
        std::printf("manifest: %s\n",
                    (std::filesystem::path(synth_out) / "manifest.txt").string().c_str());
        return 0;
    }

    if (cmd_inspect->parsed()) {
        const ECOCModel model = load_model(inspect_model);
        std::printf("format version: %u\n", kContainerVersion);
        std::printf("feature space: %s\n", model.extractor.spec.id.c_str());
        std::printf("base dim: %zu, output dim: %zu\n", model.extractor.base_dim,
                    model.extractor.out_dim);
        std::printf("classes (%zu):\n", model.classes.size());
        for (const auto& c : model.classes) std::printf("  %s\n", c.c_str());
        std::printf("coding matrix %zu x %zu (one-vs-one):\n", model.coding.K,
                    model.coding.L);
        for (std::size_t k = 0; k < model.coding.K; ++k) {
            std::string row;
            for (std::size_t l = 0; l < model.coding.L; ++l) {
                const int m = model.coding.at(k, l);
                row += (m > 0 ? '+' : (m < 0 ? '-' : '.'));
            }
            std::printf("  %s\n", row.c_str());
        }
        std::printf("learners: %zu, C = %g\n", model.learners.size(),
                    model.learners.empty() ? 0.0 : model.learners[0].C);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
