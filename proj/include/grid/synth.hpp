#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grid/signal.hpp"

namespace grid {

// Parametric model of one material's interaction signature. Each term maps
// to one observable characteristic: offsets/slopes set the magnitude,
// the texture band sets the frequency content, and peak/oscillation/dip
// shape the dynamics.
struct MaterialParams {
    std::array<double, kNumChannels> base_offset{};  // N / N*m
    std::array<double, kNumChannels> ramp_slope{};   // units per second

    struct Peak {
        double amplitude = 0.0;  // on Fx
        double center_s = 0.2;
        double width_s = 0.05;
    } initial_peak;

    struct Oscillation {
        double amplitude = 0.0;
        double frequency_hz = 0.0;
        double phase = 0.0;
    } oscillation;

    struct TextureBand {
        double f_lo_hz = 40.0;
        double f_hi_hz = 80.0;
        double amplitude = 0.0;  // std of the band-limited component
    } texture;

    struct NegativeDip {
        double amplitude = 0.0;  // magnitude of the sustained negative phase
        double onset_s = 1.0;
    };
    std::optional<NegativeDip> negative_dip;

    double noise_sd = 0.0;  // white measurement noise
};

// Throws std::invalid_argument when frequencies reach Nyquist, widths are
// not positive, or any amplitude is non-finite.
void validate_params(const MaterialParams& params);

// Renders a canonical 6x1600 recording at 500 Hz. Per channel:
// offset + slope*t + band-limited texture noise + white noise; Fx adds the
// peak, oscillation and dip; Fz mirrors Fx's trend at -0.5 scale.
// Deterministic per seed.
FTSignal generate_signal(const MaterialParams& params, std::uint64_t seed);

struct SynthDataset {
    Dataset dataset;
    std::vector<MaterialParams> class_params;  // ground truth per class
};

// Draws n_classes parameter sets on a grid whose spacing scales with
// `separation` (0 means all classes are identical), then renders per_class
// i.i.d. recordings for each. Class names are class_00, class_01, ...
SynthDataset generate_dataset(std::size_t n_classes, std::size_t per_class,
                              double separation, std::uint64_t seed);

// Writes one CSV per recording under out_dir/<class>/ plus a manifest.txt
// the ingestion layer reads back; the round trip reproduces the dataset
// exactly.
void write_dataset_csv(const Dataset& dataset, const std::string& out_dir);

}  // namespace grid
