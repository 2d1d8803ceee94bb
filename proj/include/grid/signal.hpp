#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace grid {

// Channel order is fixed; every per-axis layout downstream follows it.
inline constexpr std::size_t kNumChannels = 6;
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "Fx", "Fy", "Fz", "Tx", "Ty", "Tz"};

inline constexpr double kCanonicalRateHz = 500.0;
inline constexpr std::size_t kCanonicalLength = 1600;

// One interaction recording: 6 synchronized channels at a fixed rate.
// Forces in N, torques in N·m. Immutable by convention after construction.
struct FTSignal {
    std::array<std::vector<double>, kNumChannels> channels;
    double sample_rate_hz = kCanonicalRateHz;

    std::size_t n_samples() const { return channels[0].size(); }
    double duration_s() const {
        return static_cast<double>(n_samples()) / sample_rate_hz;
    }

    static FTSignal zeros(std::size_t n, double rate_hz = kCanonicalRateHz);
};

struct LabeledSample {
    FTSignal signal;
    std::string label;
    std::string source_id;
};

struct Dataset {
    std::vector<LabeledSample> samples;
    std::vector<std::string> classes;  // order defines coding-matrix rows

    int class_index(const std::string& label) const;
    std::vector<std::size_t> class_counts() const;
};

// Flat numeric vector produced by a named feature space.
struct FeatureVector {
    std::vector<double> values;
    std::string space_id;

    std::size_t dim() const { return values.size(); }
};

struct ValidationResult {
    bool ok = true;
    std::vector<std::string> violations;
};

// Checks every FTSignal invariant; returns the violations instead of
// aborting. Each non-finite value is reported with channel name and index.
ValidationResult validate_signal(const FTSignal& signal);

enum class LengthAlign {
    End,   // keep last target_len samples; left-pad with first value
    Head,  // keep first target_len samples; right-pad with last value
};

// Brings a recording to target_len samples. End alignment is the default:
// the motion end is the common anchor across recordings, and padding
// replicates the edge value so no step is introduced.
FTSignal fit_to_length(const FTSignal& signal, std::size_t target_len,
                       LengthAlign align = LengthAlign::End);

// Concatenates feature vectors in order under a new space id.
// Throws std::invalid_argument on an empty part list.
FeatureVector concat_features(const std::vector<FeatureVector>& parts,
                              const std::string& new_space_id);

}  // namespace grid
