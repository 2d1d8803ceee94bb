#include "grid/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grid {

FTSignal FTSignal::zeros(std::size_t n, double rate_hz) {
    FTSignal s;
    s.sample_rate_hz = rate_hz;
    for (auto& ch : s.channels) ch.assign(n, 0.0);
    return s;
}

int Dataset::class_index(const std::string& label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == label) return static_cast<int>(i);
    return -1;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (const auto& s : samples) {
        int k = class_index(s.label);
        if (k >= 0) ++counts[static_cast<std::size_t>(k)];
    }
    return counts;
}

ValidationResult validate_signal(const FTSignal& signal) {
    ValidationResult res;
    auto fail = [&](std::string msg) {
        res.ok = false;
        res.violations.push_back(std::move(msg));
    };

    if (!(signal.sample_rate_hz > 0.0))
        fail("sample_rate_hz must be positive, got " +
             std::to_string(signal.sample_rate_hz));

    const std::size_t n = signal.channels[0].size();
    if (n == 0) fail("channel Fx is empty");
    for (std::size_t c = 1; c < kNumChannels; ++c) {
        if (signal.channels[c].size() != n)
            fail(std::string("length mismatch: channel ") + kChannelNames[c] +
                 " has " + std::to_string(signal.channels[c].size()) +
                 " samples, expected " + std::to_string(n));
    }
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto& ch = signal.channels[c];
        for (std::size_t i = 0; i < ch.size(); ++i) {
            if (!std::isfinite(ch[i])) {
                fail(std::string("non-finite value in channel ") +
                     kChannelNames[c] + " at index " + std::to_string(i));
                break;  // one report per channel is enough
            }
        }
    }
    return res;
}

FTSignal fit_to_length(const FTSignal& signal, std::size_t target_len,
                       LengthAlign align) {
    auto valid = validate_signal(signal);
    if (!valid.ok)
        throw std::invalid_argument("fit_to_length: invalid signal: " +
                                    valid.violations.front());
    if (target_len == 0)
        throw std::invalid_argument("fit_to_length: target_len must be >= 1");

    const std::size_t n = signal.n_samples();
    if (n == target_len) return signal;

    FTSignal out;
    out.sample_rate_hz = signal.sample_rate_hz;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const auto& src = signal.channels[c];
        auto& dst = out.channels[c];
        dst.reserve(target_len);
        if (n > target_len) {
            if (align == LengthAlign::End)
                dst.assign(src.end() - static_cast<std::ptrdiff_t>(target_len),
                           src.end());
            else
                dst.assign(src.begin(),
                           src.begin() + static_cast<std::ptrdiff_t>(target_len));
        } else {
            const std::size_t pad = target_len - n;
            if (align == LengthAlign::End) {
                dst.assign(pad, src.front());
                dst.insert(dst.end(), src.begin(), src.end());
            } else {
                dst.assign(src.begin(), src.end());
                dst.insert(dst.end(), pad, src.back());
            }
        }
    }
    return out;
}

FeatureVector concat_features(const std::vector<FeatureVector>& parts,
                              const std::string& new_space_id) {
    if (parts.empty())
        throw std::invalid_argument("concat_features: empty part list");
    FeatureVector out;
    out.space_id = new_space_id;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.values.size();
    out.values.reserve(total);
    for (const auto& p : parts)
        out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    return out;
}

}  // namespace grid
