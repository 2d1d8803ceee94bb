#include "grid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "grid/dsp.hpp"
#include "grid/rng.hpp"

namespace grid {

namespace {

constexpr int kBandFilterOrder = 12;

void check_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("MaterialParams: ") + what +
                                    " is not finite");
}

// Spectral mirror z -> -z of a high-pass at fs/2 - fc gives a Butterworth
// low-pass at fc; only the odd coefficients change sign.
FilterCascade butterworth_lowpass(int order, double cutoff_hz,
                                  double sample_rate_hz) {
    FilterCascade lp = design_butterworth_highpass(
        order, sample_rate_hz / 2.0 - cutoff_hz, sample_rate_hz);
    for (auto& s : lp.sections) {
        s.b1 = -s.b1;
        s.a1 = -s.a1;
    }
    lp.design_meta.cutoff_hz = cutoff_hz;
    return lp;
}

// Steady-state variance of unit white noise through the cascade pair,
// (1/pi) * integral of |H|^2 over [0, pi].
double band_power_gain(const FilterCascade& hp, const FilterCascade& lp,
                       double fs) {
    const std::size_t grid = 4096;
    double acc = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
        const double f = (static_cast<double>(k) + 0.5) / grid * fs / 2.0;
        const double mag =
            std::abs(frequency_response(hp, f)) * std::abs(frequency_response(lp, f));
        acc += mag * mag;
    }
    return acc / static_cast<double>(grid);
}

// Unit-variance noise confined to [f_lo, f_hi]. Scaling by the filter's
// population gain (not the realization's sample std) keeps the amplitude
// distribution exactly N(0, 1) regardless of where the band sits, so the
// raw marginal carries no trace of the band position. The filter warm-up
// is generated and discarded.
std::vector<double> band_noise(std::size_t n, double f_lo, double f_hi,
                               double fs, Rng& rng) {
    const std::size_t pad = 400;
    std::vector<double> white(n + pad);
    for (auto& v : white) v = rng.normal();
    const auto hp = design_butterworth_highpass(kBandFilterOrder, f_lo, fs);
    const auto lp = butterworth_lowpass(kBandFilterOrder, f_hi, fs);
    std::vector<double> y = filter_forward(lp, filter_forward(hp, white));
    y.erase(y.begin(), y.begin() + pad);

    const double gain = band_power_gain(hp, lp, fs);
    if (gain > 0.0) {
        const double inv_sd = 1.0 / std::sqrt(gain);
        for (double& v : y) v *= inv_sd;
    }
    return y;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void validate_params(const MaterialParams& p) {
    const double nyquist = kCanonicalRateHz / 2.0;
    for (double v : p.base_offset) check_finite(v, "base_offset");
    for (double v : p.ramp_slope) check_finite(v, "ramp_slope");
    check_finite(p.initial_peak.amplitude, "peak amplitude");
    if (!(p.initial_peak.width_s > 0.0))
        throw std::invalid_argument("MaterialParams: peak width must be > 0");
    check_finite(p.oscillation.amplitude, "oscillation amplitude");
    if (p.oscillation.frequency_hz < 0.0 || p.oscillation.frequency_hz >= nyquist)
        throw std::invalid_argument(
            "MaterialParams: oscillation frequency must lie in [0, Nyquist)");
    check_finite(p.texture.amplitude, "texture amplitude");
    if (p.texture.amplitude != 0.0) {
        if (!(p.texture.f_lo_hz > 0.0) || !(p.texture.f_hi_hz > p.texture.f_lo_hz) ||
            p.texture.f_hi_hz >= nyquist)
            throw std::invalid_argument(
                "MaterialParams: texture band must satisfy 0 < f_lo < f_hi < Nyquist");
    }
    if (p.negative_dip) {
        check_finite(p.negative_dip->amplitude, "dip amplitude");
        check_finite(p.negative_dip->onset_s, "dip onset");
    }
    check_finite(p.noise_sd, "noise_sd");
}

FTSignal generate_signal(const MaterialParams& p, std::uint64_t seed) {
    validate_params(p);
    const std::size_t n = kCanonicalLength;
    const double fs = kCanonicalRateHz;
    FTSignal sig = FTSignal::zeros(n, fs);

    // Dynamic Fx terms shared with the mirrored Fz.
    std::vector<double> fx_dynamics(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        double v = p.ramp_slope[0] * t;
        if (p.initial_peak.amplitude != 0.0) {
            const double z = (t - p.initial_peak.center_s) / p.initial_peak.width_s;
            v += p.initial_peak.amplitude * std::exp(-0.5 * z * z);
        }
        if (p.oscillation.amplitude != 0.0)
            v += p.oscillation.amplitude *
                 std::sin(2.0 * M_PI * p.oscillation.frequency_hz * t +
                          p.oscillation.phase);
        if (p.negative_dip && p.negative_dip->amplitude != 0.0)
            v -= p.negative_dip->amplitude *
                 sigmoid((t - p.negative_dip->onset_s) / 0.08);
        fx_dynamics[i] = v;
    }

    for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto& ch = sig.channels[c];
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            double v = p.base_offset[c];
            if (c == 0)
                v += fx_dynamics[i];
            else if (c == 2)
                v += p.ramp_slope[2] * t - 0.5 * fx_dynamics[i];
            else
                v += p.ramp_slope[c] * t;
            ch[i] = v;
        }
        if (p.texture.amplitude != 0.0) {
            Rng rng(derive_seed(seed, c));
            const auto noise =
                band_noise(n, p.texture.f_lo_hz, p.texture.f_hi_hz, fs, rng);
            for (std::size_t i = 0; i < n; ++i)
                ch[i] += p.texture.amplitude * noise[i];
        }
        if (p.noise_sd != 0.0) {
            Rng rng(derive_seed(seed, 100 + c));
            for (std::size_t i = 0; i < n; ++i)
                ch[i] += p.noise_sd * rng.normal();
        }
    }
    return sig;
}

SynthDataset generate_dataset(std::size_t n_classes, std::size_t per_class,
                              double separation, std::uint64_t seed) {
    if (n_classes < 2)
        throw std::invalid_argument("generate_dataset: need n_classes >= 2");
    if (per_class < 2)
        throw std::invalid_argument("generate_dataset: need per_class >= 2");
    if (separation < 0.0)
        throw std::invalid_argument("generate_dataset: separation must be >= 0");

    SynthDataset out;
    out.class_params.reserve(n_classes);
    out.dataset.classes.reserve(n_classes);

    const double nyquist_margin = kCanonicalRateHz / 2.0 - 10.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        MaterialParams p;
        const double kk = static_cast<double>(k);
        p.base_offset[0] = 2.0 + 0.9 * separation * kk;
        p.base_offset[2] = -0.8;
        p.ramp_slope[0] = 1.2 + 0.3 * separation * static_cast<double>((k * 3) % 5);
        p.initial_peak.amplitude = 1.5 * separation * static_cast<double>(k % 3);
        p.initial_peak.center_s = 0.18;
        p.initial_peak.width_s = 0.04;
        p.oscillation.amplitude = 0.3 * separation * static_cast<double>(k % 2);
        p.oscillation.frequency_hz = 6.0 + 2.0 * separation * static_cast<double>(k % 5);
        p.oscillation.frequency_hz = std::min(p.oscillation.frequency_hz, 20.0);
        p.texture.f_lo_hz =
            std::min(35.0 + 12.0 * separation * static_cast<double>(k % 4),
                     nyquist_margin - 40.0);
        p.texture.f_hi_hz =
            std::min(p.texture.f_lo_hz + 25.0 + 5.0 * separation * static_cast<double>(k % 3),
                     nyquist_margin);
        p.texture.amplitude = 0.25 + 0.1 * separation * static_cast<double>(k % 5);
        if (k % 4 == 3 && separation > 0.0) {
            MaterialParams::NegativeDip dip;
            dip.amplitude = 0.8 * separation;
            dip.onset_s = 1.6;
            p.negative_dip = dip;
        }
        p.noise_sd = 0.15;
        validate_params(p);

        char name[32];
        std::snprintf(name, sizeof(name), "class_%02zu", k);
        out.dataset.classes.emplace_back(name);
        out.class_params.push_back(p);

        for (std::size_t i = 0; i < per_class; ++i) {
            LabeledSample sample;
            sample.label = name;
            char src[48];
            std::snprintf(src, sizeof(src), "synth/%s/%04zu", name, i);
            sample.source_id = src;
            sample.signal =
                generate_signal(p, derive_seed(seed, k * per_class + i));
            out.dataset.samples.push_back(std::move(sample));
        }
    }
    return out;
}

void write_dataset_csv(const Dataset& dataset, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<std::size_t> counter(dataset.classes.size(), 0);
    for (const auto& cls : dataset.classes)
        fs::create_directories(fs::path(out_dir) / cls);

    for (const auto& sample : dataset.samples) {
        const int k = dataset.class_index(sample.label);
        if (k < 0)
            throw std::invalid_argument("write_dataset_csv: unregistered label '" +
                                        sample.label + "'");
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%04zu.csv",
                      counter[static_cast<std::size_t>(k)]++);
        const fs::path path = fs::path(out_dir) / sample.label / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path.string());
        out << "time,Fx,Fy,Fz,Tx,Ty,Tz\n";
        const std::size_t n = sample.signal.n_samples();
        char buf[32];
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%.6f",
                          static_cast<double>(i) / sample.signal.sample_rate_hz);
            out << buf;
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g",
                              sample.signal.channels[c][i]);
                out << ',' << buf;
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }

    std::ofstream mf(fs::path(out_dir) / "manifest.txt", std::ios::binary);
    if (!mf)
        throw std::runtime_error("cannot write manifest under " + out_dir);
    mf << "# generated dataset manifest\n";
    mf << "root = .\n";
    mf << "classes = ";
    for (std::size_t k = 0; k < dataset.classes.size(); ++k)
        mf << (k ? "," : "") << dataset.classes[k];
    mf << "\n";
    mf << "sample_rate_hz = " << kCanonicalRateHz << "\n";
    mf << "target_length = " << kCanonicalLength << "\n";
    mf << "trim = end\n";
    if (!mf) throw std::runtime_error("manifest write failed under " + out_dir);
}

}  // namespace grid
