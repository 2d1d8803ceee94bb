#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace grid {

// One direct-form second-order section. a0 is normalized to 1.
struct BiquadSection {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    bool is_stable() const;  // poles strictly inside the unit circle
};

struct FilterDesignMeta {
    int order = 0;
    double cutoff_hz = 0.0;
    double sample_rate_hz = 0.0;
};

// Designed digital high-pass filter as an ordered cascade of biquads.
// Immutable after design.
struct FilterCascade {
    std::vector<BiquadSection> sections;
    double overall_gain = 1.0;
    FilterDesignMeta design_meta;
};

// Butterworth high-pass via analog prototype -> high-pass transform ->
// bilinear transform with frequency prewarping (analog cutoff tan(pi*fc/fs)).
// Conjugate pole pairs are grouped into real-coefficient biquads, each
// normalized to unity gain at Nyquist. Order must be even and >= 2;
// cutoff must lie strictly below Nyquist.
FilterCascade design_butterworth_highpass(int order, double cutoff_hz,
                                          double sample_rate_hz);

// Single-pass causal filtering, direct-form-II-transposed per section,
// zero initial state. Output length equals input length.
std::vector<double> filter_forward(const FilterCascade& cascade,
                                   const std::vector<double>& x);

// Forward-backward pass for zero phase; squares the magnitude response.
std::vector<double> filter_zero_phase(const FilterCascade& cascade,
                                      const std::vector<double>& x);

// H(e^{j 2 pi f / fs}) as the product over sections times overall_gain.
std::complex<double> frequency_response(const FilterCascade& cascade,
                                        double f_hz);

inline constexpr int kHistogramBins = 100;
inline constexpr double kHistogramLo = -1.5;
inline constexpr double kHistogramHi = 1.5;

// Histogram over n_bins equal-width bins on [lo, hi); bin k covers
// [lo + k*w, lo + (k+1)*w), the last bin is closed at hi. Out-of-range
// values clip into the edge bins so no mass is dropped. Entries are
// normalized by the sequence length and sum to 1.
std::vector<double> magnitude_histogram(const std::vector<double>& x,
                                        int n_bins = kHistogramBins,
                                        double lo = kHistogramLo,
                                        double hi = kHistogramHi);

// In-place radix-2 FFT for power-of-two sizes; inverse divides by n.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

// Exact length-N DFT for arbitrary N (radix-2 when N is a power of two,
// Bluestein otherwise).
std::vector<std::complex<double>> dft(const std::vector<double>& x);

// One-sided magnitude spectrum |X_k|, k = 0..floor(N/2); length floor(N/2)+1.
std::vector<double> dft_magnitude(const std::vector<double>& x);

// (x - min) / (max - min); all zeros when the input is constant.
std::vector<double> minmax_normalize(const std::vector<double>& x);

std::size_t next_pow2(std::size_t n);

}  // namespace grid
