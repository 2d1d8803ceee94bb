#include "grid/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grid {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

bool BiquadSection::is_stable() const {
    // Roots of z^2 + a1 z + a2: |product| = |a2| < 1 and the triangle
    // condition |a1| < 1 + a2 together bound both roots inside the circle.
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

FilterCascade design_butterworth_highpass(int order, double cutoff_hz,
                                          double sample_rate_hz) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument(
            "design_butterworth_highpass: order must be even and >= 2");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument(
            "design_butterworth_highpass: sample rate must be positive");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= sample_rate_hz / 2.0)
        throw std::invalid_argument(
            "design_butterworth_highpass: cutoff must lie in (0, Nyquist)");

    // Prewarped analog cutoff for the normalized bilinear transform
    // s = (1 - z^-1) / (1 + z^-1).
    const double warped = std::tan(kPi * cutoff_hz / sample_rate_hz);

    FilterCascade cascade;
    cascade.design_meta = {order, cutoff_hz, sample_rate_hz};
    cascade.overall_gain = 1.0;
    cascade.sections.reserve(static_cast<std::size_t>(order / 2));

    for (int k = 0; k < order / 2; ++k) {
        // Upper-half-plane pole of the unit Butterworth low-pass prototype.
        const double theta = kPi / 2.0 + kPi * (2 * k + 1) / (2.0 * order);
        const std::complex<double> lp_pole(std::cos(theta), std::sin(theta));

        // Low-pass -> high-pass, then bilinear into z.
        const std::complex<double> hp_pole = warped / lp_pole;
        const std::complex<double> z_pole = (1.0 + hp_pole) / (1.0 - hp_pole);

        BiquadSection s;
        s.a1 = -2.0 * z_pole.real();
        s.a2 = std::norm(z_pole);
        // Double zero at z = 1 (from s = 0); normalize to unity at Nyquist
        // (z = -1), where the high-pass response must be exactly 1.
        const double g = (1.0 - s.a1 + s.a2) / 4.0;
        s.b0 = g;
        s.b1 = -2.0 * g;
        s.b2 = g;
        cascade.sections.push_back(s);
    }
    return cascade;
}

std::vector<double> filter_forward(const FilterCascade& cascade,
                                   const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const auto& s : cascade.sections) {
        double s1 = 0.0, s2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    if (cascade.overall_gain != 1.0)
        for (double& v : y) v *= cascade.overall_gain;
    return y;
}

std::vector<double> filter_zero_phase(const FilterCascade& cascade,
                                      const std::vector<double>& x) {
    std::vector<double> y = filter_forward(cascade, x);
    std::reverse(y.begin(), y.end());
    y = filter_forward(cascade, y);
    std::reverse(y.begin(), y.end());
    return y;
}

std::complex<double> frequency_response(const FilterCascade& cascade,
                                        double f_hz) {
    const double w = 2.0 * kPi * f_hz / cascade.design_meta.sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = cascade.overall_gain;
    for (const auto& s : cascade.sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

std::vector<double> magnitude_histogram(const std::vector<double>& x,
                                        int n_bins, double lo, double hi) {
    if (x.empty())
        throw std::invalid_argument("magnitude_histogram: empty sequence");
    if (n_bins < 1 || !(lo < hi))
        throw std::invalid_argument("magnitude_histogram: bad bin layout");

    const double w = (hi - lo) / n_bins;
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
    for (double v : x) {
        long k = static_cast<long>(std::floor((v - lo) / w));
        k = std::clamp<long>(k, 0, n_bins - 1);
        ++counts[static_cast<std::size_t>(k)];
    }
    std::vector<double> hist(static_cast<std::size_t>(n_bins));
    for (std::size_t i = 0; i < counts.size(); ++i)
        hist[i] = static_cast<double>(counts[i]) / static_cast<double>(x.size());
    return hist;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& v : a) v /= static_cast<double>(n);
}

namespace {

// Bluestein's chirp-z trick: exact length-N DFT through power-of-two FFTs.
std::vector<std::complex<double>> dft_bluestein(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(2 * n - 1);

    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small for large N.
        const double ang =
            kPi * static_cast<double>((k * k) % (2 * n)) / static_cast<double>(n);
        chirp[k] = std::polar(1.0, -ang);
    }

    std::vector<std::complex<double>> a(m, 0.0), b(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k)
        b[k] = b[m - k] = std::conj(chirp[k]);

    fft_radix2(a, false);
    fft_radix2(b, false);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_radix2(a, true);

    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft: empty sequence");
    if ((n & (n - 1)) == 0) {
        std::vector<std::complex<double>> a(x.begin(), x.end());
        fft_radix2(a, false);
        return a;
    }
    return dft_bluestein(x);
}

std::vector<double> dft_magnitude(const std::vector<double>& x) {
    const auto spectrum = dft(x);
    const std::size_t half = x.size() / 2;
    std::vector<double> mag(half + 1);
    for (std::size_t k = 0; k <= half; ++k) mag[k] = std::abs(spectrum[k]);
    return mag;
}

std::vector<double> minmax_normalize(const std::vector<double>& x) {
    if (x.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(x.size());
    if (hi == lo) return out;  // constant input maps to all zeros
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo) * inv;
    return out;
}

}  // namespace grid
