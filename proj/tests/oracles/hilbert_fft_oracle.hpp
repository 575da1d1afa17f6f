#pragma once

#include <functional>
#include <vector>

namespace fwmqkd::test {

struct SampledTransform {
    std::vector<double> x;
    std::vector<double> value;
};

// Discrete Hilbert transform H[f](y) = (1/pi) PV int f(x)/(y - x) dx of f
// sampled on n equally spaced points over [lo, hi). Uses the odd-index kernel
// 2/(pi m) as a zero-padded FFT convolution, which is spectrally accurate for
// smooth, well-decayed f.
SampledTransform fft_hilbert(const std::function<double(double)>& f, double lo, double hi, std::size_t n);

}  // namespace fwmqkd::test
