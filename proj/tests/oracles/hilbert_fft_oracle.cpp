#include "hilbert_fft_oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace fwmqkd::test {

namespace {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanFree {
    void operator()(fftw_plan p) const noexcept { fftw_destroy_plan(p); }
};
using RealBuf = std::unique_ptr<double[], FftwFree>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanFree>;

RealBuf real_buf(std::size_t n) { return RealBuf(static_cast<double*>(fftw_malloc(sizeof(double) * n))); }
ComplexBuf complex_buf(std::size_t n) {
    return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

std::vector<std::complex<double>> forward(const std::vector<double>& in) {
    const std::size_t n = in.size();
    auto r = real_buf(n);
    auto c = complex_buf(n / 2 + 1);
    Plan plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), r.get(), c.get(), FFTW_ESTIMATE));
    std::copy(in.begin(), in.end(), r.get());
    fftw_execute(plan.get());
    std::vector<std::complex<double>> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {c[k][0], c[k][1]};
    return out;
}

std::vector<double> inverse(const std::vector<std::complex<double>>& in, std::size_t n) {
    auto c = complex_buf(in.size());
    auto r = real_buf(n);
    Plan plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), c.get(), r.get(), FFTW_ESTIMATE));
    for (std::size_t k = 0; k < in.size(); ++k) {
        c[k][0] = in[k].real();
        c[k][1] = in[k].imag();
    }
    fftw_execute(plan.get());
    std::vector<double> out(r.get(), r.get() + n);
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

}  // namespace

SampledTransform fft_hilbert(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("fft_hilbert: bad grid");
    const double h = (hi - lo) / static_cast<double>(n);
    const std::size_t m = 2 * n;

    SampledTransform out;
    out.x.resize(n);
    std::vector<double> signal(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.x[i] = lo + h * static_cast<double>(i);
        signal[i] = f(out.x[i]);
    }
    // kernel[j] for lags j = -(n-1)..(n-1), stored circularly.
    std::vector<double> kernel(m, 0.0);
    for (std::size_t j = 1; j < n; j += 2) {
        const double k = 2.0 / (std::numbers::pi * static_cast<double>(j));
        kernel[j] = k;
        kernel[m - j] = -k;
    }
    auto fs = forward(signal);
    const auto fk = forward(kernel);
    for (std::size_t k = 0; k < fs.size(); ++k) fs[k] *= fk[k];
    const auto conv = inverse(fs, m);
    out.value.assign(conv.begin(), conv.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

}  // namespace fwmqkd::test
