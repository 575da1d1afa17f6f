#include "fwmqkd/photon_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fwmqkd/error.hpp"

namespace fwmqkd::photon {

void AttenuationConfig::validate() const {
    if (!(mean_total_photons > 0.0) || !std::isfinite(mean_total_photons)) {
        throw ParameterError("mean photons per pulse must be positive");
    }
    if (!(g2_target >= 1.0) || !std::isfinite(g2_target)) throw ParameterError("g2 target must be >= 1");
    if (max_photons < 1) throw ParameterError("max_photons must be >= 1");
    if (!(std::abs(contrast_offset) <= 1.0)) throw ParameterError("contrast offset must lie in [-1, 1]");
}

PhotonDraw draw_photon_counts(double i_h, double i_v, const AttenuationConfig& cfg, CounterRng& rng) {
    cfg.validate();
    if (!(i_h >= 0.0) || !(i_v >= 0.0) || !(i_h + i_v > 0.0)) {
        throw ParameterError("detected intensities must be non-negative with a positive sum");
    }
    double frac_h = i_h / (i_h + i_v);
    if (cfg.contrast_offset != 0.0) frac_h = std::clamp(frac_h + 0.5 * cfg.contrast_offset, 0.0, 1.0);

    double gain = 1.0;
    if (cfg.g2_target > 1.0) {
        const double var = cfg.g2_target - 1.0;
        std::gamma_distribution<double> gamma(1.0 / var, var);
        gain = gamma(rng);
    }
    auto poisson = [&](double mu) -> int {
        if (!(mu > 0.0)) return 0;
        std::poisson_distribution<int> dist(mu);
        return dist(rng);
    };
    const double mu_h = gain * cfg.mean_total_photons * frac_h;
    const double mu_v = gain * cfg.mean_total_photons * (1.0 - frac_h);
    PhotonDraw d;
    const int raw_h = poisson(mu_h);
    const int raw_v = poisson(mu_v);
    d.n_h = std::min(raw_h, cfg.max_photons);
    d.n_v = std::min(raw_v, cfg.max_photons);
    d.clamped = raw_h > cfg.max_photons || raw_v > cfg.max_photons;
    return d;
}

double compute_g2(std::span<const int> counts) {
    if (counts.empty()) throw ParameterError("g2 needs at least one sample");
    CountHistogram h;
    for (int n : counts) h.add(n);
    return h.g2();
}

void CountHistogram::add(int n) {
    if (n < 0) throw ParameterError("photon counts must be non-negative");
    const auto idx = static_cast<std::size_t>(n);
    if (bins_.size() <= idx) bins_.resize(idx + 1, 0);
    ++bins_[idx];
    ++samples_;
}

void CountHistogram::merge(const CountHistogram& other) {
    if (bins_.size() < other.bins_.size()) bins_.resize(other.bins_.size(), 0);
    for (std::size_t i = 0; i < other.bins_.size(); ++i) bins_[i] += other.bins_[i];
    samples_ += other.samples_;
}

double CountHistogram::mean() const {
    if (samples_ == 0) throw ParameterError("empty histogram");
    double sum = 0.0;
    for (std::size_t n = 0; n < bins_.size(); ++n) sum += static_cast<double>(n) * static_cast<double>(bins_[n]);
    return sum / static_cast<double>(samples_);
}

double CountHistogram::g2() const {
    const double m = mean();
    if (m == 0.0) throw DegenerateInputError("g2 undefined for zero mean photon number");
    double factorial_moment = 0.0;
    for (std::size_t n = 2; n < bins_.size(); ++n) {
        factorial_moment += static_cast<double>(n * (n - 1)) * static_cast<double>(bins_[n]);
    }
    factorial_moment /= static_cast<double>(samples_);
    return factorial_moment / (m * m);
}

double emulate_sipm(int n, CounterRng& rng, double noise_sigma_v, double volts_per_photon) {
    if (n < 0) throw ParameterError("photon number must be non-negative");
    if (!(noise_sigma_v >= 0.0)) throw ParameterError("noise sigma must be non-negative");
    double v = n * volts_per_photon;
    if (noise_sigma_v > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sigma_v);
        v += noise(rng);
    }
    return v;
}

int invert_sipm(double volts, double volts_per_photon) {
    if (!(volts_per_photon > 0.0)) throw ParameterError("volts per photon must be positive");
    const double n = std::round(volts / volts_per_photon);
    return n > 0.0 ? static_cast<int>(n) : 0;
}

void ContrastAccumulator::add(int n_h, int n_v) {
    if (n_h < 0 || n_v < 0) throw ParameterError("photon counts must be non-negative");
    ++bins_[{n_h, n_v}];
    ++pulses_;
    n_h_ += static_cast<std::uint64_t>(n_h);
    n_v_ += static_cast<std::uint64_t>(n_v);
}

void ContrastAccumulator::merge(const ContrastAccumulator& other) {
    for (const auto& [key, count] : other.bins_) bins_[key] += count;
    pulses_ += other.pulses_;
    n_h_ += other.n_h_;
    n_v_ += other.n_v_;
}

ContrastStats ContrastAccumulator::stats() const {
    if (n_h_ + n_v_ == 0) throw DegenerateInputError("no photons accumulated; contrast undefined");
    ContrastStats s;
    s.n_h = n_h_;
    s.n_v = n_v_;
    s.m_total = pulses_;
    s.p_cum = (static_cast<double>(n_h_) - static_cast<double>(n_v_)) / static_cast<double>(n_h_ + n_v_);

    auto pulse_contrast = [](int h, int v) { return static_cast<double>(h - v) / static_cast<double>(h + v); };
    double sum = 0.0;
    for (const auto& [key, count] : bins_) {
        if (key.first + key.second == 0) continue;
        s.m_used += count;
        sum += static_cast<double>(count) * pulse_contrast(key.first, key.second);
    }
    const double m = static_cast<double>(s.m_used);
    s.p_bar = std::clamp(sum / m, -1.0, 1.0);
    if (s.m_used < 2) {
        s.sigma_p = std::numeric_limits<double>::infinity();
        return s;
    }
    double ss = 0.0;
    for (const auto& [key, count] : bins_) {
        if (key.first + key.second == 0) continue;
        const double d = pulse_contrast(key.first, key.second) - s.p_bar;
        ss += static_cast<double>(count) * d * d;
    }
    s.sigma_p = std::sqrt(ss / (m * (m - 1.0)));
    return s;
}

ContrastStats accumulate_contrast(std::span<const PhotonRecord> records) {
    if (records.empty()) throw ParameterError("no records to accumulate");
    ContrastAccumulator acc;
    for (const auto& r : records) acc.add(r);
    return acc.stats();
}

Resolution resolution(const ContrastStats& at_0, const ContrastStats& at_45) {
    if (std::isnan(at_0.sigma_p) || std::isnan(at_45.sigma_p)) throw ParameterError("standard errors must not be NaN");
    const double diff = std::abs(at_0.p_bar - at_45.p_bar);
    const double denom = std::hypot(at_0.sigma_p, at_45.sigma_p);
    if (denom == 0.0) {
        if (diff == 0.0) return {0.0, false};
        return {std::numeric_limits<double>::infinity(), true};
    }
    return {diff / denom, false};
}

}  // namespace fwmqkd::photon
