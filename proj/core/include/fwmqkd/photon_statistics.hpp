#pragma once

// Photon-number-resolved detection of attenuated signal pulses and the
// accumulated contrast statistics built from the per-pulse counts.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fwmqkd/counter_rng.hpp"

namespace fwmqkd::photon {

struct AttenuationConfig {
    double mean_total_photons = 1.0;
    double g2_target = 1.2;
    int max_photons = 5;
    std::uint64_t seed = 0;
    /// Additive shift of the H/V split in contrast units, for detector-to-detector drift.
    double contrast_offset = 0.0;

    void validate() const;
};

struct PhotonRecord {
    int n_h = 0;
    int n_v = 0;
    double delay_fs = 0.0;
    double theta_rad = 0.0;
    std::uint64_t pulse_index = 0;
};

struct PhotonDraw {
    int n_h = 0;
    int n_v = 0;
    bool clamped = false;  ///< either port hit max_photons from above
};

/// Shared gamma gain (unit mean, variance g2_target - 1) times independent
/// Poisson counts per port, each clamped to max_photons.
PhotonDraw draw_photon_counts(double i_h, double i_v, const AttenuationConfig& cfg, CounterRng& rng);

/// <n(n-1)> / <n>^2. DegenerateInputError when the mean is zero.
double compute_g2(std::span<const int> counts);

/// Photon-number histogram with the moments needed for g2; merges exactly.
class CountHistogram {
public:
    void add(int n);
    void merge(const CountHistogram& other);
    std::uint64_t samples() const noexcept { return samples_; }
    double mean() const;
    double g2() const;
    const std::vector<std::uint64_t>& bins() const noexcept { return bins_; }

private:
    std::vector<std::uint64_t> bins_;
    std::uint64_t samples_ = 0;
};

inline constexpr double kVoltsPerPhoton = 0.6;

double emulate_sipm(int n, CounterRng& rng, double noise_sigma_v, double volts_per_photon = kVoltsPerPhoton);
int invert_sipm(double volts, double volts_per_photon = kVoltsPerPhoton);

struct ContrastStats {
    std::uint64_t n_h = 0;
    std::uint64_t n_v = 0;
    double p_cum = 0.0;
    double p_bar = 0.0;
    double sigma_p = 0.0;
    std::uint64_t m_used = 0;   ///< pulses with at least one photon
    std::uint64_t m_total = 0;  ///< all pulses
};

/// Order-independent accumulation of per-pulse counts. Pulses are binned by
/// (n_h, n_v), so merging partial results is exact.
class ContrastAccumulator {
public:
    void add(int n_h, int n_v);
    void add(const PhotonRecord& r) { add(r.n_h, r.n_v); }
    void merge(const ContrastAccumulator& other);
    std::uint64_t pulses() const noexcept { return pulses_; }
    std::uint64_t photons() const noexcept { return n_h_ + n_v_; }

    /// DegenerateInputError when no photons were seen. sigma_p is +inf while
    /// fewer than two pulses carry photons.
    ContrastStats stats() const;

private:
    std::map<std::pair<int, int>, std::uint64_t> bins_;
    std::uint64_t pulses_ = 0;
    std::uint64_t n_h_ = 0;
    std::uint64_t n_v_ = 0;
};

/// ParameterError on an empty record set.
ContrastStats accumulate_contrast(std::span<const PhotonRecord> records);

struct Resolution {
    double value = 0.0;
    bool infinite = false;
};

/// |P_bar(0) - P_bar(45)| / sqrt(sigma_0^2 + sigma_45^2).
Resolution resolution(const ContrastStats& at_0, const ContrastStats& at_45);

}  // namespace fwmqkd::photon
