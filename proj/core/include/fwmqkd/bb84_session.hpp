#pragma once

// BB84-style key transmission over the simulated four-wave-mixing channel.
//
// Alice's bit is her delay choice: bit 1 -> T_bit1 (elliptical field), bit 0 ->
// T_bit0 (spin-relaxed, linear field). For every pulse Alice draws a delay and
// Bob draws a wave-plate angle, both uniformly. A pulse is kept for bit slot i
// only when its delay is the one encoding bit i and its angle is the
// key-bearing decode basis, so one pulse in four survives sifting.
// Each slot's cumulative contrast is thresholded against the running mean of
// all slot contrasts.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwmqkd/counter_rng.hpp"
#include "fwmqkd/jones_optics.hpp"
#include "fwmqkd/photon_statistics.hpp"
#include "fwmqkd/spectral_model.hpp"

namespace fwmqkd::qkd {

inline constexpr int kBitsPerChar = 7;

/// 7-bit big-endian codes, concatenated. EncodingError for bytes >= 128.
std::vector<std::uint8_t> encode_message(std::string_view text);
/// Inverse of encode_message; a trailing partial group is ignored.
std::string decode_message(std::span<const std::uint8_t> bits);

struct Channel {
    std::string name;
    double lambda_nm = 540.0;
    double decode_basis_rad = 0.0;
    spectral::ModelParams model{};
    photon::AttenuationConfig attenuation{};
};

/// "540nm" (lower-biexciton tail, decoded at 0 deg) or "500nm" (upper
/// biexciton, decoded at 45 deg). ParameterError for other names.
Channel channel_preset(std::string_view name);
std::vector<std::string> channel_preset_names();

enum class ThresholdMode { running_mean, fixed };

struct SessionConfig {
    std::string message = "Tar Heel";
    double delay_bit1_fs = 0.0;
    double delay_bit0_fs = 500.0;
    std::array<double, 2> bases_rad{0.0, 0.7853981633974483};
    int cycles = 1000;
    Channel channel = channel_preset("540nm");
    ThresholdMode threshold_mode = ThresholdMode::running_mean;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class BitEstimate : int { zero = 0, one = 1, undecided = -1 };

struct SlotDesignation {
    double delay_fs = 0.0;
    double basis_rad = 0.0;
};

struct BitSlot {
    std::size_t bit_index = 0;
    std::uint8_t true_bit = 0;
    SlotDesignation designation{};
    std::vector<photon::PhotonRecord> retained_records;
    std::uint64_t photons_accumulated = 0;
    std::uint64_t n_h = 0;
    std::uint64_t n_v = 0;
    BitEstimate current_estimate = BitEstimate::undecided;

    /// ParameterError when the record's (delay, basis) tags do not match the designation.
    void absorb(const photon::PhotonRecord& record);
    /// Cumulative contrast (N_H - N_V)/(N_H + N_V); empty before the first photon.
    std::optional<double> contrast() const;
};

/// Deterministic detected intensities for every configured (delay, basis) pair.
class ChannelModel {
public:
    ChannelModel(const Channel& channel, std::span<const double> delays_fs, std::span<const double> bases_rad);

    const Channel& channel() const noexcept { return channel_; }
    /// ParameterError for a delay or basis that was not configured.
    jones::Intensities intensities(double delay_fs, double basis_rad) const;
    double contrast(double delay_fs, double basis_rad) const;

private:
    struct Entry {
        double delay_fs;
        double basis_rad;
        jones::Intensities intensities;
    };
    Channel channel_;
    std::vector<Entry> entries_;
};

/// One pulse through spectral model, optics and detector, tagged with (delay, basis).
photon::PhotonRecord run_pulse(std::uint64_t pulse_index, double alice_delay_fs, double bob_basis_rad,
                               const ChannelModel& channel, CounterRng& rng);

bool matches(const photon::PhotonRecord& record, const SlotDesignation& designation) noexcept;

std::vector<photon::PhotonRecord> sift(std::span<const photon::PhotonRecord> records,
                                       const SlotDesignation& designation);

/// Fallback threshold and orientation calibrated from the noiseless channel.
/// polarity = +1 when the bit-1 contrast exceeds the bit-0 contrast.
struct DecodeThreshold {
    double contrast_bit1 = 1.0;
    double contrast_bit0 = -1.0;
    double fixed_midpoint = 0.0;
    int polarity = +1;
};

DecodeThreshold calibrate_threshold(const ChannelModel& channel, const SessionConfig& cfg);

/// Running mean of the decided contrasts; when every decided contrast lies on
/// one side of the calibrated midpoint the running mean is meaningless and the
/// midpoint is used instead. A contrast exactly on the threshold is undecided.
std::vector<BitEstimate> decode_contrasts(std::span<const std::optional<double>> contrasts, ThresholdMode mode,
                                          const DecodeThreshold& threshold);
std::vector<BitEstimate> decode_bits(std::span<const BitSlot> slots, ThresholdMode mode,
                                     const DecodeThreshold& threshold);

/// Characters whose 7 bits are all decided; '?' otherwise.
std::string render_estimates(std::span<const BitEstimate> estimates);

struct CurvePoint {
    double retained_photons_per_bit = 0.0;
    double all_photons_per_bit = 0.0;
    std::uint64_t pulses = 0;
    double percent_correct = 0.0;
};

struct TrajectoryPoint {
    std::size_t bit_index = 0;
    std::uint64_t photons = 0;
    double contrast = 0.0;
    BitEstimate estimate = BitEstimate::undecided;
    bool correct = false;
};

struct Snapshot {
    std::uint64_t photons_per_bit = 0;
    std::string text;
};

struct SessionReport {
    std::string message;
    std::string channel;
    std::size_t n_bits = 0;
    int cycles = 0;
    std::uint64_t pulses = 0;
    std::uint64_t retained_pulses = 0;
    std::uint64_t retained_photons = 0;
    std::uint64_t all_photons = 0;
    double sift_retention = 0.0;
    DecodeThreshold calibration{};

    std::vector<CurvePoint> curve;  ///< one point per retained pulse carrying photons
    std::vector<TrajectoryPoint> trajectories;
    std::vector<Snapshot> snapshots;

    std::vector<BitEstimate> final_estimates;
    std::string final_decode;
    double final_percent_correct = 0.0;
    std::size_t undecided_bits = 0;
    /// Photons per bit from which every later curve point is 100% correct.
    std::optional<double> convergence_retained_photons_per_bit;
    std::optional<double> convergence_all_photons_per_bit;

    /// Percent correct on the retained-photons-per-bit axis, sampled as a step function.
    double percent_correct_at(double retained_photons_per_bit) const;
};

SessionReport run_session(const SessionConfig& cfg);

}  // namespace fwmqkd::qkd
