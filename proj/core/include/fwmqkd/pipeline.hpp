#pragma once

// Batch commands behind the fwmqkd CLI. Every command renders its outputs in
// memory from (config, seed); write_outputs() then puts them on disk together
// with a manifest, so a failing command never leaves a partial set of files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fwmqkd/bb84_session.hpp"
#include "fwmqkd/field_reconstruction.hpp"
#include "fwmqkd/photon_statistics.hpp"
#include "fwmqkd/spectral_model.hpp"

namespace fwmqkd::pipeline {

inline constexpr std::string_view kOutDirEnv = "FWMQKD_OUT_DIR";

struct SpectraSpec {
    std::vector<double> delays_fs{0.0, 500.0};
    std::vector<spectral::PolarizationCondition> conditions{spectral::PolarizationCondition::RRVV,
                                                            spectral::PolarizationCondition::RRVH};
};

struct AxisSpec {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    /// min, min+step, ... up to max (inclusive within 1e-9 steps).
    std::vector<double> values() const;
};

struct ContrastMapSpec {
    AxisSpec delays_fs{0.0, 500.0, 10.0};
    AxisSpec wavelengths_nm{490.0, 550.0, 2.0};
};

struct ChannelSpec {
    double lambda_nm = 540.0;
    double decode_basis_deg = 0.0;
};

struct DetectorSpec {
    std::uint64_t pulses = 100000;
    double noise_sigma_v = 0.05;
    std::string channel = "540nm";
    double delay_fs = 0.0;
    double theta_deg = 0.0;
};

struct SessionSpec {
    std::string message = "Tar Heel";
    std::string channel = "540nm";
    double delay_bit1_fs = 0.0;
    double delay_bit0_fs = 500.0;
    std::array<double, 2> bases_deg{0.0, 45.0};
    int cycles = 1000;
    qkd::ThresholdMode threshold_mode = qkd::ThresholdMode::running_mean;
};

struct PipelineConfig {
    spectral::ModelParams model{};
    reconstruction::GridSpec grid{};
    photon::AttenuationConfig attenuation{};
    std::map<std::string, ChannelSpec> channels{{"500nm", {500.0, 45.0}}, {"540nm", {540.0, 0.0}}};
    SessionSpec session{};
    SpectraSpec spectra{};
    ContrastMapSpec contrast_map{};
    DetectorSpec detector{};
    std::string output_dir = "fwmqkd-out";
    std::uint64_t seed = 0;
    unsigned threads = 1;

    /// Throws ParameterError naming the offending section.
    void validate() const;

    qkd::Channel channel(const std::string& name) const;
    qkd::SessionConfig session_config() const;
};

/// JSON text -> config. Absent keys keep their defaults; unknown keys and
/// type mismatches raise InputError.
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every numerical setting (output_dir and threads excluded).
std::string canonical_json(const PipelineConfig& cfg);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string config_hash(const PipelineConfig& cfg);

struct Artifact {
    std::string name;
    std::string content;
};

struct CommandOutput {
    std::string command;
    std::vector<Artifact> artifacts;
};

struct ReconstructInput {
    std::string text;  ///< CSV document
};

CommandOutput cmd_spectra(const PipelineConfig& cfg);
CommandOutput cmd_contrast_map(const PipelineConfig& cfg);
/// Accepts either the ratio schema (T_fs, lambda_nm, gamma_0, gamma_45) or the
/// contrast-map schema (T_fs, lambda_nm, theta_deg, P).
CommandOutput cmd_reconstruct(const PipelineConfig& cfg, const ReconstructInput& input);
CommandOutput cmd_qkd(const PipelineConfig& cfg);
CommandOutput cmd_detector_check(const PipelineConfig& cfg);

/// Parses the dataset of cmd_reconstruct; exposed for tests.
std::vector<reconstruction::RatioObservation> read_ratio_dataset(std::string_view csv_text, double xi);

/// Serialized SessionReport pieces.
std::string session_report_json(const qkd::SessionReport& report);
std::string session_trajectory_csv(const qkd::SessionReport& report);
std::string session_snapshots_text(const qkd::SessionReport& report);

/// Writes artifacts and manifest_<command>.json into dir. IoError on failure.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const PipelineConfig& cfg,
                                                 const CommandOutput& output, double elapsed_ms);

}  // namespace fwmqkd::pipeline
