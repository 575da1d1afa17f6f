#pragma once

// Three-resonance four-wave-mixing response model.
//
// The signal for a circular tensor element is a sum over the lower biexciton
// (u = -1), the single exciton (u = 0) and the upper biexciton (u = +1), each
// with a complex Gaussian line shape G_u + i*H[G_u] centered at u*Delta.
// Linear elements (RRVV, RRVH) are fixed linear combinations of RRRR/RRLL.
// Energies are in model units where Delta sets the scale; the exciton sits at 0.

#include <array>
#include <bitset>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fwmqkd/jones_optics.hpp"

namespace fwmqkd::spectral {

enum class ResonanceIndex : int { lower_biexciton = -1, exciton = 0, upper_biexciton = 1 };

inline constexpr std::array<ResonanceIndex, 3> kResonances{
    ResonanceIndex::lower_biexciton, ResonanceIndex::exciton, ResonanceIndex::upper_biexciton};

constexpr int offset(ResonanceIndex u) noexcept { return static_cast<int>(u); }
constexpr std::size_t row(ResonanceIndex u) noexcept { return static_cast<std::size_t>(offset(u) + 1); }

enum class PolarizationCondition { RRRR, RRLL, RRVV, RRVH };

std::string_view to_string(PolarizationCondition c) noexcept;
/// Throws ParameterError on an unknown tag.
PolarizationCondition parse_condition(std::string_view tag);

constexpr bool is_circular(PolarizationCondition c) noexcept {
    return c == PolarizationCondition::RRRR || c == PolarizationCondition::RRLL;
}

/// hc in eV*nm.
inline constexpr double kHcEvNm = 1239.8419843320026;

// The 530-nm lower-biexciton peak and the 500-nm upper-biexciton detection
// window pin E(530) = -Delta and E(500) = +Delta.
inline constexpr double kLowerBiexcitonAnchorNm = 530.0;
inline constexpr double kUpperBiexcitonAnchorNm = 500.0;
inline constexpr double kDefaultLambdaXNm =
    2.0 / (1.0 / kUpperBiexcitonAnchorNm + 1.0 / kLowerBiexcitonAnchorNm);
inline constexpr double kDefaultDeltaEv =
    0.5 * kHcEvNm * (1.0 / kUpperBiexcitonAnchorNm - 1.0 / kLowerBiexcitonAnchorNm);

struct EnergyGridSpec {
    double min = -6.0;  ///< in units of Delta
    double max = 6.0;
    std::size_t points = 2048;
};

struct ModelParams {
    double delta = 1.0;                 ///< model energy unit
    double delta_ev = kDefaultDeltaEv;  ///< Delta expressed in eV, for the wavelength map
    double k_spin_per_fs = 0.01;        ///< spin-flip rate; 1/k = 100 fs
    double lambda_x_nm = kDefaultLambdaXNm;
    /// T = 0 coefficients, rows u = -1, 0, +1, columns RRRR, RRLL.
    std::array<std::array<double, 2>, 3> b0{{{0.0, 1.4142135623730951}, {-2.0, -1.0}, {1.0, 1.0}}};
    int hilbert_sign = +1;
    EnergyGridSpec energy_grid{};

    /// Throws ParameterError if any invariant is violated.
    void validate() const;
};

/// Which resonances enter the sum; all three by default.
using ResonanceMask = std::bitset<3>;
inline const ResonanceMask kAllResonances{0b111};

class ComplexSpectrum {
public:
    ComplexSpectrum(std::vector<double> energies, std::vector<std::complex<double>> values, double delay_fs,
                    PolarizationCondition condition);

    const std::vector<double>& energies() const noexcept { return energies_; }
    const std::vector<std::complex<double>>& values() const noexcept { return values_; }
    double delay_fs() const noexcept { return delay_fs_; }
    PolarizationCondition condition() const noexcept { return condition_; }
    std::size_t size() const noexcept { return energies_.size(); }

    double intensity(std::size_t i) const { return std::norm(values_.at(i)); }
    /// Energy of the largest |S|^2 sample; first one on ties.
    double peak_energy() const;

private:
    std::vector<double> energies_;
    std::vector<std::complex<double>> values_;
    double delay_fs_;
    PolarizationCondition condition_;
};

double gaussian_lineshape(double e_det, ResonanceIndex u, double delta);

/// Hilbert transform of gaussian_lineshape, (2/sqrt(pi)) F((E - u*Delta)/(sqrt(2)*Delta))
/// with F the Dawson integral. `sign` = -1 selects the opposite convention.
double hilbert_of_gaussian(double e_det, ResonanceIndex u, double delta, int sign = +1);

std::complex<double> complex_lineshape(double e_det, ResonanceIndex u, double delta, int sign = +1);

/// B_u(T) for a circular element. Both columns relax to their common mean at
/// rate k_spin, so RRRR - RRLL decays as exp(-k_spin T) and RRRR + RRLL is constant.
std::array<double, 3> coefficients_at(double delay_fs, PolarizationCondition condition, const ModelParams& params);

/// Signal amplitude at one detection energy.
std::complex<double> signal_amplitude(double delay_fs, double e_det, PolarizationCondition condition,
                                      const ModelParams& params, ResonanceMask active = kAllResonances);

ComplexSpectrum signal_spectrum(double delay_fs, std::span<const double> grid, PolarizationCondition condition,
                                const ModelParams& params, ResonanceMask active = kAllResonances);

/// `points` equally spaced samples on [min, max], endpoints included.
std::vector<double> linear_grid(double min, double max, std::size_t points);
std::vector<double> default_energy_grid(const ModelParams& params);

/// E_det = hc (1/lambda - 1/lambda_X), converted to model units through delta_ev.
double wavelength_to_energy(double lambda_nm, double lambda_x_nm, double delta_ev, double delta = 1.0);
double wavelength_to_energy(double lambda_nm, const ModelParams& params);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle) noexcept;

/// Normalized lab-frame envelope at (T, lambda): A_V = |S_RRVV|, A_H = |S_RRVH|,
/// phi = arg S_RRVH - arg S_RRVV. Throws DegenerateInputError when both vanish and
/// ParameterError when lambda maps outside the configured energy grid.
jones::SignalField field_components(double delay_fs, double lambda_nm, const ModelParams& params);

}  // namespace fwmqkd::spectral
