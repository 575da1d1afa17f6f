#pragma once

// Exhaustive grid search for (A_H, A_V, phi) from H/V intensity ratios measured
// behind the quarter-wave plate at 0 and 45 degrees.
//
// Amplitudes are parametrized by psi in [0, pi/2] with A_H = sin(psi) and
// A_V = cos(psi), so the unit total intensity holds on every grid point. The
// phase grid spans [phi_min, phi_max]. The objective is
//   SE = sum over theta in {0, 45 deg} of (Gamma_sim - Gamma_meas)^2,
// Gamma = I_H / (I_V + xi). The minimizer with the lowest (psi, phi) index wins
// among points within kTieTolerance of the minimum; more than one such point
// sets the degenerate flag.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fwmqkd/jones_optics.hpp"

namespace fwmqkd::reconstruction {

inline constexpr double kTieTolerance = 1e-12;
inline constexpr double kAnalysisAngles[2] = {0.0, 0.7853981633974483};

struct RatioObservation {
    double gamma_0 = 0.0;
    double gamma_45 = 0.0;
    double delay_fs = 0.0;
    double lambda_nm = 0.0;
};

struct GridSpec {
    double phi_min = -1.5707963267948966;
    double phi_max = 1.5707963267948966;
    double phi_step = 0.01;
    double psi_step = 0.005;
    double xi = 1e-9;

    void validate() const;
    std::size_t psi_count() const;
    std::size_t phi_count() const;
    double psi_at(std::size_t i) const noexcept { return psi_step * static_cast<double>(i); }
    double phi_at(std::size_t j) const noexcept { return phi_min + phi_step * static_cast<double>(j); }
};

struct ReconstructionResult {
    jones::SignalField field;
    double se = 0.0;
    std::size_t psi_index = 0;
    std::size_t phi_index = 0;
    bool degenerate = false;
};

double intensity_ratio(double i_h, double i_v, double xi);

/// Gamma at 0 and 45 degrees for a field, through the Jones forward model.
RatioObservation simulate_ratios(const jones::SignalField& field, double xi);

/// Contrast implied by a ratio under unit total intensity.
double contrast_from_ratio(double gamma, double xi);

/// Precomputed forward model for one grid; reusable across observations.
class GridSearch {
public:
    explicit GridSearch(const GridSpec& grid);

    const GridSpec& grid() const noexcept { return grid_; }
    ReconstructionResult reconstruct(const RatioObservation& obs) const;

private:
    GridSpec grid_;
    std::size_t psi_count_;
    std::size_t phi_count_;
    std::vector<double> gamma_0_;   // psi-major
    std::vector<double> gamma_45_;
};

ReconstructionResult reconstruct_field(const RatioObservation& obs, const GridSpec& grid);

/// Reconstruction over a rectangular (T, lambda) lattice. Cells absent from the
/// input stay empty; nothing is interpolated.
struct FieldMap {
    std::vector<double> delays_fs;
    std::vector<double> wavelengths_nm;
    std::vector<std::optional<ReconstructionResult>> cells;      // delay-major
    std::vector<std::optional<RatioObservation>> observations;   // same layout

    std::size_t index(std::size_t delay_i, std::size_t lambda_j) const noexcept {
        return delay_i * wavelengths_nm.size() + lambda_j;
    }
    std::size_t gap_count() const noexcept;
};

/// Throws ParameterError on duplicated (T, lambda) cells or non-finite input.
FieldMap reconstruct_map(std::span<const RatioObservation> dataset, const GridSpec& grid, unsigned threads = 1);

}  // namespace fwmqkd::reconstruction
