#include "fwmqkd/spectral_model.hpp"

#include <gsl/gsl_sf_dawson.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwmqkd/error.hpp"

namespace fwmqkd::spectral {

namespace {

void require_positive_delta(double delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ParameterError("Delta must be positive and finite");
    }
}

// Column index into ModelParams::b0.
std::size_t column(PolarizationCondition c) {
    switch (c) {
        case PolarizationCondition::RRRR:
            return 0;
        case PolarizationCondition::RRLL:
            return 1;
        default:
            throw ParameterError("coefficients exist only for the circular elements RRRR and RRLL");
    }
}

double spin_decay(double delay_fs, const ModelParams& params) {
    if (!(delay_fs >= 0.0)) {
        throw ParameterError("population time must be non-negative");
    }
    return std::exp(-params.k_spin_per_fs * delay_fs);
}

// sum_u w[u] * Phi_u(E) over the active resonances.
std::complex<double> weighted_sum(const std::array<double, 3>& w, double e_det, const ModelParams& params,
                                  ResonanceMask active) {
    std::complex<double> acc{0.0, 0.0};
    for (auto u : kResonances) {
        if (active.test(row(u))) {
            acc += w[row(u)] * complex_lineshape(e_det, u, params.delta, params.hilbert_sign);
        }
    }
    return acc;
}

}  // namespace

std::string_view to_string(PolarizationCondition c) noexcept {
    switch (c) {
        case PolarizationCondition::RRRR:
            return "RRRR";
        case PolarizationCondition::RRLL:
            return "RRLL";
        case PolarizationCondition::RRVV:
            return "RRVV";
        case PolarizationCondition::RRVH:
            return "RRVH";
    }
    return "?";
}

PolarizationCondition parse_condition(std::string_view tag) {
    for (auto c : {PolarizationCondition::RRRR, PolarizationCondition::RRLL, PolarizationCondition::RRVV,
                   PolarizationCondition::RRVH}) {
        if (to_string(c) == tag) return c;
    }
    throw ParameterError("unknown polarization condition '" + std::string(tag) + "'");
}

void ModelParams::validate() const {
    require_positive_delta(delta);
    if (!(delta_ev > 0.0)) throw ParameterError("delta_ev must be positive");
    if (!(k_spin_per_fs >= 0.0) || !std::isfinite(k_spin_per_fs)) {
        throw ParameterError("k_spin must be non-negative and finite");
    }
    if (!(lambda_x_nm > 0.0)) throw ParameterError("lambda_x must be positive");
    if (hilbert_sign != 1 && hilbert_sign != -1) throw ParameterError("hilbert_sign must be +1 or -1");
    for (const auto& r : b0) {
        for (double b : r) {
            if (!std::isfinite(b)) throw ParameterError("B0 coefficients must be finite");
        }
    }
    if (!(energy_grid.max > energy_grid.min) || energy_grid.points < 2) {
        throw ParameterError("energy grid needs max > min and at least two points");
    }
}

ComplexSpectrum::ComplexSpectrum(std::vector<double> energies, std::vector<std::complex<double>> values,
                                 double delay_fs, PolarizationCondition condition)
    : energies_(std::move(energies)), values_(std::move(values)), delay_fs_(delay_fs), condition_(condition) {
    if (energies_.size() != values_.size()) {
        throw ParameterError("spectrum energies and values differ in length");
    }
    for (std::size_t i = 1; i < energies_.size(); ++i) {
        if (!(energies_[i] > energies_[i - 1])) throw ParameterError("spectrum energies must increase strictly");
    }
    for (const auto& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw ParameterError("spectrum values must be finite");
        }
    }
}

double ComplexSpectrum::peak_energy() const {
    if (values_.empty()) throw ParameterError("empty spectrum has no peak");
    auto it = std::max_element(values_.begin(), values_.end(),
                               [](const auto& a, const auto& b) { return std::norm(a) < std::norm(b); });
    return energies_[static_cast<std::size_t>(it - values_.begin())];
}

double gaussian_lineshape(double e_det, ResonanceIndex u, double delta) {
    require_positive_delta(delta);
    const double x = (e_det - offset(u) * delta) / delta;
    return std::exp(-0.5 * x * x);
}

double hilbert_of_gaussian(double e_det, ResonanceIndex u, double delta, int sign) {
    require_positive_delta(delta);
    const double x = (e_det - offset(u) * delta) / delta;
    const double h = 2.0 * std::numbers::inv_sqrtpi * gsl_sf_dawson(x * std::numbers::sqrt2 * 0.5);
    return sign < 0 ? -h : h;
}

std::complex<double> complex_lineshape(double e_det, ResonanceIndex u, double delta, int sign) {
    return {gaussian_lineshape(e_det, u, delta), hilbert_of_gaussian(e_det, u, delta, sign)};
}

std::array<double, 3> coefficients_at(double delay_fs, PolarizationCondition condition, const ModelParams& params) {
    const std::size_t col = column(condition);
    const double decay = spin_decay(delay_fs, params);
    std::array<double, 3> out{};
    for (std::size_t r = 0; r < 3; ++r) {
        const double mean = 0.5 * (params.b0[r][0] + params.b0[r][1]);
        out[r] = mean + (params.b0[r][col] - mean) * decay;
    }
    return out;
}

std::complex<double> signal_amplitude(double delay_fs, double e_det, PolarizationCondition condition,
                                      const ModelParams& params, ResonanceMask active) {
    using namespace std::complex_literals;
    switch (condition) {
        case PolarizationCondition::RRRR:
        case PolarizationCondition::RRLL:
            return weighted_sum(coefficients_at(delay_fs, condition, params), e_det, params, active);
        case PolarizationCondition::RRVV: {
            // 1/2 S_RRRR + 1/2 S_RRLL; the coefficient mean does not depend on T.
            (void)spin_decay(delay_fs, params);
            std::array<double, 3> w{};
            for (std::size_t r = 0; r < 3; ++r) w[r] = 0.5 * (params.b0[r][0] + params.b0[r][1]);
            return weighted_sum(w, e_det, params, active);
        }
        case PolarizationCondition::RRVH: {
            // -(i/2) S_RRRR + (i/2) S_RRLL, with B_RRRR(T) - B_RRLL(T) = (B_RRRR(0) - B_RRLL(0)) e^{-kT}.
            const double decay = spin_decay(delay_fs, params);
            std::array<double, 3> w{};
            for (std::size_t r = 0; r < 3; ++r) w[r] = (params.b0[r][0] - params.b0[r][1]) * decay;
            return -0.5i * weighted_sum(w, e_det, params, active);
        }
    }
    throw ParameterError("unknown polarization condition");
}

ComplexSpectrum signal_spectrum(double delay_fs, std::span<const double> grid, PolarizationCondition condition,
                                const ModelParams& params, ResonanceMask active) {
    params.validate();
    if (grid.empty()) throw ParameterError("energy grid is empty");
    std::vector<std::complex<double>> values;
    values.reserve(grid.size());
    for (double e : grid) values.push_back(signal_amplitude(delay_fs, e, condition, params, active));
    return ComplexSpectrum(std::vector<double>(grid.begin(), grid.end()), std::move(values), delay_fs, condition);
}

std::vector<double> linear_grid(double min, double max, std::size_t points) {
    if (points < 2 || !(max > min)) throw ParameterError("linear grid needs max > min and at least two points");
    std::vector<double> g(points);
    const double step = (max - min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = min + step * static_cast<double>(i);
    g.back() = max;
    return g;
}

std::vector<double> default_energy_grid(const ModelParams& params) {
    return linear_grid(params.energy_grid.min * params.delta, params.energy_grid.max * params.delta,
                       params.energy_grid.points);
}

double wavelength_to_energy(double lambda_nm, double lambda_x_nm, double delta_ev, double delta) {
    if (!(lambda_nm > 0.0) || !(lambda_x_nm > 0.0)) throw ParameterError("wavelengths must be positive");
    if (!(delta_ev > 0.0)) throw ParameterError("delta_ev must be positive");
    return kHcEvNm * (1.0 / lambda_nm - 1.0 / lambda_x_nm) / delta_ev * delta;
}

double wavelength_to_energy(double lambda_nm, const ModelParams& params) {
    return wavelength_to_energy(lambda_nm, params.lambda_x_nm, params.delta_ev, params.delta);
}

double wrap_phase(double angle) noexcept {
    double r = std::remainder(angle, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

jones::SignalField field_components(double delay_fs, double lambda_nm, const ModelParams& params) {
    params.validate();
    const double e = wavelength_to_energy(lambda_nm, params);
    if (e < params.energy_grid.min * params.delta || e > params.energy_grid.max * params.delta) {
        throw ParameterError("detection wavelength maps outside the configured energy range");
    }
    const auto vv = signal_amplitude(delay_fs, e, PolarizationCondition::RRVV, params);
    const auto vh = signal_amplitude(delay_fs, e, PolarizationCondition::RRVH, params);
    const double a_v = std::abs(vv);
    const double a_h = std::abs(vh);
    const double norm = std::hypot(a_h, a_v);
    if (!(norm > 0.0)) throw DegenerateInputError("RRVV and RRVH both vanish; field is undefined");
    // arg(0) is 0, so a vanished component contributes no phase.
    return {a_h / norm, a_v / norm, wrap_phase(std::arg(vh) - std::arg(vv))};
}

}  // namespace fwmqkd::spectral
