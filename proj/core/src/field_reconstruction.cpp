#include "fwmqkd/field_reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "fwmqkd/error.hpp"
#include "parallel.hpp"

namespace fwmqkd::reconstruction {

namespace {

std::size_t steps_in(double span, double step) {
    // Tolerates rounding in span/step so an exact multiple keeps its endpoint.
    return static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
}

void require_observation(const RatioObservation& obs) {
    if (!std::isfinite(obs.gamma_0) || !std::isfinite(obs.gamma_45) || obs.gamma_0 < 0.0 || obs.gamma_45 < 0.0) {
        throw ParameterError("ratio observations must be finite and non-negative");
    }
}

}  // namespace

void GridSpec::validate() const {
    if (!(phi_step > 0.0) || !(psi_step > 0.0)) throw ParameterError("grid steps must be positive");
    if (!(xi > 0.0)) throw ParameterError("xi must be positive");
    if (!(phi_max >= phi_min)) throw ParameterError("phi_max must not be below phi_min");
    if (psi_step > std::numbers::pi / 2) throw ParameterError("psi step larger than the psi range");
}

std::size_t GridSpec::psi_count() const { return steps_in(std::numbers::pi / 2, psi_step); }
std::size_t GridSpec::phi_count() const { return steps_in(phi_max - phi_min, phi_step); }

double intensity_ratio(double i_h, double i_v, double xi) {
    if (!(xi > 0.0)) throw ParameterError("xi must be positive");
    if (!(i_h >= 0.0) || !(i_v >= 0.0)) throw ParameterError("intensities must be non-negative");
    return i_h / (i_v + xi);
}

RatioObservation simulate_ratios(const jones::SignalField& field, double xi) {
    const auto at0 = jones::detected_intensities(field, kAnalysisAngles[0]);
    const auto at45 = jones::detected_intensities(field, kAnalysisAngles[1]);
    return {intensity_ratio(at0.h, at0.v, xi), intensity_ratio(at45.h, at45.v, xi), 0.0, 0.0};
}

double contrast_from_ratio(double gamma, double xi) {
    // gamma = h / (1 - h + xi)  =>  h = gamma (1 + xi) / (1 + gamma)
    const double h = gamma * (1.0 + xi) / (1.0 + gamma);
    return std::clamp(2.0 * h - 1.0, -1.0, 1.0);
}

GridSearch::GridSearch(const GridSpec& grid)
    : grid_(grid), psi_count_(0), phi_count_(0) {
    grid_.validate();
    psi_count_ = grid_.psi_count();
    phi_count_ = grid_.phi_count();
    gamma_0_.resize(psi_count_ * phi_count_);
    gamma_45_.resize(psi_count_ * phi_count_);
    for (std::size_t i = 0; i < psi_count_; ++i) {
        const double psi = grid_.psi_at(i);
        for (std::size_t j = 0; j < phi_count_; ++j) {
            const jones::SignalField f{std::sin(psi), std::cos(psi), grid_.phi_at(j)};
            const auto r = simulate_ratios(f, grid_.xi);
            gamma_0_[i * phi_count_ + j] = r.gamma_0;
            gamma_45_[i * phi_count_ + j] = r.gamma_45;
        }
    }
}

ReconstructionResult GridSearch::reconstruct(const RatioObservation& obs) const {
    require_observation(obs);
    const std::size_t n = gamma_0_.size();
    auto se_at = [&](std::size_t k) {
        const double d0 = gamma_0_[k] - obs.gamma_0;
        const double d45 = gamma_45_[k] - obs.gamma_45;
        return d0 * d0 + d45 * d45;
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) best = std::min(best, se_at(k));

    std::size_t chosen = n;
    std::size_t near_ties = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (se_at(k) <= best + kTieTolerance) {
            if (chosen == n) chosen = k;
            ++near_ties;
        }
    }

    ReconstructionResult r;
    r.psi_index = chosen / phi_count_;
    r.phi_index = chosen % phi_count_;
    const double psi = grid_.psi_at(r.psi_index);
    r.field = {std::sin(psi), std::cos(psi), grid_.phi_at(r.phi_index)};
    r.se = se_at(chosen);
    r.degenerate = near_ties > 1;
    return r;
}

ReconstructionResult reconstruct_field(const RatioObservation& obs, const GridSpec& grid) {
    return GridSearch(grid).reconstruct(obs);
}

std::size_t FieldMap::gap_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c; }));
}

FieldMap reconstruct_map(std::span<const RatioObservation> dataset, const GridSpec& grid, unsigned threads) {
    FieldMap map;
    std::map<double, std::size_t> delay_index;
    std::map<double, std::size_t> lambda_index;
    for (const auto& obs : dataset) {
        if (!std::isfinite(obs.delay_fs) || !std::isfinite(obs.lambda_nm)) {
            throw ParameterError("observation coordinates must be finite");
        }
        delay_index.emplace(obs.delay_fs, 0);
        lambda_index.emplace(obs.lambda_nm, 0);
    }
    for (auto& [t, idx] : delay_index) {
        idx = map.delays_fs.size();
        map.delays_fs.push_back(t);
    }
    for (auto& [l, idx] : lambda_index) {
        idx = map.wavelengths_nm.size();
        map.wavelengths_nm.push_back(l);
    }
    const std::size_t cell_count = map.delays_fs.size() * map.wavelengths_nm.size();
    map.cells.assign(cell_count, std::nullopt);
    map.observations.assign(cell_count, std::nullopt);
    for (const auto& obs : dataset) {
        const std::size_t k = map.index(delay_index.at(obs.delay_fs), lambda_index.at(obs.lambda_nm));
        if (map.observations[k]) {
            throw ParameterError("duplicate observation for one (T, lambda) cell");
        }
        map.observations[k] = obs;
    }

    const GridSearch search(grid);
    detail::parallel_chunks(cell_count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            if (map.observations[k]) map.cells[k] = search.reconstruct(*map.observations[k]);
        }
    });
    return map;
}

}  // namespace fwmqkd::reconstruction
