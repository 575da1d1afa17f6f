#pragma once

// Ideal analysis optics: quarter-wave plate followed by an H/V polarizer.
// Every vector and matrix uses the (H, V) basis order.

#include <Eigen/Core>

namespace fwmqkd::jones {

using JonesMatrix = Eigen::Matrix2cd;
using JonesVector = Eigen::Vector2cd;

/// Signal envelope A_H e^{i phi} e_H + A_V e_V.
struct SignalField {
    double a_h = 0.0;
    double a_v = 1.0;
    double phi = 0.0;  ///< phase of H relative to V, in (-pi, pi]

    JonesVector jones_vector() const;
    double total_intensity() const noexcept { return a_h * a_h + a_v * a_v; }
};

struct Intensities {
    double h = 0.0;
    double v = 0.0;
};

JonesMatrix rotation_matrix(double theta) noexcept;

/// Theta(-theta) diag(1, i) Theta(theta).
JonesMatrix qwp_matrix(double theta) noexcept;

JonesMatrix horizontal_projector() noexcept;
JonesMatrix vertical_projector() noexcept;

Intensities detected_intensities(const SignalField& field, double theta_qwp);

/// (I_H - I_V) / (I_H + I_V). ParameterError on negative input, DegenerateInputError on 0/0.
double polarization_contrast(double i_h, double i_v);
inline double polarization_contrast(const Intensities& i) { return polarization_contrast(i.h, i.v); }

constexpr double deg_to_rad(double deg) noexcept { return deg * 0.017453292519943295; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 57.29577951308232; }

}  // namespace fwmqkd::jones
