#include "fwmqkd/jones_optics.hpp"

#include <cmath>
#include <complex>

#include "fwmqkd/error.hpp"

namespace fwmqkd::jones {

JonesVector SignalField::jones_vector() const {
    return JonesVector(std::polar(a_h, phi), std::complex<double>(a_v, 0.0));
}

JonesMatrix rotation_matrix(double theta) noexcept {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    JonesMatrix m;
    m << c, -s, s, c;
    return m;
}

JonesMatrix qwp_matrix(double theta) noexcept {
    JonesMatrix retarder;
    retarder << 1.0, 0.0, 0.0, std::complex<double>(0.0, 1.0);
    return rotation_matrix(-theta) * retarder * rotation_matrix(theta);
}

JonesMatrix horizontal_projector() noexcept {
    JonesMatrix m;
    m << 1.0, 0.0, 0.0, 0.0;
    return m;
}

JonesMatrix vertical_projector() noexcept {
    JonesMatrix m;
    m << 0.0, 0.0, 0.0, 1.0;
    return m;
}

Intensities detected_intensities(const SignalField& field, double theta_qwp) {
    const JonesVector out = qwp_matrix(theta_qwp) * field.jones_vector();
    return {(horizontal_projector() * out).squaredNorm(), (vertical_projector() * out).squaredNorm()};
}

double polarization_contrast(double i_h, double i_v) {
    if (!(i_h >= 0.0) || !(i_v >= 0.0)) throw ParameterError("intensities must be non-negative");
    const double total = i_h + i_v;
    if (total == 0.0) throw DegenerateInputError("contrast undefined for zero total intensity");
    return (i_h - i_v) / total;
}

}  // namespace fwmqkd::jones
