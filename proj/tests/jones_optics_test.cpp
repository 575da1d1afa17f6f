#include "doctest.h"

#include <complex>
#include <numbers>
#include <random>

#include "fwmqkd/error.hpp"
#include "fwmqkd/jones_optics.hpp"
#include "fwmqkd/spectral_model.hpp"

using namespace fwmqkd;
using namespace fwmqkd::jones;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Plain 2x2 product Theta(-t) diag(1, i) Theta(t), expanded by hand.
std::array<cd, 4> qwp_by_hand(double t) {
    const double c = std::cos(t), s = std::sin(t);
    const cd i{0.0, 1.0};
    return {c * c + i * s * s, -c * s + i * s * c, -s * c + i * c * s, s * s + i * c * c};
}

bool near(const JonesMatrix& m, const std::array<cd, 4>& e, double tol) {
    return std::abs(m(0, 0) - e[0]) < tol && std::abs(m(0, 1) - e[1]) < tol && std::abs(m(1, 0) - e[2]) < tol &&
           std::abs(m(1, 1) - e[3]) < tol;
}

SignalField random_field(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> psi(0.0, kPi / 2);
    std::uniform_real_distribution<double> phi(-kPi, kPi);
    const double p = psi(gen);
    return {std::sin(p), std::cos(p), phi(gen)};
}

}  // namespace

TEST_CASE("rotation matrix") {
    CHECK(rotation_matrix(0.0).isApprox(JonesMatrix::Identity()));
    JonesMatrix quarter;
    quarter << 0.0, -1.0, 1.0, 0.0;
    CHECK((rotation_matrix(kPi / 2) - quarter).norm() < 1e-15);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> th(-10.0, 10.0);
    for (int k = 0; k < 100; ++k) {
        const double t = th(gen);
        CHECK((rotation_matrix(-t) * rotation_matrix(t) - JonesMatrix::Identity()).norm() < 1e-14);
    }
}

TEST_CASE("quarter-wave plate") {
    const cd i{0.0, 1.0};
    CHECK(near(qwp_matrix(0.0), {1.0, 0.0, 0.0, i}, 1e-15));
    CHECK(near(qwp_matrix(kPi / 4), {0.5 * (1.0 + i), 0.5 * (-1.0 + i), 0.5 * (-1.0 + i), 0.5 * (1.0 + i)}, 1e-15));

    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> th(-kPi, kPi);
    for (int k = 0; k < 200; ++k) {
        const double t = th(gen);
        const auto q = qwp_matrix(t);
        CHECK((q.adjoint() * q - JonesMatrix::Identity()).norm() < 1e-12);
        CHECK(near(q, qwp_by_hand(t), 1e-14));
    }
}

TEST_CASE("detected intensities") {
    SUBCASE("vertical field at 0 deg") {
        const auto i = detected_intensities({0.0, 1.0, 1.234}, 0.0);
        CHECK(i.h == doctest::Approx(0.0));
        CHECK(i.v == doctest::Approx(1.0));
    }
    SUBCASE("circular field at 45 deg is fully horizontal") {
        const double a = 1.0 / std::numbers::sqrt2;
        const auto i = detected_intensities({a, a, kPi / 2}, kPi / 4);
        CHECK(i.h == doctest::Approx(1.0));
        CHECK(i.v == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("closed forms at 0 and 45 deg") {
        std::mt19937_64 gen(8);
        for (int k = 0; k < 500; ++k) {
            const auto f = random_field(gen);
            const auto i0 = detected_intensities(f, 0.0);
            CHECK(i0.h == doctest::Approx(f.a_h * f.a_h).epsilon(1e-13));
            CHECK(i0.v == doctest::Approx(f.a_v * f.a_v).epsilon(1e-13));
            const auto i45 = detected_intensities(f, kPi / 4);
            CHECK(i45.h == doctest::Approx(0.5 * (1.0 + 2.0 * f.a_h * f.a_v * std::sin(f.phi))).epsilon(1e-13));
        }
    }
    SUBCASE("energy conservation and phase blindness at 0 deg") {
        std::mt19937_64 gen(9);
        std::uniform_real_distribution<double> th(-kPi, kPi);
        std::uniform_real_distribution<double> scale(0.1, 3.0);
        for (int k = 0; k < 500; ++k) {
            auto f = random_field(gen);
            const double s = scale(gen);
            f.a_h *= s;
            f.a_v *= s;
            const auto i = detected_intensities(f, th(gen));
            CHECK(std::abs(i.h + i.v - f.total_intensity()) <= 1e-12 * f.total_intensity());
            auto g = f;
            g.phi = th(gen);
            const auto a = detected_intensities(f, 0.0);
            const auto b = detected_intensities(g, 0.0);
            CHECK(a.h == doctest::Approx(b.h).epsilon(1e-14));
            CHECK(a.v == doctest::Approx(b.v).epsilon(1e-14));
        }
    }
}

TEST_CASE("polarization contrast") {
    CHECK(polarization_contrast(1.0, 0.0) == 1.0);
    CHECK(polarization_contrast(0.0, 1.0) == -1.0);
    CHECK(polarization_contrast(0.3, 0.1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(polarization_contrast(0.0, 0.0), DegenerateInputError);
    CHECK_THROWS_AS(polarization_contrast(-0.1, 0.5), ParameterError);
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(0.0, 1e3);
    for (int k = 0; k < 1000; ++k) {
        const double p = polarization_contrast(u(gen), u(gen));
        CHECK(p >= -1.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("model fields through the analyzer") {
    spectral::ModelParams p;
    const auto early = spectral::field_components(0.0, 540.0, p);
    const auto late = spectral::field_components(500.0, 540.0, p);
    const double p0_early = polarization_contrast(detected_intensities(early, 0.0));
    const double p0_late = polarization_contrast(detected_intensities(late, 0.0));
    CHECK(p0_early > p0_late);
    CHECK(p0_early > 0.0);
    CHECK(p0_late < 0.0);
    CHECK(p0_early == doctest::Approx(0.829).epsilon(2e-3));
    CHECK(p0_late == doctest::Approx(-0.999).epsilon(1e-3));
}
