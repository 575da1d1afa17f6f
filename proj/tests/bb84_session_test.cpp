#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fwmqkd/bb84_session.hpp"
#include "fwmqkd/error.hpp"

using namespace fwmqkd;
using namespace fwmqkd::qkd;

namespace {

constexpr double kQuarter = std::numbers::pi / 4;

std::vector<BitEstimate> as_estimates(std::initializer_list<int> v) {
    std::vector<BitEstimate> out;
    for (int b : v) out.push_back(static_cast<BitEstimate>(b));
    return out;
}

}  // namespace

TEST_CASE("message encoding") {
    const auto t = encode_message("T");
    CHECK(t == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0, 0});
    CHECK(encode_message("Tar Heel").size() == 56);
    CHECK(encode_message("").empty());
    CHECK_THROWS_AS(encode_message("caf\xC3\xA9"), EncodingError);
    for (const std::string& s : std::vector<std::string>{"Tar Heel", "~!{}", std::string(1, '\0') + "x"}) {
        const auto bits = encode_message(s);
        CHECK(decode_message(bits) == s);
    }
    CHECK(render_estimates(as_estimates({1, 0, 1, 0, 1, 0, 0, 1, -1, 0, 0, 0, 0, 0})) == "T?");
}

TEST_CASE("channel model") {
    const auto ch = channel_preset("540nm");
    const std::array<double, 2> delays{0.0, 500.0};
    const std::array<double, 2> bases{0.0, kQuarter};
    const ChannelModel model(ch, delays, bases);
    CHECK(model.contrast(0.0, 0.0) > 0.0);
    CHECK(model.contrast(500.0, 0.0) < 0.0);
    CHECK(model.contrast(0.0, 0.0) - model.contrast(500.0, 0.0) == doctest::Approx(1.828).epsilon(2e-3));
    CHECK_THROWS_AS(model.intensities(250.0, 0.0), ParameterError);
    CHECK_THROWS_AS(model.intensities(0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(channel_preset("600nm"), ParameterError);
}

TEST_CASE("run_pulse") {
    const auto ch = channel_preset("540nm");
    const std::array<double, 2> delays{0.0, 5000.0};
    const std::array<double, 2> bases{0.0, kQuarter};
    const ChannelModel model(ch, delays, bases);

    SUBCASE("seeded pulses are reproducible") {
        CounterRng a(7, 42), b(7, 42);
        const auto ra = run_pulse(42, 0.0, kQuarter, model, a);
        const auto rb = run_pulse(42, 0.0, kQuarter, model, b);
        CHECK(ra.n_h == rb.n_h);
        CHECK(ra.n_v == rb.n_v);
        CHECK(ra.delay_fs == 0.0);
        CHECK(ra.theta_rad == kQuarter);
        CHECK(ra.pulse_index == 42);
    }
    SUBCASE("relaxed field gives no horizontal photons at 0 deg") {
        for (std::uint64_t k = 0; k < 20000; ++k) {
            CounterRng rng(1, k);
            CHECK(run_pulse(k, 5000.0, 0.0, model, rng).n_h == 0);
        }
    }
    SUBCASE("aggregate contrast matches the deterministic channel") {
        std::vector<photon::PhotonRecord> records;
        for (std::uint64_t k = 0; k < 100000; ++k) {
            CounterRng rng(2, k);
            records.push_back(run_pulse(k, 0.0, 0.0, model, rng));
        }
        const auto s = photon::accumulate_contrast(records);
        const double p = model.contrast(0.0, 0.0);
        // Binomial error of the photon split, inflated for gain bunching.
        const double n = static_cast<double>(s.n_h + s.n_v);
        const double sigma = std::sqrt((1 - p * p) / n) * 1.5;
        CHECK(std::abs(s.p_cum - p) <= 3 * sigma);
    }
    CHECK_THROWS_AS([&] {
        CounterRng rng(0, 0);
        return run_pulse(0, 100.0, 0.0, model, rng);
    }(), ParameterError);
}

TEST_CASE("sifting") {
    const SlotDesignation slot{500.0, 0.0};
    std::vector<photon::PhotonRecord> records;
    std::uint64_t kept = 0;
    const std::uint64_t n = 100000;
    for (std::uint64_t k = 0; k < n; ++k) {
        CounterRng rng(9, k);
        const double delay = rng.coin() ? 500.0 : 0.0;
        const double basis = rng.coin() ? kQuarter : 0.0;
        records.push_back({1, 0, delay, basis, k});
    }
    const auto retained = sift(records, slot);
    for (const auto& r : retained) {
        CHECK(r.delay_fs == slot.delay_fs);
        CHECK(r.theta_rad == slot.basis_rad);
    }
    kept = retained.size();
    for (const auto& r : records) kept -= matches(r, slot);
    CHECK(kept == 0);
    const double frac = static_cast<double>(retained.size()) / n;
    CHECK(std::abs(frac - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / n));

    std::vector<photon::PhotonRecord> matched(10, {0, 1, 500.0, 0.0, 0});
    CHECK(sift(matched, slot).size() == 10);
    std::vector<photon::PhotonRecord> none(10, {0, 1, 0.0, 0.0, 0});
    CHECK(sift(none, slot).empty());

    BitSlot b;
    b.designation = slot;
    CHECK_THROWS_AS(b.absorb(none.front()), ParameterError);
    CHECK_FALSE(b.contrast().has_value());
    b.absorb(matched.front());
    CHECK(*b.contrast() == -1.0);
}

TEST_CASE("threshold decoding") {
    const DecodeThreshold cal{0.8, -0.6, 0.1, +1};
    SUBCASE("running mean") {
        const std::vector<std::optional<double>> c{0.8, -0.6};
        CHECK(decode_contrasts(c, ThresholdMode::running_mean, cal) == as_estimates({1, 0}));
    }
    SUBCASE("undecided slots and exact ties") {
        const std::vector<std::optional<double>> c{std::nullopt, 0.5, -0.5};
        CHECK(decode_contrasts(c, ThresholdMode::running_mean, cal) == as_estimates({-1, 1, 0}));
        const std::vector<std::optional<double>> tie{0.1};
        CHECK(decode_contrasts(tie, ThresholdMode::fixed, cal) == as_estimates({-1}));
    }
    SUBCASE("constant message falls back to the calibrated midpoint") {
        const std::vector<std::optional<double>> c{0.75, 0.8, 0.79};
        CHECK(decode_contrasts(c, ThresholdMode::running_mean, cal) == as_estimates({1, 1, 1}));
    }
    SUBCASE("inverted polarity") {
        const DecodeThreshold inv{-0.58, 0.0, -0.29, -1};
        const std::vector<std::optional<double>> c{-0.55, -0.02, -0.6, 0.01};
        CHECK(decode_contrasts(c, ThresholdMode::running_mean, inv) == as_estimates({1, 0, 1, 0}));
    }
    SUBCASE("decode_bits reads slot contrasts") {
        std::vector<BitSlot> slots(2);
        slots[0].n_h = slots[0].photons_accumulated = 3;
        slots[1].n_v = slots[1].photons_accumulated = 2;
        CHECK(decode_bits(slots, ThresholdMode::running_mean, cal) == as_estimates({1, 0}));
    }
}

TEST_CASE("sessions") {
    SessionConfig cfg;
    cfg.cycles = 400;
    cfg.seed = 3;

    SUBCASE("540 nm preset decodes the message") {
        const auto r = run_session(cfg);
        CHECK(r.n_bits == 56);
        CHECK(r.pulses == 56u * 400u);
        CHECK(r.final_decode == "Tar Heel");
        CHECK(r.final_percent_correct == 100.0);
        CHECK(r.sift_retention == doctest::Approx(0.25).epsilon(0.06));
        REQUIRE(r.convergence_retained_photons_per_bit.has_value());
        CHECK(*r.convergence_retained_photons_per_bit < 20.0);
        CHECK(*r.convergence_all_photons_per_bit > *r.convergence_retained_photons_per_bit);
        CHECK(r.calibration.polarity == +1);
        for (const auto& p : r.curve) {
            CHECK(p.percent_correct >= 0.0);
            CHECK(p.percent_correct <= 100.0);
        }
        CHECK(r.snapshots.back().text == "Tar Heel");
        CHECK(r.percent_correct_at(1e9) == 100.0);
    }
    SUBCASE("same seed, same report") {
        cfg.cycles = 50;
        const auto a = run_session(cfg);
        const auto b = run_session(cfg);
        CHECK(a.final_decode == b.final_decode);
        CHECK(a.curve.size() == b.curve.size());
        CHECK(a.retained_photons == b.retained_photons);
    }
    SUBCASE("500 nm preset decodes with inverted polarity") {
        cfg.channel = channel_preset("500nm");
        cfg.cycles = 1600;
        const auto r = run_session(cfg);
        CHECK(r.calibration.polarity == -1);
        CHECK(r.final_decode == "Tar Heel");
    }
    SUBCASE("huge contrast gap converges at once") {
        cfg.channel.model.k_spin_per_fs = 1.0;  // bit 0 fully vertical
        cfg.channel.attenuation.mean_total_photons = 200.0;
        cfg.channel.attenuation.g2_target = 1.0;
        cfg.channel.attenuation.max_photons = 1000;
        cfg.cycles = 40;
        const auto r = run_session(cfg);
        CHECK(r.final_decode == "Tar Heel");
    }
    SUBCASE("single-valued message") {
        cfg.message = "\x7f\x7f";
        cfg.cycles = 200;
        const auto r = run_session(cfg);
        CHECK(r.final_decode == "\x7f\x7f");
    }
    SUBCASE("one cycle under heavy attenuation leaves bits undecided") {
        cfg.cycles = 1;
        cfg.channel.attenuation.mean_total_photons = 0.05;
        const auto r = run_session(cfg);
        CHECK(r.undecided_bits > 0);
        CHECK(r.final_decode.find('?') != std::string::npos);
        CHECK_FALSE(r.convergence_retained_photons_per_bit.has_value());
    }
    SUBCASE("invalid configs") {
        cfg.cycles = 0;
        CHECK_THROWS_AS(run_session(cfg), ParameterError);
        cfg.cycles = 1;
        cfg.delay_bit0_fs = cfg.delay_bit1_fs;
        CHECK_THROWS_AS(run_session(cfg), ParameterError);
        cfg = {};
        cfg.message = "\xff";
        CHECK_THROWS_AS(run_session(cfg), EncodingError);
        cfg = {};
        cfg.channel.decode_basis_rad = 0.3;
        CHECK_THROWS_AS(run_session(cfg), ParameterError);
    }
}

TEST_CASE("decoding accuracy with many photons per slot") {
    SessionConfig cfg;
    cfg.channel = channel_preset("500nm");
    cfg.channel.attenuation.mean_total_photons = 10.0;
    cfg.channel.attenuation.max_photons = 100;
    cfg.cycles = 4000;  // about 10^4 retained photons per slot
    const auto r = run_session(cfg);
    CHECK(r.retained_photons / r.n_bits > 9000);
    CHECK(r.final_percent_correct == 100.0);
}
