#include "fwmqkd/bb84_session.hpp"

#include <algorithm>
#include <cmath>

#include "fwmqkd/error.hpp"

namespace fwmqkd::qkd {

std::vector<std::uint8_t> encode_message(std::string_view text) {
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size() * kBitsPerChar);
    for (char ch : text) {
        const auto code = static_cast<unsigned char>(ch);
        if (code >= 128) throw EncodingError("message contains a non-ASCII byte");
        for (int b = kBitsPerChar - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((code >> b) & 1U));
    }
    return bits;
}

std::string decode_message(std::span<const std::uint8_t> bits) {
    std::string out;
    for (std::size_t c = 0; c + kBitsPerChar <= bits.size(); c += kBitsPerChar) {
        unsigned code = 0;
        for (int b = 0; b < kBitsPerChar; ++b) code = (code << 1) | (bits[c + static_cast<std::size_t>(b)] & 1U);
        out.push_back(static_cast<char>(code));
    }
    return out;
}

Channel channel_preset(std::string_view name) {
    Channel ch;
    ch.name = std::string(name);
    if (name == "540nm") {
        ch.lambda_nm = 540.0;
        ch.decode_basis_rad = 0.0;
    } else if (name == "500nm") {
        ch.lambda_nm = 500.0;
        ch.decode_basis_rad = jones::deg_to_rad(45.0);
    } else {
        throw ParameterError("unknown channel preset '" + std::string(name) + "'");
    }
    return ch;
}

std::vector<std::string> channel_preset_names() { return {"500nm", "540nm"}; }

void SessionConfig::validate() const {
    if (cycles < 1) throw ParameterError("cycles must be >= 1");
    if (message.empty()) throw ParameterError("message is empty");
    (void)encode_message(message);
    if (delay_bit1_fs == delay_bit0_fs) throw ParameterError("bit delays must differ");
    if (!(delay_bit1_fs >= 0.0) || !(delay_bit0_fs >= 0.0)) throw ParameterError("delays must be non-negative");
    if (bases_rad[0] == bases_rad[1]) throw ParameterError("measurement bases must differ");
    if (channel.decode_basis_rad != bases_rad[0] && channel.decode_basis_rad != bases_rad[1]) {
        throw ParameterError("decode basis is not one of the measurement bases");
    }
    channel.model.validate();
    channel.attenuation.validate();
}

void BitSlot::absorb(const photon::PhotonRecord& record) {
    if (!matches(record, designation)) throw ParameterError("record does not match the slot designation");
    retained_records.push_back(record);
    n_h += static_cast<std::uint64_t>(record.n_h);
    n_v += static_cast<std::uint64_t>(record.n_v);
    photons_accumulated = n_h + n_v;
}

std::optional<double> BitSlot::contrast() const {
    if (photons_accumulated == 0) return std::nullopt;
    return (static_cast<double>(n_h) - static_cast<double>(n_v)) / static_cast<double>(photons_accumulated);
}

ChannelModel::ChannelModel(const Channel& channel, std::span<const double> delays_fs,
                           std::span<const double> bases_rad)
    : channel_(channel) {
    channel_.model.validate();
    channel_.attenuation.validate();
    for (double t : delays_fs) {
        const auto field = spectral::field_components(t, channel_.lambda_nm, channel_.model);
        for (double th : bases_rad) entries_.push_back({t, th, jones::detected_intensities(field, th)});
    }
}

jones::Intensities ChannelModel::intensities(double delay_fs, double basis_rad) const {
    for (const auto& e : entries_) {
        if (e.delay_fs == delay_fs && e.basis_rad == basis_rad) return e.intensities;
    }
    throw ParameterError("delay/basis pair is not configured for this channel");
}

double ChannelModel::contrast(double delay_fs, double basis_rad) const {
    return jones::polarization_contrast(intensities(delay_fs, basis_rad));
}

photon::PhotonRecord run_pulse(std::uint64_t pulse_index, double alice_delay_fs, double bob_basis_rad,
                               const ChannelModel& channel, CounterRng& rng) {
    const auto i = channel.intensities(alice_delay_fs, bob_basis_rad);
    const auto draw = photon::draw_photon_counts(i.h, i.v, channel.channel().attenuation, rng);
    return {draw.n_h, draw.n_v, alice_delay_fs, bob_basis_rad, pulse_index};
}

bool matches(const photon::PhotonRecord& record, const SlotDesignation& designation) noexcept {
    return record.delay_fs == designation.delay_fs && record.theta_rad == designation.basis_rad;
}

std::vector<photon::PhotonRecord> sift(std::span<const photon::PhotonRecord> records,
                                       const SlotDesignation& designation) {
    std::vector<photon::PhotonRecord> kept;
    std::copy_if(records.begin(), records.end(), std::back_inserter(kept),
                 [&](const auto& r) { return matches(r, designation); });
    return kept;
}

DecodeThreshold calibrate_threshold(const ChannelModel& channel, const SessionConfig& cfg) {
    DecodeThreshold t;
    t.contrast_bit1 = channel.contrast(cfg.delay_bit1_fs, cfg.channel.decode_basis_rad);
    t.contrast_bit0 = channel.contrast(cfg.delay_bit0_fs, cfg.channel.decode_basis_rad);
    t.fixed_midpoint = 0.5 * (t.contrast_bit1 + t.contrast_bit0);
    t.polarity = t.contrast_bit1 >= t.contrast_bit0 ? +1 : -1;
    return t;
}

std::vector<BitEstimate> decode_contrasts(std::span<const std::optional<double>> contrasts, ThresholdMode mode,
                                          const DecodeThreshold& threshold) {
    double cut = threshold.fixed_midpoint;
    if (mode == ThresholdMode::running_mean) {
        double sum = 0.0;
        std::size_t decided = 0;
        bool above = false;
        bool below = false;
        for (const auto& c : contrasts) {
            if (!c) continue;
            sum += *c;
            ++decided;
            above = above || *c > threshold.fixed_midpoint;
            below = below || *c < threshold.fixed_midpoint;
        }
        if (decided > 0 && above && below) cut = sum / static_cast<double>(decided);
    }

    std::vector<BitEstimate> out;
    out.reserve(contrasts.size());
    for (const auto& c : contrasts) {
        if (!c || *c == cut) {
            out.push_back(BitEstimate::undecided);
            continue;
        }
        const bool high = *c > cut;
        out.push_back(high == (threshold.polarity > 0) ? BitEstimate::one : BitEstimate::zero);
    }
    return out;
}

std::vector<BitEstimate> decode_bits(std::span<const BitSlot> slots, ThresholdMode mode,
                                     const DecodeThreshold& threshold) {
    std::vector<std::optional<double>> contrasts;
    contrasts.reserve(slots.size());
    for (const auto& s : slots) contrasts.push_back(s.contrast());
    return decode_contrasts(contrasts, mode, threshold);
}

std::string render_estimates(std::span<const BitEstimate> estimates) {
    std::string out;
    for (std::size_t c = 0; c + kBitsPerChar <= estimates.size(); c += kBitsPerChar) {
        unsigned code = 0;
        bool known = true;
        for (int b = 0; b < kBitsPerChar; ++b) {
            const auto e = estimates[c + static_cast<std::size_t>(b)];
            known = known && e != BitEstimate::undecided;
            code = (code << 1) | (e == BitEstimate::one ? 1U : 0U);
        }
        out.push_back(known ? static_cast<char>(code) : '?');
    }
    return out;
}

double SessionReport::percent_correct_at(double retained_photons_per_bit) const {
    double value = 0.0;
    for (const auto& p : curve) {
        if (p.retained_photons_per_bit > retained_photons_per_bit) break;
        value = p.percent_correct;
    }
    return value;
}

SessionReport run_session(const SessionConfig& cfg) {
    cfg.validate();
    const auto bits = encode_message(cfg.message);
    const std::size_t n = bits.size();
    const std::array<double, 2> delays{cfg.delay_bit1_fs, cfg.delay_bit0_fs};
    const ChannelModel channel(cfg.channel, delays, cfg.bases_rad);

    SessionReport report;
    report.message = cfg.message;
    report.channel = cfg.channel.name;
    report.n_bits = n;
    report.cycles = cfg.cycles;
    report.calibration = calibrate_threshold(channel, cfg);

    std::vector<BitSlot> slots(n);
    for (std::size_t i = 0; i < n; ++i) {
        slots[i].bit_index = i;
        slots[i].true_bit = bits[i];
        slots[i].designation = {bits[i] ? cfg.delay_bit1_fs : cfg.delay_bit0_fs, cfg.channel.decode_basis_rad};
    }
    std::vector<std::optional<double>> contrasts(n);
    std::vector<BitEstimate> estimates(n, BitEstimate::undecided);
    const double per_bit = static_cast<double>(n);

    auto count_correct = [&] {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < n; ++i) {
            ok += estimates[i] != BitEstimate::undecided && static_cast<int>(estimates[i]) == bits[i];
        }
        return ok;
    };

    std::uint64_t next_snapshot = 1;
    for (int c = 0; c < cfg.cycles; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t k = static_cast<std::uint64_t>(c) * n + i;
            CounterRng rng(cfg.seed, k);
            const double alice = rng.coin() ? cfg.delay_bit0_fs : cfg.delay_bit1_fs;
            const double bob = rng.coin() ? cfg.bases_rad[1] : cfg.bases_rad[0];
            const auto record = run_pulse(k, alice, bob, channel, rng);
            ++report.pulses;
            const auto photons = static_cast<std::uint64_t>(record.n_h + record.n_v);
            report.all_photons += photons;

            BitSlot& slot = slots[i];
            if (!matches(record, slot.designation)) continue;
            ++report.retained_pulses;
            slot.absorb(record);
            if (photons == 0) continue;

            report.retained_photons += photons;
            contrasts[i] = slot.contrast();
            estimates = decode_contrasts(contrasts, cfg.threshold_mode, report.calibration);
            for (std::size_t j = 0; j < n; ++j) slots[j].current_estimate = estimates[j];

            const std::size_t ok = count_correct();
            report.curve.push_back({static_cast<double>(report.retained_photons) / per_bit,
                                    static_cast<double>(report.all_photons) / per_bit, report.pulses,
                                    100.0 * static_cast<double>(ok) / per_bit});
            report.trajectories.push_back({i, slot.photons_accumulated, *contrasts[i], estimates[i],
                                           estimates[i] != BitEstimate::undecided &&
                                               static_cast<int>(estimates[i]) == slot.true_bit});
            while (report.retained_photons >= next_snapshot * n) {
                report.snapshots.push_back({next_snapshot, render_estimates(estimates)});
                ++next_snapshot;
            }
        }
    }

    report.sift_retention = static_cast<double>(report.retained_pulses) / static_cast<double>(report.pulses);
    report.final_estimates = estimates;
    report.final_decode = render_estimates(estimates);
    report.undecided_bits =
        static_cast<std::size_t>(std::count(estimates.begin(), estimates.end(), BitEstimate::undecided));
    report.final_percent_correct = 100.0 * static_cast<double>(count_correct()) / per_bit;

    if (report.final_percent_correct == 100.0 && !report.curve.empty()) {
        std::size_t first_good = report.curve.size() - 1;
        while (first_good > 0 && report.curve[first_good - 1].percent_correct == 100.0) --first_good;
        report.convergence_retained_photons_per_bit = report.curve[first_good].retained_photons_per_bit;
        report.convergence_all_photons_per_bit = report.curve[first_good].all_photons_per_bit;
    }
    return report;
}

}  // namespace fwmqkd::qkd
