#include "fwmqkd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

#include "fwmqkd/csv.hpp"
#include "fwmqkd/error.hpp"
#include "fwmqkd/jones_optics.hpp"
#include "parallel.hpp"

namespace fwmqkd::pipeline {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that typos
// surface as errors instead of silently keeping a default.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw InputError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        const auto it = node_.find(key);
        if (it == node_.end()) return;
        used_.insert(key);
        out = convert<T>(*it, path_ + "." + key);
    }

    bool has(const char* key) const { return node_.contains(key); }
    void mark(const char* key) { used_.insert(key); }

    Section child(const char* key) {
        used_.insert(key);
        return Section(node_.at(key), path_ + "." + key);
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!used_.contains(key)) throw InputError(path_ + ": unknown key '" + key + "'");
        }
    }

    template <typename T>
    static T convert(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw InputError(where + ": expected a number");
            return v.get<double>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw InputError(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
                throw InputError(where + ": expected a non-negative integer");
            } else {
                return static_cast<T>(v.get<std::int64_t>());
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw InputError(where + ": expected a string");
            return v.get<std::string>();
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(Section::convert<double>(v[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void read_axis(Section& s, AxisSpec& axis) {
    s.get("min", axis.min);
    s.get("max", axis.max);
    s.get("step", axis.step);
    s.finish();
}

std::string_view threshold_name(qkd::ThresholdMode m) {
    return m == qkd::ThresholdMode::fixed ? "fixed" : "running_mean";
}

json axis_json(const AxisSpec& a) { return {{"min", a.min}, {"max", a.max}, {"step", a.step}}; }

json config_json(const PipelineConfig& cfg) {
    json model = {{"delta", cfg.model.delta},
                  {"delta_ev", cfg.model.delta_ev},
                  {"k_spin_per_fs", cfg.model.k_spin_per_fs},
                  {"lambda_x_nm", cfg.model.lambda_x_nm},
                  {"hilbert_sign", cfg.model.hilbert_sign},
                  {"energy_grid",
                   {{"min", cfg.model.energy_grid.min},
                    {"max", cfg.model.energy_grid.max},
                    {"points", cfg.model.energy_grid.points}}}};
    json b0 = json::array();
    for (const auto& r : cfg.model.b0) b0.push_back({r[0], r[1]});
    model["b0"] = b0;

    json channels = json::object();
    for (const auto& [name, c] : cfg.channels) {
        channels[name] = {{"lambda_nm", c.lambda_nm}, {"decode_basis_deg", c.decode_basis_deg}};
    }
    json conditions = json::array();
    for (auto c : cfg.spectra.conditions) conditions.push_back(std::string(spectral::to_string(c)));

    return {{"seed", cfg.seed},
            {"model", model},
            {"grid",
             {{"phi_min", cfg.grid.phi_min},
              {"phi_max", cfg.grid.phi_max},
              {"phi_step", cfg.grid.phi_step},
              {"psi_step", cfg.grid.psi_step},
              {"xi", cfg.grid.xi}}},
            {"attenuation",
             {{"mean_total_photons", cfg.attenuation.mean_total_photons},
              {"g2_target", cfg.attenuation.g2_target},
              {"max_photons", cfg.attenuation.max_photons},
              {"contrast_offset", cfg.attenuation.contrast_offset}}},
            {"channels", channels},
            {"session",
             {{"message", cfg.session.message},
              {"channel", cfg.session.channel},
              {"delay_bit1_fs", cfg.session.delay_bit1_fs},
              {"delay_bit0_fs", cfg.session.delay_bit0_fs},
              {"bases_deg", {cfg.session.bases_deg[0], cfg.session.bases_deg[1]}},
              {"cycles", cfg.session.cycles},
              {"threshold", std::string(threshold_name(cfg.session.threshold_mode))}}},
            {"spectra", {{"delays_fs", cfg.spectra.delays_fs}, {"conditions", conditions}}},
            {"contrast_map",
             {{"delays_fs", axis_json(cfg.contrast_map.delays_fs)},
              {"wavelengths_nm", axis_json(cfg.contrast_map.wavelengths_nm)}}},
            {"detector",
             {{"pulses", cfg.detector.pulses},
              {"noise_sigma_v", cfg.detector.noise_sigma_v},
              {"channel", cfg.detector.channel},
              {"delay_fs", cfg.detector.delay_fs},
              {"theta_deg", cfg.detector.theta_deg}}}};
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// JSON has no infinities; they are written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<double> AxisSpec::values() const {
    if (!std::isfinite(min) || !std::isfinite(max) || !(step > 0.0) || max < min) {
        throw ParameterError("axis needs finite min <= max and a positive step");
    }
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = min + step * static_cast<double>(i);
    return v;
}

void PipelineConfig::validate() const {
    auto in = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ParameterError& e) {
            throw ParameterError(std::string(section) + ": " + e.what());
        } catch (const EncodingError& e) {
            throw EncodingError(std::string(section) + ": " + e.what());
        }
    };
    in("model", [&] { model.validate(); });
    in("grid", [&] { grid.validate(); });
    in("attenuation", [&] { attenuation.validate(); });
    in("channels", [&] {
        if (channels.empty()) throw ParameterError("no channels defined");
        for (const auto& [name, c] : channels) {
            if (!(c.lambda_nm > 0.0) || !std::isfinite(c.lambda_nm)) throw ParameterError(name + ": bad wavelength");
            if (!std::isfinite(c.decode_basis_deg)) throw ParameterError(name + ": bad decode basis");
        }
    });
    in("session", [&] { session_config().validate(); });
    in("spectra", [&] {
        for (double t : spectra.delays_fs) {
            if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("delays must be finite and non-negative");
        }
    });
    in("contrast_map", [&] {
        if (contrast_map.delays_fs.values().front() < 0.0) throw ParameterError("delays must be non-negative");
        if (contrast_map.wavelengths_nm.values().front() <= 0.0) throw ParameterError("wavelengths must be positive");
    });
    in("detector", [&] {
        if (detector.pulses == 0) throw ParameterError("pulses must be positive");
        if (!(detector.noise_sigma_v >= 0.0)) throw ParameterError("noise sigma must be non-negative");
        if (!(detector.delay_fs >= 0.0)) throw ParameterError("delay must be non-negative");
        (void)channel(detector.channel);
    });
    if (threads == 0) throw ParameterError("threads must be >= 1");
}

qkd::Channel PipelineConfig::channel(const std::string& name) const {
    const auto it = channels.find(name);
    if (it == channels.end()) throw ParameterError("unknown channel '" + name + "'");
    qkd::Channel ch;
    ch.name = name;
    ch.lambda_nm = it->second.lambda_nm;
    ch.decode_basis_rad = jones::deg_to_rad(it->second.decode_basis_deg);
    ch.model = model;
    ch.attenuation = attenuation;
    ch.attenuation.seed = seed;
    return ch;
}

qkd::SessionConfig PipelineConfig::session_config() const {
    qkd::SessionConfig s;
    s.message = session.message;
    s.delay_bit1_fs = session.delay_bit1_fs;
    s.delay_bit0_fs = session.delay_bit0_fs;
    s.bases_rad = {jones::deg_to_rad(session.bases_deg[0]), jones::deg_to_rad(session.bases_deg[1])};
    s.cycles = session.cycles;
    s.channel = channel(session.channel);
    s.threshold_mode = session.threshold_mode;
    s.seed = seed;
    return s;
}

PipelineConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    Section top(root, "config");
    top.get("seed", cfg.seed);
    top.get("threads", cfg.threads);
    top.get("output_dir", cfg.output_dir);

    if (top.has("model")) {
        auto s = top.child("model");
        s.get("delta", cfg.model.delta);
        s.get("delta_ev", cfg.model.delta_ev);
        s.get("k_spin_per_fs", cfg.model.k_spin_per_fs);
        s.get("lambda_x_nm", cfg.model.lambda_x_nm);
        s.get("hilbert_sign", cfg.model.hilbert_sign);
        if (s.has("energy_grid")) {
            auto g = s.child("energy_grid");
            g.get("min", cfg.model.energy_grid.min);
            g.get("max", cfg.model.energy_grid.max);
            g.get("points", cfg.model.energy_grid.points);
            g.finish();
        }
        if (s.has("b0")) {
            const json& b0 = root.at("model").at("b0");
            s.mark("b0");
            if (!b0.is_array() || b0.size() != 3) throw InputError("config.model.b0: expected 3 rows");
            for (std::size_t r = 0; r < 3; ++r) {
                const auto row = number_list(b0[r], "config.model.b0[" + std::to_string(r) + "]");
                if (row.size() != 2) throw InputError("config.model.b0: rows need 2 columns (RRRR, RRLL)");
                cfg.model.b0[r] = {row[0], row[1]};
            }
        }
        s.finish();
    }
    if (top.has("grid")) {
        auto s = top.child("grid");
        s.get("phi_min", cfg.grid.phi_min);
        s.get("phi_max", cfg.grid.phi_max);
        s.get("phi_step", cfg.grid.phi_step);
        s.get("psi_step", cfg.grid.psi_step);
        s.get("xi", cfg.grid.xi);
        s.finish();
    }
    if (top.has("attenuation")) {
        auto s = top.child("attenuation");
        s.get("mean_total_photons", cfg.attenuation.mean_total_photons);
        s.get("g2_target", cfg.attenuation.g2_target);
        s.get("max_photons", cfg.attenuation.max_photons);
        s.get("contrast_offset", cfg.attenuation.contrast_offset);
        s.finish();
    }
    if (top.has("channels")) {
        const json& node = root.at("channels");
        top.mark("channels");
        if (!node.is_object()) throw InputError("config.channels: expected an object");
        for (const auto& [name, value] : node.items()) {
            ChannelSpec spec = cfg.channels.contains(name) ? cfg.channels.at(name) : ChannelSpec{};
            Section c(value, "config.channels." + name);
            c.get("lambda_nm", spec.lambda_nm);
            c.get("decode_basis_deg", spec.decode_basis_deg);
            c.finish();
            cfg.channels[name] = spec;
        }
    }
    if (top.has("session")) {
        auto s = top.child("session");
        s.get("message", cfg.session.message);
        s.get("channel", cfg.session.channel);
        s.get("delay_bit1_fs", cfg.session.delay_bit1_fs);
        s.get("delay_bit0_fs", cfg.session.delay_bit0_fs);
        s.get("cycles", cfg.session.cycles);
        if (s.has("bases_deg")) {
            s.mark("bases_deg");
            const auto b = number_list(root.at("session").at("bases_deg"), "config.session.bases_deg");
            if (b.size() != 2) throw InputError("config.session.bases_deg: expected two angles");
            cfg.session.bases_deg = {b[0], b[1]};
        }
        std::string mode(threshold_name(cfg.session.threshold_mode));
        s.get("threshold", mode);
        if (mode == "running_mean") {
            cfg.session.threshold_mode = qkd::ThresholdMode::running_mean;
        } else if (mode == "fixed") {
            cfg.session.threshold_mode = qkd::ThresholdMode::fixed;
        } else {
            throw InputError("config.session.threshold: expected 'running_mean' or 'fixed'");
        }
        s.finish();
    }
    if (top.has("spectra")) {
        auto s = top.child("spectra");
        const json& node = root.at("spectra");
        if (node.contains("delays_fs")) {
            s.mark("delays_fs");
            cfg.spectra.delays_fs = number_list(node.at("delays_fs"), "config.spectra.delays_fs");
        }
        if (node.contains("conditions")) {
            s.mark("conditions");
            const json& list = node.at("conditions");
            if (!list.is_array()) throw InputError("config.spectra.conditions: expected an array");
            cfg.spectra.conditions.clear();
            for (const auto& c : list) {
                if (!c.is_string()) throw InputError("config.spectra.conditions: expected strings");
                try {
                    cfg.spectra.conditions.push_back(spectral::parse_condition(c.get<std::string>()));
                } catch (const ParameterError& e) {
                    throw InputError(std::string("config.spectra.conditions: ") + e.what());
                }
            }
        }
        s.finish();
    }
    if (top.has("contrast_map")) {
        auto s = top.child("contrast_map");
        if (s.has("delays_fs")) {
            auto a = s.child("delays_fs");
            read_axis(a, cfg.contrast_map.delays_fs);
        }
        if (s.has("wavelengths_nm")) {
            auto a = s.child("wavelengths_nm");
            read_axis(a, cfg.contrast_map.wavelengths_nm);
        }
        s.finish();
    }
    if (top.has("detector")) {
        auto s = top.child("detector");
        s.get("pulses", cfg.detector.pulses);
        s.get("noise_sigma_v", cfg.detector.noise_sigma_v);
        s.get("channel", cfg.detector.channel);
        s.get("delay_fs", cfg.detector.delay_fs);
        s.get("theta_deg", cfg.detector.theta_deg);
        s.finish();
    }
    top.finish();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string canonical_json(const PipelineConfig& cfg) { return config_json(cfg).dump(); }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const PipelineConfig& cfg) { return hex64(fnv1a64(canonical_json(cfg))); }

CommandOutput cmd_spectra(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.spectra.delays_fs.empty() || cfg.spectra.conditions.empty()) {
        throw ParameterError("spectra: need at least one delay and one condition");
    }
    const auto grid = spectral::default_energy_grid(cfg.model);
    CommandOutput out{"spectra", {}};
    for (double t : cfg.spectra.delays_fs) {
        for (auto cond : cfg.spectra.conditions) {
            const auto spectrum = spectral::signal_spectrum(t, grid, cond, cfg.model);
            csv::Writer w({"E_det", "Re", "Im", "abs2"});
            for (std::size_t i = 0; i < spectrum.size(); ++i) {
                const auto v = spectrum.values()[i];
                w.cell(spectrum.energies()[i]).cell(v.real()).cell(v.imag()).cell(std::norm(v));
                w.end_row();
            }
            out.artifacts.push_back(
                {"spectrum_T" + csv::format_number(t) + "_" + std::string(spectral::to_string(cond)) + ".csv", w.str()});
        }
    }
    return out;
}

CommandOutput cmd_contrast_map(const PipelineConfig& cfg) {
    cfg.validate();
    const auto delays = cfg.contrast_map.delays_fs.values();
    const auto lambdas = cfg.contrast_map.wavelengths_nm.values();
    struct Cell {
        reconstruction::RatioObservation ratios;
        double p0;
        double p45;
    };
    std::vector<Cell> cells(delays.size() * lambdas.size());
    detail::parallel_chunks(cells.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const double t = delays[k / lambdas.size()];
            const double l = lambdas[k % lambdas.size()];
            const auto field = spectral::field_components(t, l, cfg.model);
            Cell& c = cells[k];
            c.ratios = reconstruction::simulate_ratios(field, cfg.grid.xi);
            c.p0 = jones::polarization_contrast(jones::detected_intensities(field, reconstruction::kAnalysisAngles[0]));
            c.p45 = jones::polarization_contrast(jones::detected_intensities(field, reconstruction::kAnalysisAngles[1]));
        }
    });

    csv::Writer map({"T_fs", "lambda_nm", "theta_deg", "P"});
    csv::Writer ratios({"T_fs", "lambda_nm", "gamma_0", "gamma_45"});
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const double t = delays[k / lambdas.size()];
        const double l = lambdas[k % lambdas.size()];
        map.cell(t).cell(l).cell(0.0).cell(cells[k].p0);
        map.end_row();
        map.cell(t).cell(l).cell(45.0).cell(cells[k].p45);
        map.end_row();
        ratios.cell(t).cell(l).cell(cells[k].ratios.gamma_0).cell(cells[k].ratios.gamma_45);
        ratios.end_row();
    }
    return {"contrast-map", {{"contrast_map.csv", map.str()}, {"ratios.csv", ratios.str()}}};
}

std::vector<reconstruction::RatioObservation> read_ratio_dataset(std::string_view csv_text, double xi) {
    const auto table = csv::parse(csv_text);
    if (table.rows.empty()) throw InputError("reconstruct input has no data rows");

    auto require = [&](std::initializer_list<const char*> names) {
        std::vector<std::size_t> idx;
        std::string missing;
        for (const char* n : names) {
            if (auto c = table.column(n)) {
                idx.push_back(*c);
            } else {
                missing += missing.empty() ? n : std::string(", ") + n;
            }
        }
        if (!missing.empty()) throw InputError("reconstruct input is missing columns: " + missing);
        return idx;
    };

    std::vector<reconstruction::RatioObservation> out;
    if (table.column("gamma_0") || !table.column("P")) {
        const auto c = require({"T_fs", "lambda_nm", "gamma_0", "gamma_45"});
        for (const auto& row : table.rows) {
            out.push_back({csv::parse_number(row[c[2]]), csv::parse_number(row[c[3]]), csv::parse_number(row[c[0]]),
                           csv::parse_number(row[c[1]])});
        }
        return out;
    }

    // Contrast-map schema: pair the 0 and 45 degree rows of each cell.
    const auto c = require({"T_fs", "lambda_nm", "theta_deg", "P"});
    std::map<std::pair<double, double>, std::array<std::optional<double>, 2>> cells;
    for (const auto& row : table.rows) {
        const double t = csv::parse_number(row[c[0]]);
        const double l = csv::parse_number(row[c[1]]);
        const double theta = csv::parse_number(row[c[2]]);
        const double p = csv::parse_number(row[c[3]]);
        if (!(std::abs(p) <= 1.0)) throw InputError("contrast outside [-1, 1] at T=" + csv::format_number(t));
        std::size_t slot = 0;
        if (theta == 0.0) {
            slot = 0;
        } else if (theta == 45.0) {
            slot = 1;
        } else {
            throw InputError("theta_deg must be 0 or 45, found " + csv::format_number(theta));
        }
        auto& cell = cells[{t, l}][slot];
        if (cell) throw InputError("duplicate row for T=" + csv::format_number(t) + ", lambda=" + csv::format_number(l));
        cell = p;
    }
    for (const auto& [key, pair] : cells) {
        if (!pair[0] || !pair[1]) {
            throw InputError("cell T=" + csv::format_number(key.first) + ", lambda=" + csv::format_number(key.second) +
                             " lacks a 0 or 45 degree row");
        }
        auto gamma = [xi](double p) { return reconstruction::intensity_ratio(0.5 * (1.0 + p), 0.5 * (1.0 - p), xi); };
        out.push_back({gamma(*pair[0]), gamma(*pair[1]), key.first, key.second});
    }
    return out;
}

CommandOutput cmd_reconstruct(const PipelineConfig& cfg, const ReconstructInput& input) {
    cfg.validate();
    const auto data = read_ratio_dataset(input.text, cfg.grid.xi);
    reconstruction::FieldMap map;
    try {
        map = reconstruction::reconstruct_map(data, cfg.grid, cfg.threads);
    } catch (const ParameterError& e) {
        throw InputError(std::string("reconstruct input: ") + e.what());
    }

    csv::Writer w({"T_fs", "lambda_nm", "A_H", "A_V", "phi", "SE", "degenerate"});
    std::size_t rows = 0;
    std::size_t degenerate = 0;
    double max_residual = 0.0;
    double sum_residual = 0.0;
    double max_se = 0.0;
    const double xi = cfg.grid.xi;
    for (std::size_t i = 0; i < map.delays_fs.size(); ++i) {
        for (std::size_t j = 0; j < map.wavelengths_nm.size(); ++j) {
            const auto& cell = map.cells[map.index(i, j)];
            if (!cell) continue;
            const auto& obs = *map.observations[map.index(i, j)];
            const auto fit = reconstruction::simulate_ratios(cell->field, xi);
            // Residual in the normalized detected intensity, |dP|/2, worst of both angles.
            const double r0 = 0.5 * std::abs(reconstruction::contrast_from_ratio(fit.gamma_0, xi) -
                                             reconstruction::contrast_from_ratio(obs.gamma_0, xi));
            const double r45 = 0.5 * std::abs(reconstruction::contrast_from_ratio(fit.gamma_45, xi) -
                                              reconstruction::contrast_from_ratio(obs.gamma_45, xi));
            const double r = std::max(r0, r45);
            max_residual = std::max(max_residual, r);
            sum_residual += r;
            max_se = std::max(max_se, cell->se);
            degenerate += cell->degenerate;
            ++rows;
            w.cell(map.delays_fs[i]).cell(map.wavelengths_nm[j]).cell(cell->field.a_h).cell(cell->field.a_v);
            w.cell(cell->field.phi).cell(cell->se).cell(cell->degenerate ? 1 : 0);
            w.end_row();
        }
    }
    const json summary = {{"cells", rows},
                          {"lattice_cells", map.cells.size()},
                          {"gaps", map.gap_count()},
                          {"degenerate_cells", degenerate},
                          {"max_residual", max_residual},
                          {"mean_residual", sum_residual / static_cast<double>(rows)},
                          {"max_se", max_se}};
    return {"reconstruct", {{"field_map.csv", w.str()}, {"reconstruct_summary.json", dump(summary)}}};
}

std::string session_report_json(const qkd::SessionReport& r) {
    json curve = {{"retained_photons_per_bit", json::array()},
                  {"all_photons_per_bit", json::array()},
                  {"pulses", json::array()},
                  {"percent_correct", json::array()}};
    for (const auto& p : r.curve) {
        curve["retained_photons_per_bit"].push_back(p.retained_photons_per_bit);
        curve["all_photons_per_bit"].push_back(p.all_photons_per_bit);
        curve["pulses"].push_back(p.pulses);
        curve["percent_correct"].push_back(p.percent_correct);
    }
    json estimates = json::array();
    for (auto e : r.final_estimates) estimates.push_back(static_cast<int>(e));
    const json j = {{"message", r.message},
                    {"channel", r.channel},
                    {"n_bits", r.n_bits},
                    {"cycles", r.cycles},
                    {"pulses", r.pulses},
                    {"retained_pulses", r.retained_pulses},
                    {"retained_photons", r.retained_photons},
                    {"all_photons", r.all_photons},
                    {"sift_retention", r.sift_retention},
                    {"calibration",
                     {{"contrast_bit1", r.calibration.contrast_bit1},
                      {"contrast_bit0", r.calibration.contrast_bit0},
                      {"fixed_midpoint", r.calibration.fixed_midpoint},
                      {"polarity", r.calibration.polarity}}},
                    {"final_decode", r.final_decode},
                    {"final_estimates", estimates},
                    {"final_percent_correct", r.final_percent_correct},
                    {"undecided_bits", r.undecided_bits},
                    {"convergence_retained_photons_per_bit", optional_number(r.convergence_retained_photons_per_bit)},
                    {"convergence_all_photons_per_bit", optional_number(r.convergence_all_photons_per_bit)},
                    {"curve", curve}};
    return dump(j);
}

std::string session_trajectory_csv(const qkd::SessionReport& r) {
    csv::Writer w({"bit_index", "photons", "contrast", "estimate", "correct"});
    for (const auto& t : r.trajectories) {
        w.cell(t.bit_index).cell(t.photons).cell(t.contrast).cell(static_cast<int>(t.estimate)).cell(t.correct ? 1 : 0);
        w.end_row();
    }
    return w.str();
}

std::string session_snapshots_text(const qkd::SessionReport& r) {
    std::string out;
    for (const auto& s : r.snapshots) {
        std::string text = s.text;
        for (char& ch : text) {
            if (ch < 0x20 || ch == 0x7f) ch = '.';
        }
        out += csv::format_number(s.photons_per_bit) + "\t" + text + "\n";
    }
    return out;
}

CommandOutput cmd_qkd(const PipelineConfig& cfg) {
    cfg.validate();
    const auto report = qkd::run_session(cfg.session_config());
    return {"qkd",
            {{"qkd_report.json", session_report_json(report)},
             {"qkd_trajectories.csv", session_trajectory_csv(report)},
             {"qkd_snapshots.txt", session_snapshots_text(report)}}};
}

CommandOutput cmd_detector_check(const PipelineConfig& cfg) {
    cfg.validate();
    const auto& d = cfg.detector;
    const auto ch = cfg.channel(d.channel);
    const auto field = spectral::field_components(d.delay_fs, ch.lambda_nm, cfg.model);
    const auto intensities = jones::detected_intensities(field, jones::deg_to_rad(d.theta_deg));

    struct Partial {
        photon::ContrastAccumulator contrast;
        photon::CountHistogram h, v, total;
        std::uint64_t clamped = 0;
        std::uint64_t misread = 0;
    };
    const std::size_t n = static_cast<std::size_t>(d.pulses);
    const std::size_t chunks = std::min<std::size_t>(n, std::max(1U, cfg.threads) * 4U);
    std::vector<Partial> partials(chunks);
    std::vector<std::pair<int, int>> counts(n);
    // Per-pulse RNG streams and exact histogram merges keep the output
    // independent of the chunking, hence of --threads.
    detail::parallel_chunks(chunks, cfg.threads, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            Partial& part = partials[c];
            const std::size_t begin = n * c / chunks;
            const std::size_t end = n * (c + 1) / chunks;
            for (std::size_t i = begin; i < end; ++i) {
                CounterRng rng(cfg.seed, i);
                const auto draw = photon::draw_photon_counts(intensities.h, intensities.v, ch.attenuation, rng);
                const int n_h = photon::invert_sipm(photon::emulate_sipm(draw.n_h, rng, d.noise_sigma_v));
                const int n_v = photon::invert_sipm(photon::emulate_sipm(draw.n_v, rng, d.noise_sigma_v));
                part.misread += (n_h != draw.n_h) + (n_v != draw.n_v);
                part.clamped += draw.clamped;
                part.contrast.add(n_h, n_v);
                part.h.add(n_h);
                part.v.add(n_v);
                part.total.add(n_h + n_v);
                counts[i] = {n_h, n_v};
            }
        }
    });
    Partial all;
    for (const auto& p : partials) {
        all.contrast.merge(p.contrast);
        all.h.merge(p.h);
        all.v.merge(p.v);
        all.total.merge(p.total);
        all.clamped += p.clamped;
        all.misread += p.misread;
    }

    csv::Writer w({"pulse_index", "T_fs", "theta_deg", "n_H", "n_V"});
    for (std::size_t i = 0; i < n; ++i) {
        w.cell(static_cast<std::uint64_t>(i)).cell(d.delay_fs).cell(d.theta_deg).cell(counts[i].first).cell(counts[i].second);
        w.end_row();
    }

    auto g2_or_null = [](const photon::CountHistogram& hist) {
        return hist.mean() > 0.0 ? json(hist.g2()) : json(nullptr);
    };
    json stats = {{"pulses", d.pulses},
                  {"I_H", intensities.h},
                  {"I_V", intensities.v},
                  {"g2_target", ch.attenuation.g2_target},
                  {"g2_measured", g2_or_null(all.total)},
                  {"g2_H", g2_or_null(all.h)},
                  {"g2_V", g2_or_null(all.v)},
                  {"mean_photons", all.total.mean()},
                  {"mean_H", all.h.mean()},
                  {"mean_V", all.v.mean()},
                  {"clamp_fraction", static_cast<double>(all.clamped) / static_cast<double>(n)},
                  {"sipm_misread_fraction", static_cast<double>(all.misread) / (2.0 * static_cast<double>(n))}};
    if (all.contrast.photons() > 0) {
        const auto s = all.contrast.stats();
        stats["N_H"] = s.n_h;
        stats["N_V"] = s.n_v;
        stats["P_cum"] = s.p_cum;
        stats["P_bar"] = s.p_bar;
        stats["sigma_P"] = finite_or_null(s.sigma_p);
        stats["M_used"] = s.m_used;
    } else {
        stats["N_H"] = 0;
        stats["N_V"] = 0;
        stats["P_cum"] = nullptr;
        stats["P_bar"] = nullptr;
        stats["sigma_P"] = nullptr;
        stats["M_used"] = 0;
    }
    return {"detector-check", {{"detector_records.csv", w.str()}, {"detector_stats.json", dump(stats)}}};
}

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const PipelineConfig& cfg,
                                                 const CommandOutput& output, double elapsed_ms) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

    auto write_file = [](const fs::path& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.close();
        if (!f) throw IoError("failed writing " + path.string());
    };

    std::vector<fs::path> written;
    json files = json::array();
    for (const auto& a : output.artifacts) {
        const auto path = dir / a.name;
        write_file(path, a.content);
        written.push_back(path);
        files.push_back({{"name", a.name}, {"bytes", a.content.size()}, {"fnv1a64", hex64(fnv1a64(a.content))}});
    }
    const json manifest = {{"version", FWMQKD_VERSION},
                           {"command", output.command},
                           {"config_hash", config_hash(cfg)},
                           {"seed", cfg.seed},
                           {"config", config_json(cfg)},
                           {"files", files},
                           {"timings_ms", {{"total", elapsed_ms}}}};
    const auto manifest_path = dir / ("manifest_" + output.command + ".json");
    write_file(manifest_path, dump(manifest));
    written.push_back(manifest_path);
    return written;
}

}  // namespace fwmqkd::pipeline
