// fwmqkd: batch front end for the four-wave-mixing QKD simulator.
//
// Exit codes: 0 success, 2 bad config or input, 3 output I/O failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fwmqkd/error.hpp"
#include "fwmqkd/pipeline.hpp"

namespace {

namespace fp = fwmqkd::pipeline;

constexpr int kExitInput = 2;
constexpr int kExitIo = 3;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fwmqkd::InputError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate four-wave-mixing polarization spectra, field reconstruction and BB84 key transmission."};
    app.set_version_flag("--version", FWMQKD_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    unsigned threads = 1;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides $FWMQKD_OUT_DIR and the config)");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "JSON configuration file");

    auto* spectra = app.add_subcommand("spectra", "Complex signal spectra per delay and tensor element");
    std::vector<double> delays;
    std::vector<std::string> conditions;
    spectra->add_option("--delays", delays, "Pump-probe delays in fs");
    spectra->add_option("--conditions", conditions, "Tensor elements (RRRR, RRLL, RRVV, RRVH)");

    auto* contrast = app.add_subcommand("contrast-map", "Polarization contrast over the delay/wavelength grid");

    auto* reconstruct = app.add_subcommand("reconstruct", "Grid-search field reconstruction from a ratio dataset");
    std::string input_path;
    reconstruct->add_option("--input", input_path, "CSV with gamma_0/gamma_45 or theta_deg/P columns")->required();

    auto* qkd = app.add_subcommand("qkd", "Run one BB84 session and write its report");
    std::string channel;
    std::string message;
    int cycles = 0;
    auto* channel_opt = qkd->add_option("--channel", channel, "Channel preset name");
    auto* message_opt = qkd->add_option("--message", message, "ASCII message");
    auto* cycles_opt = qkd->add_option("--cycles", cycles, "Passes through the bit sequence");

    auto* detector = app.add_subcommand("detector-check", "Photon-number statistics and SiPM round trip");
    std::uint64_t pulses = 0;
    std::string detector_channel;
    auto* pulses_opt = detector->add_option("--pulses", pulses, "Number of pulses");
    auto* detector_channel_opt = detector->add_option("--channel", detector_channel, "Channel preset name");

    for (auto* sub : {spectra, contrast, reconstruct, qkd, detector}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        fp::PipelineConfig cfg = config_path.empty() ? fp::PipelineConfig{} : fp::load_config(config_path);
        if (seed_opt->count()) cfg.seed = seed;
        if (threads_opt->count()) cfg.threads = threads;
        if (out_opt->count()) {
            cfg.output_dir = out_dir;
        } else if (const char* env = std::getenv(fp::kOutDirEnv.data()); env && *env) {
            cfg.output_dir = env;
        }
        if (!delays.empty()) cfg.spectra.delays_fs = delays;
        if (!conditions.empty()) {
            cfg.spectra.conditions.clear();
            for (const auto& c : conditions) cfg.spectra.conditions.push_back(fwmqkd::spectral::parse_condition(c));
        }
        if (channel_opt->count()) cfg.session.channel = channel;
        if (message_opt->count()) cfg.session.message = message;
        if (cycles_opt->count()) cfg.session.cycles = cycles;
        if (pulses_opt->count()) cfg.detector.pulses = pulses;
        if (detector_channel_opt->count()) cfg.detector.channel = detector_channel;
        cfg.validate();

        const auto start = std::chrono::steady_clock::now();
        fp::CommandOutput output;
        if (*spectra) {
            output = fp::cmd_spectra(cfg);
        } else if (*contrast) {
            output = fp::cmd_contrast_map(cfg);
        } else if (*reconstruct) {
            output = fp::cmd_reconstruct(cfg, {read_text(input_path)});
        } else if (*qkd) {
            output = fp::cmd_qkd(cfg);
        } else {
            output = fp::cmd_detector_check(cfg);
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const auto written = fp::write_outputs(cfg.output_dir, cfg, output, ms);
        std::cout << output.command << ": wrote " << written.size() << " files to " << cfg.output_dir << '\n';
        return 0;
    } catch (const fwmqkd::IoError& e) {
        std::cerr << "fwmqkd: " << e.what() << '\n';
        return kExitIo;
    } catch (const fwmqkd::InputError& e) {
        std::cerr << "fwmqkd: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {  // ParameterError, EncodingError
        std::cerr << "fwmqkd: invalid configuration: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::domain_error& e) {
        std::cerr << "fwmqkd: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "fwmqkd: internal error: " << e.what() << '\n';
        return 1;
    }
}
