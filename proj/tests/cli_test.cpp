#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + FWMQKD_CLI + std::string(" ") + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("fwmqkd_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST_CASE("commands succeed and write their files") {
    const auto dir = scratch("ok");
    const auto out = (dir / "out").string();
    const auto cfg = dir / "cfg.json";
    write(cfg, R"({"detector": {"pulses": 2000}, "session": {"cycles": 60},
                   "contrast_map": {"wavelengths_nm": {"step": 10}, "delays_fs": {"step": 100}}})");
    const std::string common = "--config " + cfg.string() + " --out " + out;

    CHECK(run("spectra " + common) == 0);
    CHECK(fs::exists(dir / "out" / "spectrum_T0_RRVV.csv"));
    CHECK(fs::exists(dir / "out" / "spectrum_T500_RRVH.csv"));
    CHECK(fs::exists(dir / "out" / "manifest_spectra.json"));
    CHECK(run("contrast-map " + common) == 0);
    const auto input = dir / "out" / "contrast_map.csv";
    const auto before = slurp(input);
    CHECK(run("reconstruct --input " + input.string() + " " + common) == 0);
    CHECK(slurp(input) == before);
    CHECK(fs::exists(dir / "out" / "field_map.csv"));
    CHECK(run("qkd --channel 500nm --message Hi " + common) == 0);
    CHECK(slurp(dir / "out" / "qkd_report.json").find("\"500nm\"") != std::string::npos);
    CHECK(run("detector-check " + common) == 0);
    CHECK(fs::exists(dir / "out" / "detector_stats.json"));

    // Global flags may also follow the subcommand.
    CHECK(run("spectra --delays 0 25 --conditions RRRR --out " + out + " --seed 4") == 0);
    CHECK(fs::exists(dir / "out" / "spectrum_T25_RRRR.csv"));
    CHECK(slurp(dir / "out" / "manifest_spectra.json").find("\"seed\": 4") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("repeat runs are byte identical") {
    const auto dir = scratch("repeat");
    const auto a = (dir / "a").string(), b = (dir / "b").string();
    CHECK(run("qkd --cycles 40 --seed 9 --out " + a) == 0);
    CHECK(run("qkd --cycles 40 --seed 9 --threads 3 --out " + b) == 0);
    for (const char* f : {"qkd_report.json", "qkd_trajectories.csv", "qkd_snapshots.txt"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("errors");
    const auto out = dir / "out";

    write(dir / "bad.json", "{ \"seed\": ");
    CHECK(run("spectra --config " + (dir / "bad.json").string() + " --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));

    write(dir / "typo.json", R"({"modle": {}})");
    CHECK(run("spectra --config " + (dir / "typo.json").string() + " --out " + out.string()) == 2);
    write(dir / "invalid.json", R"({"model": {"delta": 0}})");
    CHECK(run("spectra --config " + (dir / "invalid.json").string() + " --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));

    CHECK(run("frobnicate") == 2);
    CHECK(run("") == 2);
    CHECK(run("spectra --config " + (dir / "missing.json").string()) == 2);
    CHECK(run("qkd --message \xC3\xA9 --out " + out.string()) == 2);

    write(dir / "empty.csv", "");
    CHECK(run("reconstruct --input " + (dir / "empty.csv").string() + " --out " + out.string()) == 2);
    write(dir / "cols.csv", "T_fs,lambda_nm,ratio\n0,500,1\n");
    CHECK(run("reconstruct --input " + (dir / "cols.csv").string() + " --out " + out.string()) == 2);
    CHECK_FALSE(fs::exists(out));

    write(dir / "file", "x");
    CHECK(run("spectra --out " + (dir / "file" / "sub").string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("output directory from the environment") {
    const auto dir = scratch("env");
    CHECK(run("spectra --delays 0 --conditions RRVV", "FWMQKD_OUT_DIR=" + (dir / "env").string()) == 0);
    CHECK(fs::exists(dir / "env" / "spectrum_T0_RRVV.csv"));
    CHECK(run("spectra --delays 0 --conditions RRVV --out " + (dir / "flag").string(),
              "FWMQKD_OUT_DIR=" + (dir / "env2").string()) == 0);
    CHECK(fs::exists(dir / "flag" / "spectrum_T0_RRVV.csv"));
    CHECK_FALSE(fs::exists(dir / "env2"));
    fs::remove_all(dir);
}

TEST_CASE("degenerate qkd run is still a valid result") {
    const auto dir = scratch("partial");
    write(dir / "cfg.json", R"({"attenuation": {"mean_total_photons": 0.05}, "session": {"cycles": 1}})");
    CHECK(run("qkd --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 0);
    const auto report = slurp(dir / "out" / "qkd_report.json");
    CHECK(report.find("\"undecided_bits\": 0,") == std::string::npos);
    CHECK(report.find("\"convergence_retained_photons_per_bit\": null") != std::string::npos);
    fs::remove_all(dir);
}
