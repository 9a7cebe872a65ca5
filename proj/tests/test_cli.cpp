#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status{-1};
    std::string output;
};

CliResult cli(const std::string& args) {
    const std::string command = std::string(POLRELAX_CLI) + " " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "polrelax_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path.string();
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        out[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return out;
}

const char* kSweep = R"(molecule:
  omega_0: 0.1
  modes:
    - {omega_nu: 0.01, sqrt_s: 0.3, n_max: 3}
    - {omega_nu: 0.001, sqrt_s: 2.0, n_max: 14}
cavity:
  vertical_resonance: true
  g_sqrt_n: 0.035
  n_molecules: 100000
  kappa: 0.003
grid:
  points: 2001
tasks: [spectra, rp, rec, scatt]
sweep:
  parameter: molecule.modes[1].sqrt_s
  values: [1.5, 2.0, 2.5]
)";

}  // namespace

TEST_CASE("cli reports its version") {
    const auto r = cli("--version");
    CHECK(r.status == 0);
    CHECK(r.output.find("polrelax") != std::string::npos);
}

TEST_CASE("cli rejects a missing kappa with exit code 2") {
    const auto dir = scratch("nokappa");
    std::string text = kSweep;
    text.erase(text.find("  kappa: 0.003\n"), 15);
    const auto path = write(dir / "cfg.yaml", text);
    for (const std::string& args : {"validate " + path, "run " + path + " --output-dir " + (dir / "out").string()}) {
        const auto r = cli(args);
        CHECK(r.status == 2);
        CHECK(r.output.find("cavity.kappa") != std::string::npos);
    }
    CHECK(!fs::exists(dir / "out"));
}

TEST_CASE("cli validate summarizes the plan") {
    const auto dir = scratch("validate");
    const auto r = cli("validate " + write(dir / "cfg.yaml", kSweep));
    CHECK(r.status == 0);
    CHECK(r.output.find("planned_runs = 3") != std::string::npos);
    CHECK(r.output.find("ok") != std::string::npos);
}

TEST_CASE("cli usage errors exit with code 2") {
    CHECK(cli("").status == 2);
    CHECK(cli("run").status == 2);
    CHECK(cli("run /nonexistent/cfg.yaml").status == 2);
}

TEST_CASE("cli runs are byte-identical across repeats and thread counts") {
    const auto dir = scratch("determinism");
    const auto path = write(dir / "cfg.yaml", kSweep);
    const auto a = cli("run " + path + " --threads 1 --output-dir " + (dir / "a").string());
    const auto b = cli("run " + path + " --threads 3 --output-dir " + (dir / "b").string());
    const auto c = cli("run " + path + " --threads 1 --output-dir " + (dir / "c").string());
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    REQUIRE(c.status == 0);
    const auto fa = read_dir(dir / "a");
    CHECK(fa.count("summary.json") == 1);
    CHECK(fa.count("sweep_scatt.csv") == 1);
    CHECK(fa.count("spectra.csv") == 1);
    CHECK(fa == read_dir(dir / "b"));
    CHECK(fa == read_dir(dir / "c"));
    for (const auto& [name, _] : fa) CHECK(name.front() != '.');
}

TEST_CASE("cli leaves no artifacts when a task fails") {
    const auto dir = scratch("failure");
    std::string text = kSweep;
    text.replace(text.find("vertical_resonance: true"), 24, "omega_c: 0.1");
    text.replace(text.find("[spectra, rp, rec, scatt]"), 25, "[rp, vr]");
    text += "vibrational_relaxation:\n  initial_state: 9999\n";
    const auto r = cli("run " + write(dir / "cfg.yaml", text) + " --output-dir " + (dir / "out").string());
    CHECK(r.status == 2);
    CHECK(r.output.find("initial_state") != std::string::npos);
    CHECK((!fs::exists(dir / "out") || fs::is_empty(dir / "out")));
}
