#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("QPS_CLI");
    REQUIRE_MESSAGE(p != nullptr, "QPS_CLI must point at the qps binary");
    return p;
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing file: " + p.string()).c_str());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("fig2b writes complete deterministic outputs") {
    TempDir a("qps_cli_f2a"), b("qps_cli_f2b");
    REQUIRE(run("fig2b --n-points 101 --out " + a.path.string()) == 0);
    REQUIRE(run("fig2b --n-points 101 --out " + b.path.string()) == 0);
    for (const char* f :
         {"fig2b_phase.csv", "fig2b_reflectivity.csv", "fig2b_summary.txt"}) {
        CHECK(slurp(a.path / f) == slurp(b.path / f));
    }
    // 2 pi winding with the default profile.
    const std::string summary = slurp(a.path / "fig2b_summary.txt");
    CHECK(summary.find("winding_rad = 6.28318530718") != std::string::npos);

    // Removing the atom via an inline override flattens the phase trace.
    TempDir c("qps_cli_f2c");
    REQUIRE(run("fig2b --n-points 101 --eta 0 --out " + c.path.string()) == 0);
    const std::string empty_summary = slurp(c.path / "fig2b_summary.txt");
    CHECK(empty_summary.find("winding_rad = 0 ") != std::string::npos);
    CHECK(empty_summary.find("unwrapped_span_rad = 0 ") != std::string::npos);
}

TEST_CASE("report honors seed and format") {
    TempDir a("qps_cli_ra"), b("qps_cli_rb"), c("qps_cli_rc");
    REQUIRE(run("report --seed 7 --out " + a.path.string()) == 0);
    REQUIRE(run("report --seed 7 --out " + b.path.string()) == 0);
    REQUIRE(run("report --seed 8 --out " + c.path.string()) == 0);
    CHECK(slurp(a.path / "report.txt") == slurp(b.path / "report.txt"));
    CHECK(slurp(a.path / "report.txt") != slurp(c.path / "report.txt"));

    TempDir j("qps_cli_rj");
    REQUIRE(run("report --seed 7 --format json --out " + j.path.string()) == 0);
    const std::string json_text = slurp(j.path / "report.json");
    CHECK(json_text.find("\"name\": \"readout_fidelity_avg\"") != std::string::npos);
    CHECK(json_text.find("\"name\": \"P_cond\"") != std::string::npos);
}

TEST_CASE("failed commands exit nonzero and remove partial files") {
    TempDir d("qps_cli_fail");
    const fs::path bad = d.path / "bad_params.txt";
    {
        std::ofstream out(bad);
        out << "g_2pi_MHz = 545\nkappa_wg_2pi_GHz = 20.3\n"
            << "kappa_sc_2pi_GHz = 5.2\ngamma_2pi_MHz = -6\n";  // negative decay
    }
    const fs::path outdir = d.path / "out";
    CHECK(run("fig2b --params " + bad.string() + " --out " + outdir.string()) != 0);
    CHECK(run("fig4c --params " + bad.string() + " --out " + outdir.string()) != 0);
    bool any_file = false;
    if (fs::exists(outdir)) {
        for (const auto& e : fs::directory_iterator(outdir)) {
            (void)e;
            any_file = true;
        }
    }
    CHECK_FALSE(any_file);

    CHECK(run("no-such-command") != 0);
}

TEST_CASE("fig3 saturation knee sits below one photon per bandwidth") {
    TempDir d("qps_cli_f3");
    // Skip the expensive correlation part of the command by shrinking it.
    REQUIRE(run("fig3 --rate-points 41 --tau-points 5 --g2-nodes 3 --n-max 4 "
                "--out " + d.path.string()) == 0);
    const std::string summary = slurp(d.path / "fig3_summary.txt");
    const std::string key = "knee_rate_over_Gamma = ";
    const auto pos = summary.find(key);
    REQUIRE(pos != std::string::npos);
    const double knee = std::stod(summary.substr(pos + key.size()));
    CHECK(knee >= 0.1);
    CHECK(knee <= 1.0);

    // Ports: antibunched A, bunched D at the default drive.
    const auto g2a = std::stod(summary.substr(summary.find("g2_A_0 = ") + 9));
    const auto g2d = std::stod(summary.substr(summary.find("g2_D_0 = ") + 9));
    CHECK(g2a < 1.0);
    CHECK(g2d > 1.0);
}

TEST_CASE("fig4c summary carries the expected shifts") {
    TempDir d("qps_cli_f4");
    REQUIRE(run("fig4c --n-theta 49 --out " + d.path.string()) == 0);
    const std::string summary = slurp(d.path / "fig4c_summary.txt");
    // Resonant conditioned fringe flips by pi.
    CHECK(summary.find("resonant_conditioned_shift_pi = 1 ") != std::string::npos);
    const std::string fringes = slurp(d.path / "fig4c_fringes.csv");
    CHECK(fringes.find("resonant_unconditioned") != std::string::npos);
    CHECK(fringes.find("detuned_14MHz_conditioned") != std::string::npos);

    // With a lossless profile at eta = 7.7 the weak-gate detuned shift
    // lands on the reflection-phase value, ~0.65 pi.
    const fs::path params = d.path / "lossless.txt";
    {
        std::ofstream out(params);
        out << "g_2pi_MHz = 537.3546\nkappa_wg_2pi_GHz = 25.0\n"
            << "kappa_sc_2pi_GHz = 0.0\ngamma_2pi_MHz = 6.0\n";
    }
    TempDir d2("qps_cli_f4ll");
    REQUIRE(run("fig4c --n-theta 49 --params " + params.string() + " --out " +
                d2.path.string()) == 0);
    const std::string ll = slurp(d2.path / "fig4c_summary.txt");
    const std::string key = "detuned_14MHz_weak_gate_conditioned_shift_pi = ";
    const auto pos = ll.find(key);
    REQUIRE(pos != std::string::npos);
    CHECK(std::abs(std::stod(ll.substr(pos + key.size())) - 0.6495) < 1e-3);
}

TEST_CASE("spectrum and lifetime fits run end to end") {
    TempDir d("qps_cli_fits");
    REQUIRE(run("spectrum-fit --seed 3 --out " + d.path.string()) == 0);
    REQUIRE(run("lifetime-fit --seed 3 --out " + d.path.string()) == 0);
    const std::string spec = slurp(d.path / "spectrum_fit_result.txt");
    CHECK(spec.find("k = 0.79") != std::string::npos);
    CHECK(spec.find("ambiguous_flag = 0") != std::string::npos);
    const std::string life = slurp(d.path / "lifetime_fit_result.txt");
    CHECK(life.find("tau_ns = 3.0") != std::string::npos);
    CHECK(life.find("eta_from_lifetime = 7.") != std::string::npos);

    // Refitting the emitted data file reproduces the fitted k (the CSV
    // carries 12 significant digits, so only value-level agreement).
    TempDir d2("qps_cli_fits2");
    REQUIRE(run("spectrum-fit --input " + (d.path / "spectrum_fit_data.csv").string() +
                " --out " + d2.path.string()) == 0);
    auto grab = [](const std::string& text, const std::string& key) {
        const auto pos = text.find(key + " = ");
        REQUIRE(pos != std::string::npos);
        return std::stod(text.substr(pos + key.size() + 3));
    };
    const std::string r1 = slurp(d.path / "spectrum_fit_result.txt");
    const std::string r2 = slurp(d2.path / "spectrum_fit_result.txt");
    CHECK(std::abs(grab(r1, "k") - grab(r2, "k")) < 1e-8);
    CHECK(std::abs(grab(r1, "nu_fsr_GHz") - grab(r2, "nu_fsr_GHz")) < 1e-6);
}
