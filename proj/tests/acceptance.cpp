// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails. Values in parentheses are the computed numbers.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "qps/disorder.hpp"
#include "qps/fitkit.hpp"
#include "qps/lindblad.hpp"
#include "qps/linres.hpp"
#include "qps/phase_switch.hpp"
#include "qps/saturation.hpp"
#include "qps/system_params.hpp"

namespace fs = std::filesystem;
using namespace qps;
using namespace qps::units;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name
              << " (" << detail << ")\n";
    if (!pass) ++g_failures;
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// ------------------------------------------------------------------ 1

void criterion_1() {
    // The 7.67 target requires the free-space lifetime reference of
    // 26 ns quoted alongside tau; the rounded "2pi x 6 MHz" figure for
    // gamma corresponds to 26.5 ns and would give 7.84 instead.
    const double gamma = 1.0 / ns(26.0);
    const double eta = cooperativity_from_lifetime(ns(3.0), gamma);
    const bool pass = std::abs(eta - 7.67) <= 0.05;
    report(1, "lifetime to cooperativity", pass,
           "eta=" + fmt(eta) + " target 7.67+-0.05, gamma=1/26ns");
}

// ------------------------------------------------------------------ 2

void criterion_2() {
    const double gamma = two_pi_mhz(6.0);
    const cplx r0 = reflection_lossless(0.0, 0.0, gamma);
    const cplx r1 = reflection_lossless(1.0, 0.0, gamma);
    const cplx r77 = reflection_lossless(7.7, 0.0, gamma);
    const bool pass = std::abs(r0 - cplx(-1.0, 0.0)) < 1e-12 &&
                      std::abs(r1) < 1e-12 &&
                      std::abs(r77.real() - 0.770) <= 1e-3 &&
                      std::abs(r77.imag()) < 1e-12;
    report(2, "reflection sign flip", pass,
           "r(0)=" + fmt(r0.real()) + ", r(1)=" + fmt(std::abs(r1)) +
               ", r(7.7)=" + fmt(r77.real()));
}

// ------------------------------------------------------------------ 3

void criterion_3() {
    const double k = 0.796;
    const SystemParams p8 =
        SystemParams::from_cooperativity(8.0, k, two_pi_ghz(25.5), two_pi_mhz(6.0));
    const SystemParams p0 =
        SystemParams::from_cooperativity(0.0, k, two_pi_ghz(25.5), two_pi_mhz(6.0));
    const auto cfg = InterferometerConfig::dark_port(k);
    const PortFields f1 = port_fields(p8, cfg, true);
    const PortFields f0 = port_fields(p0, cfg, false);
    const double p1_tot = std::norm(f1.d1) + std::norm(f1.d2);
    const double p0_tot = std::norm(f0.d1) + std::norm(f0.d2);
    const double ratio = p1_tot / p0_tot;
    const double frac = std::norm(f1.d1) / p1_tot;
    const bool pass = std::abs(ratio - 1.46) <= 0.03 && std::abs(frac - 0.97) <= 0.01;
    report(3, "interferometer numbers", pass,
           "P1/P0=" + fmt(ratio) + " target 1.46+-0.03, A-fraction=" + fmt(frac) +
               " target 0.97+-0.01");
}

// ------------------------------------------------------------------ 4

void criterion_4() {
    const double gamma = two_pi_mhz(6.0);
    const SystemParams p =
        SystemParams::from_cooperativity(7.7, 1.0, two_pi_ghz(25.0), gamma);
    std::vector<double> deltas;
    for (int i = 0; i <= 4000; ++i) {
        deltas.push_back(gamma * (-50.0 + 100.0 * i / 4000.0));
    }
    const TraceSeries ph = phase_spectrum(p, deltas);
    const double winding = phase_winding(ph);
    const double span = ph.y.back() - ph.y.front();
    const bool pass = std::abs(winding - 2.0 * pi) <= 0.05;
    report(4, "2 pi phase winding", pass,
           "winding=" + fmt(winding) + " rad target 2pi+-0.05; unwrapped span " +
               fmt(span) + " rad over +-50 gamma");
}

// ------------------------------------------------------------------ 5

void criterion_5() {
    std::mt19937_64 eng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double eta = 1.0 + 19.0 * u(eng);
        const double k = 0.6 + 0.4 * u(eng);
        const SystemParams p = SystemParams::from_cooperativity(
            eta, k, two_pi_ghz(25.0), two_pi_mhz(6.0));
        const auto cfg = InterferometerConfig::dark_port(k);
        const auto [i1, i2] = port_intensities(p, 1e-3);
        const PortFields f = port_fields(p, cfg, true);
        const double sat = i1 / (i1 + i2);
        const double lin = std::norm(f.d1) / (std::norm(f.d1) + std::norm(f.d2));
        worst = std::max(worst, std::abs(sat - lin) / lin);
    }
    report(5, "saturation/linear consistency", worst <= 1e-5,
           "worst relative deviation " + fmt(worst, 3) + " over 100 draws at Y=1e-3");
}

// ------------------------------------------------------------------ 6

void criterion_6() {
    const double g = two_pi_mhz(10.0);
    const SystemParams p(g, 100.0 * g, 0.0, g / 10.0);
    const auto cfg = InterferometerConfig::dark_port(1.0);
    bool pass = true;
    std::string detail;
    for (double y : {0.3, 1.0, 3.0}) {
        const double flux = DriveField::from_Y(p, cfg, y).photon_flux;
        const cplx beta = std::sqrt(flux) * std::cos(cfg.theta);
        const Liouvillian lv(p, beta, HilbertConfig{10});
        const double sz = lv.expectation(lv.atom_sz(), lv.steady_state()).real();
        const double closed = bloch_steady_state(p, y).sigma_z;
        const double rel = std::abs(sz - closed) / std::abs(closed);
        pass = pass && rel <= 0.01;
        detail += "Y=" + fmt(y, 2) + ": rel=" + fmt(rel, 2) + "  ";
    }
    report(6, "Lindblad/adiabatic oracle", pass, detail + "target 1%");
}

// ------------------------------------------------------------------ 7

void criterion_7() {
    const SystemParams p = SystemParams::from_cooperativity(
        8.0, 0.8, two_pi_mhz(2500.0), two_pi_mhz(6.0));
    const auto cfg = InterferometerConfig::dark_port(p.k());
    const double flux = DriveField::from_Y(p, cfg, 0.1).photon_flux;
    const HilbertConfig h{10};
    const double big_gamma = (1.0 + p.eta()) * p.gamma();
    std::vector<double> taus;
    for (int i = 0; i <= 120; ++i) taus.push_back(30.0 / big_gamma * i / 120.0);

    const TraceSeries g2a = g2_correlation(p, cfg, flux, h, Port::A, taus);
    const TraceSeries g2d = g2_correlation(p, cfg, flux, h, Port::D, taus);

    // No atom: coherent statistics survive any linear network.
    const SystemParams p_empty(0.0, p.kappa_wg(), p.kappa_sc(), p.gamma());
    InterferometerConfig cfg_bright;  // theta = pi/4 is not dark for k = 0.8
    std::vector<double> taus_e;
    for (int i = 0; i <= 30; ++i) taus_e.push_back(3.0 / p.kappa() * i);
    double coherent_dev = 0.0;
    for (Port port : {Port::A, Port::D}) {
        const TraceSeries g2e =
            g2_correlation(p_empty, cfg_bright, 0.05 * p.kappa(), h, port, taus_e);
        for (double v : g2e.y) coherent_dev = std::max(coherent_dev, std::abs(v - 1.0));
    }

    const bool pass = g2a.y.front() < 0.5 && g2d.y.front() > 2.0 &&
                      std::abs(g2a.y.back() - 1.0) <= 0.01 &&
                      std::abs(g2d.y.back() - 1.0) <= 0.01 && coherent_dev <= 1e-8;
    report(7, "photon statistics", pass,
           "g2_A(0)=" + fmt(g2a.y.front()) + "<0.5, g2_D(0)=" + fmt(g2d.y.front()) +
               ">2, tails " + fmt(g2a.y.back()) + "/" + fmt(g2d.y.back()) +
               ", no-atom dev " + fmt(coherent_dev, 2));
}

// ------------------------------------------------------------------ 8

void criterion_8() {
    // Intensity averaging: Gauss-Hermite vs 1e6-sample Monte Carlo.
    const double gamma = two_pi_mhz(6.0);
    const double hwhm = 0.5 * gamma * (1.0 + 7.7);
    const double sigma = two_pi_mhz(60.0);
    auto lorentz = [&](double d) { return 1.0 / (1.0 + (d / hwhm) * (d / hwhm)); };
    const double quad = average_intensity(lorentz, {sigma, 161});
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> gauss(0.0, sigma);
    double acc = 0.0;
    const int n_mc = 1000000;
    for (int i = 0; i < n_mc; ++i) acc += lorentz(gauss(eng));
    const double mc = acc / n_mc;
    const double rel = std::abs(quad - mc) / mc;

    // Averaged antibunching sits above the on-resonance value.
    const SystemParams p = SystemParams::from_cooperativity(
        8.0, 0.8, two_pi_mhz(2500.0), two_pi_mhz(6.0));
    const auto cfg = InterferometerConfig::dark_port(p.k());
    const double flux = DriveField::from_Y(p, cfg, 0.1).photon_flux;
    const HilbertConfig h{8};
    const double bare = g2_zero(p, cfg, flux, h, Port::A).g2_0;
    const QuadratureRule rule = gauss_hermite({sigma, 161});
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const G2Zero z = g2_zero(p.with_delta_a(rule.nodes[i]), cfg, flux, h, Port::A);
        num += rule.weights[i] * z.intensity * z.intensity * z.g2_0;
        den += rule.weights[i] * z.intensity;
    }
    const double averaged = num / (den * den);

    const bool pass = averaged > bare && rel <= 1e-3;
    report(8, "disorder averaging", pass,
           "averaged g2_A(0)=" + fmt(averaged) + " > bare " + fmt(bare) +
               "; quadrature vs MC rel=" + fmt(rel, 3) + " target 1e-3");
}

// ------------------------------------------------------------------ 9

void criterion_9() {
    const SystemParams p = SystemParams::from_cooperativity(
        8.0, 0.8, two_pi_ghz(25.0), two_pi_mhz(6.0));
    const SwitchDensities dens = switch_densities(p, std::sqrt(0.6));
    const double p_cond = cond_fidelity(dens.cond);
    const double p_uncond = uncond_fidelity(dens.uncond);
    const bool fidelities_ok =
        std::abs(p_cond - 0.79) <= 0.01 && std::abs(p_uncond - 0.80) <= 0.01;

    // Balanced-limit closed form.
    const double kb = 0.9999;
    const SystemParams pb = SystemParams::from_cooperativity(
        kb / (1.0 - kb) - 1.0, kb, two_pi_ghz(25.0), two_pi_mhz(6.0));
    const double r = std::abs(scattering_amplitudes(pb).r_u);
    const double closed = 0.5 * (1.0 + std::exp(-(1.0 + r * r) * 0.6));
    const double got = cond_fidelity(switch_densities(pb, std::sqrt(0.6)).cond);
    const bool closed_ok = std::abs(got - closed) <= 1e-6;

    report(9, "switch fidelities", fidelities_ok && closed_ok,
           "P_cond=" + fmt(p_cond) + " target 0.79+-0.01, P_uncond=" + fmt(p_uncond) +
               " target 0.80+-0.01; balanced closed-form dev " +
               fmt(std::abs(got - closed), 2) +
               (fidelities_ok
                    ? ""
                    : "; note: the quoted 0.79/0.80 pair follows from these same "
                      "density matrices only for |alpha|^2 ~ 0.35, not 0.6"));
}

// ----------------------------------------------------------------- 10

void criterion_10() {
    const double gamma = two_pi_mhz(6.0);
    const double delta = two_pi_mhz(14.0);
    const SystemParams p = SystemParams::from_cooperativity(
        7.7, 1.0, two_pi_ghz(25.0), gamma, /*delta_a=*/-delta);
    const double shift = std::abs(fringe_phase_shift(p, 0.0, true));
    const cplx rc = reflection_lossless(7.7, delta, gamma);
    const double oracle = std::abs(std::arg(-std::conj(rc)));
    const bool pass = std::abs(shift - oracle) <= 0.01 * pi &&
                      shift / pi >= 0.63 - 0.15 && shift / pi <= 0.63 + 0.15;
    report(10, "fringe detuning shift", pass,
           "shift=" + fmt(shift / pi) + " pi vs oracle " + fmt(oracle / pi) +
               " pi; measured window 0.63+-0.15 pi");
}

// ----------------------------------------------------------------- 11

void criterion_11() {
    const ReadoutFidelity f = readout_fidelity({6.2, 0.2, 2});
    const bool pass = std::abs(f.f_avg - 0.984) <= 1e-3;
    report(11, "readout fidelity", pass,
           "f_avg=" + fmt(f.f_avg) + " target 0.984+-0.001 (f_on=" + fmt(f.f_on) +
               ", f_off=" + fmt(f.f_off) + ")");
}

// ----------------------------------------------------------------- 12

void criterion_12() {
    bool pass = true;
    std::string detail;

    {  // exponential
        std::vector<double> ts, ys;
        for (double t = 0.0; t <= 30.0; t += 0.25) {
            ts.push_back(t);
            ys.push_back(11.0 * std::exp(-t / 3.0) + 0.8);
        }
        const FitResult fit = fit_exponential(ts, ys, 1.0);
        const double rel = std::abs(fit.params[1] - 3.0) / 3.0;
        pass = pass && fit.converged && rel <= 1e-6;
        detail += "exp rel=" + fmt(rel, 2) + "  ";
    }
    {  // sinusoid
        std::vector<double> xs, ys;
        for (int i = 0; i <= 50; ++i) {
            xs.push_back(2.1 * pi * i / 50.0);
            ys.push_back(0.9 + 0.4 * std::cos(xs.back() - 2.0));
        }
        const FitResult fit = fit_sinusoid(xs, ys);
        const double rel = std::abs(fit.params[2] - 2.0) / 2.0;
        pass = pass && fit.converged && rel <= 1e-6;
        detail += "sin rel=" + fmt(rel, 2) + "  ";
    }
    {  // spectrum, noiseless then 1% noise
        SpectrumModel truth;
        truth.nu_fsr_ghz = 33.0;
        truth.kappa_wg = two_pi_ghz(20.3);
        truth.kappa_sc = two_pi_ghz(5.2);
        truth.global_amplitude = 1.0;
        truth.global_phase = 0.7;
        std::vector<double> nus;
        for (int i = 0; i <= 600; ++i) nus.push_back(-50.0 + 100.0 * i / 600.0);
        const auto [sum, diff] = characterization_spectrum(truth, nus);
        const FitResult clean = fit_spectrum(nus, sum.y, diff.y);
        double worst = 0.0;
        const double expect[5] = {33.0, 20.3, 5.2, 0.7, 1.0};
        for (int i = 0; i < 5; ++i) {
            worst = std::max(worst,
                             std::abs(clean.params[i] - expect[i]) / expect[i]);
        }
        pass = pass && clean.converged && worst <= 1e-6;
        detail += "spectrum rel=" + fmt(worst, 2) + "  ";

        std::mt19937_64 eng(303);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> sum_n = sum.y, diff_n = diff.y;
        double ps = 0.0, pd = 0.0;
        for (double v : sum_n) ps = std::max(ps, std::abs(v));
        for (double v : diff_n) pd = std::max(pd, std::abs(v));
        for (auto& v : sum_n) v += 0.01 * ps * g(eng);
        for (auto& v : diff_n) v += 0.01 * pd * g(eng);
        const FitResult noisy = fit_spectrum(nus, sum_n, diff_n);
        const double k = noisy.params[1] / (noisy.params[1] + noisy.params[2]);
        pass = pass && noisy.converged && std::abs(k - 0.80) <= 0.02;
        detail += "k=" + fmt(k, 4);
    }
    report(12, "fit self-consistency", pass, detail);
}

// ----------------------------------------------------------------- 13

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_13() {
    const char* cli = std::getenv("QPS_CLI");
    if (!cli) {
        report(13, "CLI determinism", false, "QPS_CLI not set");
        return;
    }
    const fs::path base = fs::temp_directory_path() / "qps_acceptance";
    fs::remove_all(base);
    const std::vector<std::string> commands{
        "fig2b --seed 5",
        "fig3 --seed 5 --rate-points 15 --tau-points 61 --g2-nodes 21",
        "fig4c --seed 5",
        "spectrum-fit --seed 5",
        "lifetime-fit --seed 5",
        "report --seed 5",
    };
    bool pass = true;
    std::string detail;
    for (std::size_t ci = 0; ci < commands.size(); ++ci) {
        const fs::path d1 = base / ("a" + std::to_string(ci));
        const fs::path d2 = base / ("b" + std::to_string(ci));
        for (const fs::path& d : {d1, d2}) {
            const std::string cmd = std::string(cli) + " " + commands[ci] +
                                    " --out " + d.string() + " >/dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                pass = false;
                detail += commands[ci].substr(0, commands[ci].find(' ')) + ":run-fail ";
            }
        }
        int n_files = 0;
        for (const auto& e : fs::directory_iterator(d1)) {
            ++n_files;
            const fs::path other = d2 / e.path().filename();
            if (!fs::exists(other) ||
                slurp(e.path()) != slurp(other)) {
                pass = false;
                detail += e.path().filename().string() + ":mismatch ";
            }
        }
        if (n_files == 0) {
            pass = false;
            detail += commands[ci].substr(0, commands[ci].find(' ')) + ":no-output ";
        }
    }
    fs::remove_all(base);
    if (detail.empty()) detail = "all commands byte-identical across reruns";
    report(13, "CLI determinism", pass, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    std::cout << (g_failures == 0
                      ? "acceptance: all criteria passed\n"
                      : "acceptance: " + std::to_string(g_failures) +
                            " criterion(s) failed\n");
    return g_failures == 0 ? 0 : 1;
}
