// qps: command-line front end regenerating the toolkit's theory curves
// and derived quantities as data files.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "qps/disorder.hpp"
#include "qps/fitkit.hpp"
#include "qps/lindblad.hpp"
#include "qps/linres.hpp"
#include "qps/phase_switch.hpp"
#include "qps/saturation.hpp"
#include "qps/system_params.hpp"
#include "qps/trace_series.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qps;

namespace {

struct CommonOpts {
    std::string params_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed = 12345;
    double sigma_delta_mhz = 60.0;
    double alpha2 = 0.6;
    // Inline overrides; applied on top of the file or built-in profile.
    std::optional<double> g_2pi_mhz, kappa_wg_2pi_ghz, kappa_sc_2pi_ghz,
        gamma_2pi_mhz, delta_a_2pi_mhz, delta_c_2pi_mhz, eta;
};

SystemParams default_params() {
    using namespace units;
    // Headline rates: 2g = 2pi x 1.09 GHz, cavity split 20.3/5.2 GHz,
    // gamma = 2pi x 6 MHz.
    return SystemParams(two_pi_mhz(545.0), two_pi_ghz(20.3), two_pi_ghz(5.2),
                        two_pi_mhz(6.0));
}

SystemParams resolve_params(const CommonOpts& c) {
    const SystemParams base =
        c.params_path.empty() ? default_params() : load_params_file(c.params_path);
    using namespace units;
    const double g = c.g_2pi_mhz ? two_pi_mhz(*c.g_2pi_mhz) : base.g();
    const double kwg =
        c.kappa_wg_2pi_ghz ? two_pi_ghz(*c.kappa_wg_2pi_ghz) : base.kappa_wg();
    const double ksc =
        c.kappa_sc_2pi_ghz ? two_pi_ghz(*c.kappa_sc_2pi_ghz) : base.kappa_sc();
    const double gamma =
        c.gamma_2pi_mhz ? two_pi_mhz(*c.gamma_2pi_mhz) : base.gamma();
    const double da =
        c.delta_a_2pi_mhz ? two_pi_mhz(*c.delta_a_2pi_mhz) : base.delta_a();
    const double dc =
        c.delta_c_2pi_mhz ? two_pi_mhz(*c.delta_c_2pi_mhz) : base.delta_c();
    SystemParams p(g, kwg, ksc, gamma, da, dc);
    if (c.eta) {
        // Convenience: rescale g to hit the requested cooperativity.
        p = SystemParams::from_cooperativity(*c.eta, p.k(), p.kappa(), p.gamma(),
                                             p.delta_a(), p.delta_c());
    }
    return p;
}

// Tracks files written by a command so a failure leaves no partial output.
class OutputSink {
  public:
    explicit OutputSink(const std::string& dir) : dir_(dir) {
        fs::create_directories(dir_);
    }
    std::string path(const std::string& name) {
        written_.push_back(dir_ / name);
        return (dir_ / name).string();
    }
    void discard_all() {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

  private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

struct ReportEntry {
    std::string name;
    double value;
    double sigma;
    std::string source;
};

ReportEntry entry(std::string name, double value, std::string source) {
    return {std::move(name), value, std::numeric_limits<double>::quiet_NaN(),
            std::move(source)};
}

ReportEntry entry(std::string name, double value, double sigma,
                  std::string source) {
    return {std::move(name), value, sigma, std::move(source)};
}

void write_report(const std::string& path, const std::string& format,
                  const std::vector<ReportEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    if (format == "json") {
        json j = json::array();
        for (const auto& e : entries) {
            json row{{"name", e.name}, {"value", e.value}, {"source", e.source}};
            if (std::isfinite(e.sigma)) row["sigma"] = e.sigma;
            j.push_back(row);
        }
        out << j.dump(2) << "\n";
    } else {
        for (const auto& e : entries) {
            out << e.name << " = " << format_double(e.value);
            if (std::isfinite(e.sigma)) out << " +- " << format_double(e.sigma);
            out << " (source: " << e.source << ")\n";
        }
    }
}

std::string report_name(const std::string& base, const std::string& format) {
    return base + (format == "json" ? ".json" : ".txt");
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / double(n - 1);
    return v;
}

std::vector<double> logspace(double lo_exp, double hi_exp, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / double(n - 1));
    }
    return v;
}

double wrap_to_pi(double x) { return x - 2.0 * pi * std::round(x / (2.0 * pi)); }

// ---------------------------------------------------------------- fig2b

struct Fig2bOpts {
    int n_points = 401;
    double span_gamma = 50.0;
    double offset_2pi_mhz = 5.0;
};

void run_fig2b(const CommonOpts& c, const Fig2bOpts& o, OutputSink& sink) {
    const SystemParams p = resolve_params(c);
    const double gamma = p.gamma();
    const double offset = units::two_pi_mhz(o.offset_2pi_mhz);

    const std::vector<double> deltas =
        linspace(-o.span_gamma * gamma, o.span_gamma * gamma, o.n_points);

    PhaseSpectrumFlags flags;
    const TraceSeries phase = phase_spectrum(p, deltas, &flags);
    TraceSeries with_atom("delta_over_gamma", "phase_rad", "with_atom");
    TraceSeries no_atom("delta_over_gamma", "phase_rad", "no_atom");
    for (std::size_t i = 0; i < phase.size(); ++i) {
        const double x = (phase.x[i] + offset) / gamma;
        with_atom.push(x, phase.y[i]);
        no_atom.push(x, 0.0);
    }
    {
        const std::vector<TraceSeries> all{with_atom, no_atom};
        write_csv(sink.path("fig2b_phase.csv"), all);
    }

    // Inset: power in the A port with an atom, reference phase pi,
    // normalized to the total reflected power without an atom.
    const InterferometerConfig cfg_pi = InterferometerConfig::dark_port(p.k(), pi);
    TraceSeries inset("delta_over_gamma", "A1_over_P0", "inset_phiV_pi");
    for (double d : deltas) {
        const SystemParams pd = p.with_delta(d);
        const PortFields f1 = port_fields(pd, cfg_pi, true);
        const PortFields f0 = port_fields(pd, cfg_pi, false);
        const double p0 = std::norm(f0.d1) + std::norm(f0.d2);
        inset.push((d + offset) / gamma, std::norm(f1.d1) / p0);
    }
    write_csv(sink.path("fig2b_reflectivity.csv"), inset);

    const InterferometerConfig cfg0 = InterferometerConfig::dark_port(p.k(), 0.0);
    const SystemParams pres = p.with_delta(0.0);
    const PortFields f1 = port_fields(pres, cfg0, true);
    const PortFields f0 = port_fields(pres, cfg0, false);
    const double p1_tot = std::norm(f1.d1) + std::norm(f1.d2);
    const double p0_tot = std::norm(f0.d1) + std::norm(f0.d2);

    // Phase shift at the atomic resonance, folded to (-pi, pi].
    double shift_res = 0.0;
    double best = 1e300;
    for (std::size_t i = 0; i < phase.size(); ++i) {
        if (std::abs(phase.x[i]) < best) {
            best = std::abs(phase.x[i]);
            shift_res = wrap_to_pi(phase.y[i]);
        }
    }

    const std::vector<ReportEntry> entries{
        entry("winding_rad", phase_winding(phase), "model"),
        entry("unwrapped_span_rad", phase.y.back() - phase.y.front(), "model"),
        entry("phase_shift_resonance_pi", std::abs(shift_res) / pi, "model"),
        entry("P1_over_P0_resonance", p1_tot / p0_tot, "model"),
        entry("A_fraction_resonance", std::norm(f1.d1) / p1_tot, "model"),
        entry("eta", p.eta(), "params"),
        entry("offset_2pi_MHz", o.offset_2pi_mhz, "config"),
        entry("sparse_sweep_flag", flags.sparse_sweep ? 1.0 : 0.0, "model"),
        entry("near_critical_flag", flags.near_critical ? 1.0 : 0.0, "model"),
    };
    write_report(sink.path(report_name("fig2b_summary", c.format)), c.format,
                 entries);
}

// ----------------------------------------------------------------- fig3

struct Fig3Opts {
    int rate_points = 25;
    double g2_Y = 0.1;
    int n_max = 6;
    double tau_max_ns = 30.0;
    int tau_points = 121;
    int g2_nodes = 41;
};

void run_fig3(const CommonOpts& c, const Fig3Opts& o, OutputSink& sink) {
    const SystemParams p = resolve_params(c).with_delta_a(0.0).with_delta_c(0.0);
    const InterferometerConfig cfg = InterferometerConfig::dark_port(p.k());
    const double big_gamma = (1.0 + p.eta()) * p.gamma();
    const double sigma = units::two_pi_mhz(c.sigma_delta_mhz);

    // No-atom reference power fraction (independent of drive).
    const PortFields f0 = port_fields(p, cfg, false);
    const double p0_frac = std::norm(f0.d1) + std::norm(f0.d2);

    TraceSeries a_tr("rate_over_Gamma", "power_fraction", "A_over_P0");
    TraceSeries d_tr("rate_over_Gamma", "power_fraction", "D_over_P0");
    TraceSeries a_dis("rate_over_Gamma", "power_fraction", "A_over_P0_disorder");
    TraceSeries d_dis("rate_over_Gamma", "power_fraction", "D_over_P0_disorder");
    const DetuningDistribution dist{sigma, 161};
    for (double x : logspace(-2.0, 2.0, o.rate_points)) {
        const double flux = x * big_gamma;
        const double p0 = flux * p0_frac;
        const auto [i1, i2] = port_intensities_general(p, cfg, flux);
        a_tr.push(x, i1 / p0);
        d_tr.push(x, i2 / p0);
        const double i1_avg = average_intensity(
            [&](double d) {
                return port_intensities_general(p.with_delta_a(d), cfg, flux).first;
            },
            dist);
        const double i2_avg = average_intensity(
            [&](double d) {
                return port_intensities_general(p.with_delta_a(d), cfg, flux).second;
            },
            dist);
        a_dis.push(x, i1_avg / p0);
        d_dis.push(x, i2_avg / p0);
    }
    {
        const std::vector<TraceSeries> all{a_tr, d_tr, a_dis, d_dis};
        write_csv(sink.path("fig3_saturation.csv"), all);
    }

    // Saturation knee: input rate where the A-port output falls to half
    // its low-power fraction.
    double knee = std::numeric_limits<double>::quiet_NaN();
    const double half = 0.5 * a_tr.y.front();
    for (std::size_t i = 1; i < a_tr.size(); ++i) {
        if (a_tr.y[i] <= half) {
            const double f = (half - a_tr.y[i - 1]) / (a_tr.y[i] - a_tr.y[i - 1]);
            knee = a_tr.x[i - 1] + f * (a_tr.x[i] - a_tr.x[i - 1]);
            break;
        }
    }

    // Photon correlations at fixed weak drive, bare and disorder-averaged.
    const HilbertConfig h{o.n_max};
    const double flux_g2 = DriveField::from_Y(p, cfg, o.g2_Y).photon_flux;
    std::vector<double> taus(o.tau_points);
    for (int i = 0; i < o.tau_points; ++i) {
        taus[i] = units::ns(o.tau_max_ns) * i / double(o.tau_points - 1);
    }
    const DetuningDistribution g2_dist{sigma, o.g2_nodes};

    // One engine per detuning node, shared by both ports and reused
    // between the trace and intensity evaluations.
    std::map<double, std::shared_ptr<G2Engine>> engines;
    auto engine_at = [&](double d) {
        auto it = engines.find(d);
        if (it == engines.end()) {
            it = engines
                     .emplace(d, std::make_shared<G2Engine>(p.with_delta_a(d),
                                                            cfg, flux_g2, h))
                     .first;
        }
        return it->second;
    };

    std::vector<ReportEntry> entries;
    for (Port port : {Port::A, Port::D}) {
        const std::string pname = port == Port::A ? "A" : "D";
        TraceSeries bare = engine_at(0.0)->correlation(port, taus);
        bare.tag = pname;
        TraceSeries averaged = average_g2(
            [&](double d) { return engine_at(d)->correlation(port, taus); },
            [&](double d) { return engine_at(d)->zero(port).intensity; },
            g2_dist);
        averaged.tag = pname + "_disorder";
        const std::vector<TraceSeries> both{bare, averaged};
        write_csv(sink.path("fig3_g2_" + pname + ".csv"), both);
        entries.push_back(entry("g2_" + pname + "_0", bare.y.front(), "model"));
        entries.push_back(
            entry("g2_" + pname + "_0_disorder", averaged.y.front(), "model"));
    }
    entries.push_back(entry("knee_rate_over_Gamma", knee, "model"));
    entries.push_back(entry("sigma_delta_2pi_MHz", c.sigma_delta_mhz, "config"));
    entries.push_back(entry("g2_drive_Y", o.g2_Y, "config"));
    write_report(sink.path(report_name("fig3_summary", c.format)), c.format,
                 entries);
}

// ---------------------------------------------------------------- fig4c

struct Fig4cOpts {
    int n_theta = 181;
};

void run_fig4c(const CommonOpts& c, const Fig4cOpts& o, OutputSink& sink) {
    const SystemParams base = resolve_params(c);
    const cplx alpha = std::sqrt(c.alpha2);
    const std::vector<double> thetas = linspace(0.0, 2.0 * pi, o.n_theta);

    std::vector<TraceSeries> fringes;
    std::vector<ReportEntry> entries;
    struct Case {
        std::string name;
        double delta;
    };
    const std::vector<Case> cases{{"resonant", 0.0},
                                  {"detuned_14MHz", units::two_pi_mhz(14.0)}};
    for (const auto& cs : cases) {
        const SystemParams p = base.with_delta(cs.delta).with_delta_c(0.0);
        TraceSeries nogate = ramsey_fringe(p, 0.0, thetas, false);
        nogate.tag = cs.name + "_nogate";
        TraceSeries cond = ramsey_fringe(p, alpha, thetas, true);
        cond.tag = cs.name + "_conditioned";
        TraceSeries uncond = ramsey_fringe(p, alpha, thetas, false);
        uncond.tag = cs.name + "_unconditioned";

        // Fringe phases from sinusoidal fits; shifts are relative to the
        // no-gate fringe.
        const FitResult f_ng = fit_sinusoid(nogate.x, nogate.y);
        const FitResult f_c = fit_sinusoid(cond.x, cond.y);
        const FitResult f_u = fit_sinusoid(uncond.x, uncond.y);
        const double shift_c = wrap_to_pi(f_c.params[2] - f_ng.params[2]);
        const double shift_u = wrap_to_pi(f_u.params[2] - f_ng.params[2]);

        const SwitchDensities dens = switch_densities(p, alpha);
        entries.push_back(entry(cs.name + "_conditioned_shift_pi",
                                std::abs(shift_c) / pi, "sinusoid_fit"));
        entries.push_back(entry(cs.name + "_unconditioned_shift_pi",
                                std::abs(shift_u) / pi, "sinusoid_fit"));
        entries.push_back(entry(cs.name + "_weak_gate_conditioned_shift_pi",
                                std::abs(fringe_phase_shift(p, 0.0, true)) / pi,
                                "model"));
        entries.push_back(entry(cs.name + "_visibility_conditioned",
                                2.0 * std::abs(dens.cond.off_diagonal()),
                                "model"));
        entries.push_back(
            entry(cs.name + "_P_cond", cond_fidelity(dens.cond), "model"));
        entries.push_back(
            entry(cs.name + "_P_uncond", uncond_fidelity(dens.uncond), "model"));

        fringes.push_back(std::move(nogate));
        fringes.push_back(std::move(cond));
        fringes.push_back(std::move(uncond));
    }
    entries.push_back(entry("alpha2", c.alpha2, "config"));
    write_csv(sink.path("fig4c_fringes.csv"), fringes);
    write_report(sink.path(report_name("fig4c_summary", c.format)), c.format,
                 entries);
}

// --------------------------------------------------------- spectrum-fit

struct SpectrumFitOpts {
    double noise = 0.01;
    int n_points = 601;
    double span_ghz = 50.0;
    std::string input;
};

// k = kappa_wg / kappa with 1-sigma from the fitted covariance.
std::pair<double, double> k_with_sigma(const FitResult& fit) {
    const double w = fit.params[1];
    const double s = fit.params[2];
    const double k = w / (w + s);
    const double dw = s / ((w + s) * (w + s));
    const double ds = -w / ((w + s) * (w + s));
    const double var = dw * dw * fit.covariance(1, 1) +
                       ds * ds * fit.covariance(2, 2) +
                       2.0 * dw * ds * fit.covariance(1, 2);
    return {k, std::sqrt(std::max(var, 0.0))};
}

void run_spectrum_fit(const CommonOpts& c, const SpectrumFitOpts& o,
                      OutputSink& sink) {
    TraceSeries sum, diff;
    if (!o.input.empty()) {
        const auto series = read_csv_file(o.input);
        for (const auto& s : series) {
            if (s.tag == "sum") sum = s;
            if (s.tag == "diff") diff = s;
        }
        if (sum.size() == 0 || diff.size() == 0) {
            throw std::runtime_error(
                "spectrum-fit: input needs 'sum' and 'diff' tags");
        }
    } else {
        const SystemParams p = resolve_params(c);
        SpectrumModel truth;
        truth.nu_fsr_ghz = 33.0;
        truth.kappa_wg = p.kappa_wg();
        truth.kappa_sc = p.kappa_sc();
        truth.global_amplitude = 1.0;
        truth.global_phase = 0.7;
        const std::vector<double> nus =
            linspace(-o.span_ghz, o.span_ghz, o.n_points);
        auto [s, d] = characterization_spectrum(truth, nus);
        std::mt19937_64 eng(c.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto add_noise = [&](TraceSeries& tr) {
            double peak = 0.0;
            for (double y : tr.y) peak = std::max(peak, std::abs(y));
            for (auto& y : tr.y) y += o.noise * peak * gauss(eng);
        };
        add_noise(s);
        add_noise(d);
        sum = s;
        diff = d;
    }
    {
        const std::vector<TraceSeries> all{sum, diff};
        write_csv(sink.path("spectrum_fit_data.csv"), all);
    }

    const FitResult fit = fit_spectrum(sum.x, sum.y, diff.y);
    if (!fit.converged) throw std::runtime_error("spectrum-fit: did not converge");
    const auto [k, k_sigma] = k_with_sigma(fit);
    const std::vector<ReportEntry> entries{
        entry("nu_fsr_GHz", fit.params[0], fit.sigma(0), "fit"),
        entry("kappa_wg_2pi_GHz", fit.params[1], fit.sigma(1), "fit"),
        entry("kappa_sc_2pi_GHz", fit.params[2], fit.sigma(2), "fit"),
        entry("global_phase_rad", fit.params[3], fit.sigma(3), "fit"),
        entry("global_amplitude", fit.params[4], fit.sigma(4), "fit"),
        entry("k", k, k_sigma, "fit"),
        entry("residual_norm", fit.residual_norm, "fit"),
        entry("ambiguous_flag", fit.ambiguous ? 1.0 : 0.0, "fit"),
        entry("degenerate_flag", fit.degenerate ? 1.0 : 0.0, "fit"),
    };
    write_report(sink.path(report_name("spectrum_fit_result", c.format)),
                 c.format, entries);
}

// --------------------------------------------------------- lifetime-fit

struct LifetimeFitOpts {
    double tau_ns = 3.0;
    double amplitude = 700.0;
    double background = 2.0;
    double t_max_ns = 30.0;
    double dt_ns = 0.2;
    double window_start_ns = 1.0;
    double gamma_inv_ns = 26.0;
};

void run_lifetime_fit(const CommonOpts& c, const LifetimeFitOpts& o,
                      OutputSink& sink) {
    std::mt19937_64 eng(c.seed);
    TraceSeries data("t_ns", "counts", "decay");
    for (double t = 0.0; t <= o.t_max_ns + 1e-9; t += o.dt_ns) {
        const double mean = o.amplitude * std::exp(-t / o.tau_ns) + o.background;
        std::poisson_distribution<long> pois(mean);
        data.push(t, double(pois(eng)));
    }
    write_csv(sink.path("lifetime_fit_data.csv"), data);

    const FitResult fit = fit_exponential(data.x, data.y, o.window_start_ns);
    if (!fit.converged) throw std::runtime_error("lifetime-fit: did not converge");
    const double tau = fit.params[1];
    const double tau_sigma = fit.sigma(1);
    const double gamma = 1.0 / units::ns(o.gamma_inv_ns);
    bool weak = false;
    const double eta = cooperativity_from_lifetime(units::ns(tau), gamma, &weak);
    const double eta_sigma = tau_sigma / tau * (1.0 / units::ns(tau)) / gamma;

    const std::vector<ReportEntry> entries{
        entry("tau_ns", tau, tau_sigma, "fit"),
        entry("amplitude", fit.params[0], fit.sigma(0), "fit"),
        entry("background", fit.params[2], fit.sigma(2), "fit"),
        entry("eta_from_lifetime", eta, eta_sigma, "fit"),
        entry("gamma_inv_ns", o.gamma_inv_ns, "config"),
        entry("weak_coupling_flag", weak ? 1.0 : 0.0, "fit"),
    };
    write_report(sink.path(report_name("lifetime_fit_result", c.format)),
                 c.format, entries);
}

// --------------------------------------------------------------- report

void run_report(const CommonOpts& c, OutputSink& sink) {
    const SystemParams p = resolve_params(c);
    std::vector<ReportEntry> entries;

    // Cooperativity from the measured lifetime, against the free-space
    // lifetime reference.
    const double gamma_free = 1.0 / units::ns(26.0);
    entries.push_back(
        entry("eta_from_lifetime_ideal",
              cooperativity_from_lifetime(units::ns(3.0), gamma_free),
              "closed_form tau=3.0ns gamma_inv=26ns"));
    entries.push_back(entry("eta_from_params", p.eta(), "params"));

    // Synthetic lifetime fit.
    {
        std::mt19937_64 eng(c.seed);
        std::vector<double> ts, ys;
        for (double t = 0.0; t <= 30.0 + 1e-9; t += 0.2) {
            const double mean = 700.0 * std::exp(-t / 3.0) + 2.0;
            std::poisson_distribution<long> pois(mean);
            ts.push_back(t);
            ys.push_back(double(pois(eng)));
        }
        const FitResult fit = fit_exponential(ts, ys, 1.0);
        const double eta =
            cooperativity_from_lifetime(units::ns(fit.params[1]), gamma_free);
        entries.push_back(
            entry("tau_fit_ns", fit.params[1], fit.sigma(1), "synthetic_fit"));
        entries.push_back(entry("eta_from_lifetime_fit", eta, "synthetic_fit"));
    }

    // Synthetic interferometer characterization fit.
    {
        SpectrumModel truth;
        truth.nu_fsr_ghz = 33.0;
        truth.kappa_wg = p.kappa_wg();
        truth.kappa_sc = p.kappa_sc();
        truth.global_amplitude = 1.0;
        truth.global_phase = 0.7;
        const std::vector<double> nus = linspace(-50.0, 50.0, 601);
        auto [sum, diff] = characterization_spectrum(truth, nus);
        std::mt19937_64 eng(c.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto add_noise = [&](TraceSeries& tr) {
            double peak = 0.0;
            for (double y : tr.y) peak = std::max(peak, std::abs(y));
            for (auto& y : tr.y) y += 0.01 * peak * gauss(eng);
        };
        add_noise(sum);
        add_noise(diff);
        const FitResult fit = fit_spectrum(nus, sum.y, diff.y);
        const auto [k, k_sigma] = k_with_sigma(fit);
        entries.push_back(entry("k_from_spectrum_fit", k, k_sigma, "synthetic_fit"));
    }

    // Interferometer response at eta = 8 with the configured loss split.
    {
        const SystemParams p8 =
            SystemParams::from_cooperativity(8.0, p.k(), p.kappa(), p.gamma());
        const InterferometerConfig cfg = InterferometerConfig::dark_port(p8.k());
        const PortFields f1 = port_fields(p8, cfg, true);
        const PortFields f0 = port_fields(p8, cfg, false);
        const double p1 = std::norm(f1.d1) + std::norm(f1.d2);
        const double p0 = std::norm(f0.d1) + std::norm(f0.d2);
        entries.push_back(entry("power_ratio_with_atom", p1 / p0,
                                "closed_form eta=8"));
        entries.push_back(entry("A_port_fraction_with_atom",
                                std::norm(f1.d1) / p1, "closed_form eta=8"));
        entries.push_back(entry("no_atom_reflection_two_arm", p0, "closed_form"));
        const double k = p.k();
        entries.push_back(entry("cavity_only_reflectance",
                                (1.0 - 2.0 * k) * (1.0 - 2.0 * k),
                                "closed_form |1-2k|^2"));

        const SwitchDensities dens = switch_densities(p8, std::sqrt(c.alpha2));
        entries.push_back(
            entry("P_cond", cond_fidelity(dens.cond), "closed_form eta=8"));
        entries.push_back(
            entry("P_uncond", uncond_fidelity(dens.uncond), "closed_form eta=8"));
    }

    {
        const ReadoutModel m{6.2, 0.2, 2};
        const ReadoutFidelity f = readout_fidelity(m);
        entries.push_back(entry("readout_fidelity_on", f.f_on, "poisson_model"));
        entries.push_back(entry("readout_fidelity_off", f.f_off, "poisson_model"));
        entries.push_back(entry("readout_fidelity_avg", f.f_avg, "poisson_model"));
    }
    entries.push_back(entry("alpha2", c.alpha2, "config"));

    write_report(sink.path(report_name("report", c.format)), c.format, entries);
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--params", c.params_path, "parameter file (flat key=value)");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--format", c.format, "scalar output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--sigma-delta", c.sigma_delta_mhz,
                    "detuning disorder sigma (2pi x MHz)");
    cmd->add_option("--alpha2", c.alpha2, "mean gate photon number |alpha|^2");
    // Inline overrides, highest precedence.
    cmd->add_option("--g-2pi-mhz", c.g_2pi_mhz);
    cmd->add_option("--kappa-wg-2pi-ghz", c.kappa_wg_2pi_ghz);
    cmd->add_option("--kappa-sc-2pi-ghz", c.kappa_sc_2pi_ghz);
    cmd->add_option("--gamma-2pi-mhz", c.gamma_2pi_mhz);
    cmd->add_option("--delta-a-2pi-mhz", c.delta_a_2pi_mhz);
    cmd->add_option("--delta-c-2pi-mhz", c.delta_c_2pi_mhz);
    cmd->add_option("--eta", c.eta, "rescale g to this cooperativity");
}

template <typename Fn>
int guarded(const CommonOpts& c, Fn&& body) {
    OutputSink sink(c.out_dir);
    try {
        body(sink);
    } catch (const std::exception& e) {
        sink.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"atom-cavity phase switch toolkit"};
    app.require_subcommand(1);

    CommonOpts c2b, c3, c4, csf, clf, crp;
    Fig2bOpts o2b;
    Fig3Opts o3;
    Fig4cOpts o4;
    SpectrumFitOpts osf;
    LifetimeFitOpts olf;

    auto* fig2b = app.add_subcommand("fig2b", "phase shift vs detuning traces");
    add_common(fig2b, c2b);
    fig2b->add_option("--n-points", o2b.n_points)->check(CLI::Range(2, 1000000));
    fig2b->add_option("--span-gamma", o2b.span_gamma);
    fig2b->add_option("--delta-offset", o2b.offset_2pi_mhz,
                      "resonance offset (2pi x MHz)");

    auto* fig3 = app.add_subcommand("fig3", "saturation and photon statistics");
    add_common(fig3, c3);
    fig3->add_option("--rate-points", o3.rate_points)->check(CLI::Range(2, 100000));
    fig3->add_option("--g2-Y", o3.g2_Y, "drive amplitude Y for g2 traces");
    fig3->add_option("--n-max", o3.n_max, "Fock cutoff")->check(CLI::Range(2, 30));
    fig3->add_option("--tau-max-ns", o3.tau_max_ns);
    fig3->add_option("--tau-points", o3.tau_points)->check(CLI::Range(2, 100000));
    fig3->add_option("--g2-nodes", o3.g2_nodes, "disorder nodes for g2 averaging");

    auto* fig4c = app.add_subcommand("fig4c", "quantum phase switch fringes");
    add_common(fig4c, c4);
    fig4c->add_option("--n-theta", o4.n_theta)->check(CLI::Range(4, 1000000));

    auto* spectrum =
        app.add_subcommand("spectrum-fit", "interferometer characterization fit");
    add_common(spectrum, csf);
    spectrum->add_option("--noise", osf.noise, "relative noise level");
    spectrum->add_option("--n-points", osf.n_points)->check(CLI::Range(16, 1000000));
    spectrum->add_option("--span", osf.span_ghz, "half span (GHz)");
    spectrum->add_option("--input", osf.input, "fit this CSV instead of synthesizing");

    auto* lifetime = app.add_subcommand("lifetime-fit", "excited-state decay fit");
    add_common(lifetime, clf);
    lifetime->add_option("--tau-ns", olf.tau_ns);
    lifetime->add_option("--amplitude", olf.amplitude);
    lifetime->add_option("--window-start-ns", olf.window_start_ns);
    lifetime->add_option("--gamma-inv-ns", olf.gamma_inv_ns,
                         "free-space lifetime reference (ns)");

    auto* report = app.add_subcommand("report", "scalar summary of derived numbers");
    add_common(report, crp);

    CLI11_PARSE(app, argc, argv);

    if (fig2b->parsed()) {
        return guarded(c2b, [&](OutputSink& s) { run_fig2b(c2b, o2b, s); });
    }
    if (fig3->parsed()) {
        return guarded(c3, [&](OutputSink& s) { run_fig3(c3, o3, s); });
    }
    if (fig4c->parsed()) {
        return guarded(c4, [&](OutputSink& s) { run_fig4c(c4, o4, s); });
    }
    if (spectrum->parsed()) {
        return guarded(csf, [&](OutputSink& s) { run_spectrum_fit(csf, osf, s); });
    }
    if (lifetime->parsed()) {
        return guarded(clf, [&](OutputSink& s) { run_lifetime_fit(clf, olf, s); });
    }
    if (report->parsed()) {
        return guarded(crp, [&](OutputSink& s) { run_report(crp, s); });
    }
    return 1;
}
