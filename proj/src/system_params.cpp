#include "qps/system_params.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qps/trace_series.hpp"

namespace qps {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

}  // namespace

SystemParams::SystemParams(double g, double kappa_wg, double kappa_sc,
                           double gamma, double delta_a, double delta_c)
    : g_(g), kappa_wg_(kappa_wg), kappa_sc_(kappa_sc), gamma_(gamma),
      delta_a_(delta_a), delta_c_(delta_c) {
    require_finite(g, "g");
    require_finite(kappa_wg, "kappa_wg");
    require_finite(kappa_sc, "kappa_sc");
    require_finite(gamma, "gamma");
    require_finite(delta_a, "delta_a");
    require_finite(delta_c, "delta_c");
    if (g < 0.0) throw std::invalid_argument("g must be >= 0");
    if (kappa_wg <= 0.0) throw std::invalid_argument("kappa_wg must be > 0");
    if (kappa_sc < 0.0) throw std::invalid_argument("kappa_sc must be >= 0");
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
}

SystemParams SystemParams::from_cooperativity(double eta, double k, double kappa,
                                              double gamma, double delta_a,
                                              double delta_c) {
    if (eta < 0.0) throw std::invalid_argument("eta must be >= 0");
    if (k <= 0.0 || k > 1.0) throw std::invalid_argument("k must be in (0, 1]");
    if (kappa <= 0.0) throw std::invalid_argument("kappa must be > 0");
    if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
    const double g = 0.5 * std::sqrt(eta * kappa * gamma);
    return SystemParams(g, k * kappa, (1.0 - k) * kappa, gamma, delta_a, delta_c);
}

SystemParams SystemParams::with_delta_a(double delta_a) const {
    return SystemParams(g_, kappa_wg_, kappa_sc_, gamma_, delta_a, delta_c_);
}

SystemParams SystemParams::with_delta_c(double delta_c) const {
    return SystemParams(g_, kappa_wg_, kappa_sc_, gamma_, delta_a_, delta_c);
}

InterferometerConfig InterferometerConfig::dark_port(double k, double phi_v) {
    if (k <= 0.0 || k > 1.0) throw std::invalid_argument("k must be in (0, 1]");
    InterferometerConfig cfg;
    cfg.theta = std::atan(2.0 * k - 1.0);
    cfg.phi_v = phi_v;
    cfg.theta_prime = pi / 4.0;
    return cfg;
}

ComplexRates derive_rates(const SystemParams& p) {
    ComplexRates r;
    r.kappa_tilde = cplx(0.5 * p.kappa(), p.delta_c());
    r.gamma_tilde = cplx(0.5 * p.gamma(), p.delta_a());
    r.eta_tilde = p.g() * p.g() / (r.kappa_tilde * r.gamma_tilde);
    return r;
}

double cooperativity_from_lifetime(double tau, double gamma,
                                   bool* weak_coupling_flag) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    const double eta = (1.0 / tau - gamma) / gamma;
    if (weak_coupling_flag) *weak_coupling_flag = (eta <= 0.0);
    return eta;
}

namespace {

std::map<std::string, double> parse_key_values(std::istream& in) {
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
            if (blank) continue;
            throw std::runtime_error("params: bad line " + std::to_string(lineno));
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            kv[key] = std::stod(val);
        } catch (const std::exception&) {
            throw std::runtime_error("params: bad value for key '" + key + "'");
        }
    }
    return kv;
}

}  // namespace

SystemParams read_params(std::istream& in) {
    const auto kv = parse_key_values(in);
    auto get = [&](const std::string& key, bool required, double fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (required) throw std::runtime_error("params: missing key '" + key + "'");
            return fallback;
        }
        return it->second;
    };
    const double g = units::two_pi_mhz(get("g_2pi_MHz", true, 0));
    const double kwg = units::two_pi_ghz(get("kappa_wg_2pi_GHz", true, 0));
    const double ksc = units::two_pi_ghz(get("kappa_sc_2pi_GHz", true, 0));
    const double gamma = units::two_pi_mhz(get("gamma_2pi_MHz", true, 0));
    const double da = units::two_pi_mhz(get("delta_a_2pi_MHz", false, 0.0));
    const double dc = units::two_pi_mhz(get("delta_c_2pi_MHz", false, 0.0));
    return SystemParams(g, kwg, ksc, gamma, da, dc);
}

SystemParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params file: " + path);
    return read_params(in);
}

void write_params(std::ostream& out, const SystemParams& p) {
    out << "g_2pi_MHz = " << format_double(units::to_two_pi_mhz(p.g())) << "\n"
        << "kappa_wg_2pi_GHz = " << format_double(units::to_two_pi_ghz(p.kappa_wg())) << "\n"
        << "kappa_sc_2pi_GHz = " << format_double(units::to_two_pi_ghz(p.kappa_sc())) << "\n"
        << "gamma_2pi_MHz = " << format_double(units::to_two_pi_mhz(p.gamma())) << "\n"
        << "delta_a_2pi_MHz = " << format_double(units::to_two_pi_mhz(p.delta_a())) << "\n"
        << "delta_c_2pi_MHz = " << format_double(units::to_two_pi_mhz(p.delta_c())) << "\n";
}

void save_params_file(const std::string& path, const SystemParams& p) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write params file: " + path);
    write_params(out, p);
}

}  // namespace qps
