#include "qps/linres.hpp"

#include <cmath>
#include <stdexcept>

namespace qps {

cplx reflection_lossless(double eta, double delta, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    return ((eta - 1.0) * gamma + 2.0 * ii * delta) /
           ((eta + 1.0) * gamma - 2.0 * ii * delta);
}

ScatteringAmplitudes scattering_amplitudes(const SystemParams& p) {
    const ComplexRates cr = derive_rates(p);
    const cplx one_plus_eta = 1.0 + cr.eta_tilde;
    if (std::abs(one_plus_eta) < 1e-14) {
        throw std::domain_error("scattering_amplitudes: pole at 1 + eta_tilde = 0");
    }
    ScatteringAmplitudes s;
    s.r_u = 1.0 - p.kappa_wg() / cr.kappa_tilde;
    s.r_c = 1.0 - p.kappa_wg() / (cr.kappa_tilde * one_plus_eta);
    s.t_u = -std::sqrt(p.kappa_sc() * p.kappa_wg()) / cr.kappa_tilde;
    s.t_c = s.t_u / one_plus_eta;
    s.l_u = 0.0;
    s.l_c = ii * p.g() * std::sqrt(p.gamma() * p.kappa_wg()) /
            (cr.gamma_tilde * cr.kappa_tilde * one_plus_eta);
    return s;
}

PortFields port_fields(const SystemParams& p, const InterferometerConfig& cfg,
                       bool atom_present) {
    const ScatteringAmplitudes s = scattering_amplitudes(p);
    const cplx r = atom_present ? s.r_c : s.r_u;
    // Two-arm construction: b_out = r cos(theta) e_h + e^{i phi_v} sin(theta) e_v,
    // projected on the detection basis at theta_prime.
    const cplx bh = r * std::cos(cfg.theta);
    const cplx bv = std::exp(ii * cfg.phi_v) * std::sin(cfg.theta);
    PortFields f;
    f.d1 = bh * std::cos(cfg.theta_prime) + bv * std::sin(cfg.theta_prime);
    f.d2 = -bh * std::sin(cfg.theta_prime) + bv * std::cos(cfg.theta_prime);
    return f;
}

namespace {

double wrap_to_pi(double x) {
    return x - 2.0 * pi * std::round(x / (2.0 * pi));
}

}  // namespace

TraceSeries phase_spectrum(const SystemParams& p, std::span<const double> deltas,
                           PhaseSpectrumFlags* flags) {
    if (deltas.size() < 2) throw std::invalid_argument("phase_spectrum: need >= 2 points");
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] > deltas[i - 1])) {
            throw std::invalid_argument("phase_spectrum: deltas must be sorted ascending");
        }
    }
    PhaseSpectrumFlags local;
    TraceSeries out("delta_rad_per_us", "phase_rad", "phase_vs_empty");
    double prev = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const ScatteringAmplitudes s = scattering_amplitudes(p.with_delta(deltas[i]));
        if (std::abs(s.r_c) < 1e-9) local.near_critical = true;
        const double raw = std::arg(s.r_c) - std::arg(s.r_u);
        double ph;
        if (i == 0) {
            ph = raw;
        } else {
            const double step = wrap_to_pi(raw - prev);
            if (std::abs(step) > 0.5 * pi) local.sparse_sweep = true;
            ph = prev + step;
        }
        out.push(deltas[i], ph);
        prev = ph;
    }
    if (flags) *flags = local;
    return out;
}

double phase_winding(const TraceSeries& phase_trace) {
    if (phase_trace.size() < 2) throw std::invalid_argument("phase_winding: empty trace");
    const double total = phase_trace.y.back() - phase_trace.y.front();
    return 2.0 * pi * std::round(total / (2.0 * pi));
}

TraceSeries decay_enhancement(const SystemParams& p,
                              std::span<const double> delta_c_sweep) {
    TraceSeries out("delta_c_rad_per_us", "Gamma_over_gamma", "purcell");
    const double eta = p.eta();
    const double kappa = p.kappa();
    for (double dc : delta_c_sweep) {
        const double x = 2.0 * dc / kappa;
        out.push(dc, 1.0 + eta / (1.0 + x * x));
    }
    return out;
}

cplx empty_cavity_reflection(const SpectrumModel& m, double nu_ghz) {
    const double kappa = m.kappa_wg + m.kappa_sc;
    const double delta_c = -units::two_pi_ghz(nu_ghz);
    return 1.0 - m.kappa_wg / cplx(0.5 * kappa, delta_c);
}

std::pair<TraceSeries, TraceSeries> characterization_spectrum(
    const SpectrumModel& m, std::span<const double> nu_ghz) {
    if (!(m.nu_fsr_ghz > 0.0)) throw std::invalid_argument("nu_fsr must be > 0");
    const double kappa = m.kappa_wg + m.kappa_sc;
    const double k = m.kappa_wg / kappa;
    // Reference-arm reflectivity matched to the empty cavity on resonance.
    const double r_v = std::abs(1.0 - 2.0 * k);
    TraceSeries sum("nu_GHz", "power_arb", "sum");
    TraceSeries diff("nu_GHz", "power_arb", "diff");
    for (double nu : nu_ghz) {
        const cplx rc = empty_cavity_reflection(m, nu);
        const double phi0 = 2.0 * pi * nu / m.nu_fsr_ghz + m.global_phase;
        sum.push(nu, m.global_amplitude * 0.5 * (r_v * r_v + std::norm(rc)));
        diff.push(nu, m.global_amplitude * std::real(r_v * rc * std::exp(-ii * phi0)));
    }
    return {sum, diff};
}

}  // namespace qps
