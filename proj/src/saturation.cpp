#include "qps/saturation.hpp"

#include <cmath>
#include <stdexcept>

namespace qps {

namespace {

bool on_resonance(const SystemParams& p) {
    return p.delta_a() == 0.0 && p.delta_c() == 0.0;
}

// Input amplitude <a_wg,in> reproducing drive Y (taken real positive).
double input_amp_from_Y(const SystemParams& p, double Y) {
    return Y * p.kappa() * p.gamma() / (4.0 * p.g() * std::sqrt(p.kappa_wg()));
}

BlochSteadyState general_fixed_point(const SystemParams& p, cplx a_in) {
    const ComplexRates cr = derive_rates(p);
    const cplx one_plus_eta = 1.0 + cr.eta_tilde;
    const double g = p.g();
    const double abs_kt2 = std::norm(cr.kappa_tilde);

    // The eliminated Bloch equations are linear in (sigma, sigma^*,
    // sigma_z); their fixed point is closed-form.
    const double damping = p.gamma() + g * g * p.kappa() / abs_kt2;
    const double source = (4.0 * g * g * p.kappa_wg() * std::norm(a_in) / abs_kt2) *
                          std::real(1.0 / (cr.gamma_tilde * one_plus_eta));
    BlochSteadyState s;
    s.sigma_z = -damping / (damping + source);
    s.sigma = -ii * g * std::sqrt(p.kappa_wg()) * a_in * s.sigma_z /
              (cr.kappa_tilde * cr.gamma_tilde * one_plus_eta);

    // Residual of the ODE right-hand side, scaled by the fastest rate.
    const cplx dsigma = -(cr.gamma_tilde + g * g / cr.kappa_tilde) * s.sigma -
                        ii * g / cr.kappa_tilde * std::sqrt(p.kappa_wg()) * a_in *
                            s.sigma_z;
    const cplx mix = std::conj(s.sigma) * a_in / cr.kappa_tilde -
                     s.sigma * std::conj(a_in) / std::conj(cr.kappa_tilde);
    const double dsigma_z =
        -damping * (s.sigma_z + 1.0) +
        std::real(2.0 * ii * g * std::sqrt(p.kappa_wg()) * mix);
    const double scale = damping + source;
    if (std::abs(dsigma) + std::abs(dsigma_z) > 1e-9 * scale) {
        throw std::runtime_error("bloch_steady_state: fixed point residual too large");
    }
    return s;
}

}  // namespace

DriveField DriveField::from_flux(const SystemParams& p,
                                 const InterferometerConfig& cfg, double flux) {
    if (flux < 0.0) throw std::invalid_argument("photon_flux must be >= 0");
    DriveField d;
    d.photon_flux = flux;
    const double c = std::cos(cfg.theta);
    d.Y = std::sqrt(4.0 * p.eta() / p.gamma() * p.k() * flux * c * c);
    return d;
}

DriveField DriveField::from_Y(const SystemParams& p,
                              const InterferometerConfig& cfg, double Y) {
    if (Y < 0.0) throw std::invalid_argument("Y must be >= 0");
    DriveField d;
    d.Y = Y;
    const double c = std::cos(cfg.theta);
    const double denom = 4.0 * p.eta() / p.gamma() * p.k() * c * c;
    if (denom <= 0.0) {
        if (Y > 0.0) throw std::invalid_argument("drive undefined for eta = 0");
        d.photon_flux = 0.0;
        return d;
    }
    d.photon_flux = Y * Y / denom;
    return d;
}

BlochSteadyState bloch_steady_state(const SystemParams& p, double Y) {
    if (!std::isfinite(Y)) throw std::invalid_argument("Y must be finite");
    if (Y == 0.0 || p.g() == 0.0) {
        return {cplx(0.0, 0.0), -1.0};
    }
    if (on_resonance(p)) {
        const double eta = p.eta();
        const double denom = 2.0 * Y * Y + (1.0 + eta) * (1.0 + eta);
        BlochSteadyState s;
        s.sigma = ii * Y * (1.0 + eta) / denom;
        s.sigma_z = -(1.0 + eta) * (1.0 + eta) / denom;
        return s;
    }
    return general_fixed_point(p, input_amp_from_Y(p, Y));
}

std::pair<double, double> port_intensities(const SystemParams& p, double Y) {
    if (!on_resonance(p)) {
        throw std::invalid_argument(
            "port_intensities: closed forms hold on resonance; use "
            "port_intensities_general off resonance");
    }
    if (p.eta() == 0.0) {
        throw std::invalid_argument(
            "port_intensities: the drive parameterization Y needs eta > 0; "
            "an empty system is linear, use port_intensities_general");
    }
    const double eta = p.eta();
    const double k = p.k();
    const double gamma = p.gamma();
    const double denom = 2.0 * Y * Y + (1.0 + eta) * (1.0 + eta);
    const double pre = gamma / (2.0 * eta) * k * Y * Y;
    const double i1 = pre * eta * eta / denom;
    const double u = 1.0 - 2.0 * k;
    const double num2 = (2.0 * Y * Y + 1.0) * u * u +
                        2.0 * (1.0 - k) * u * eta +
                        (1.0 - k) * (1.0 - k) * eta * eta;
    const double i2 = pre * num2 / (k * k * denom);
    return {i1, i2};
}

std::pair<double, double> port_intensities_general(
    const SystemParams& p, const InterferometerConfig& cfg, double photon_flux) {
    if (photon_flux < 0.0) throw std::invalid_argument("photon_flux must be >= 0");
    const double b_s = std::sqrt(photon_flux);
    const cplx a_in = b_s * std::cos(cfg.theta);

    BlochSteadyState ss;
    if (p.g() == 0.0 || photon_flux == 0.0) {
        ss = {cplx(0.0, 0.0), -1.0};
    } else if (on_resonance(p)) {
        ss = bloch_steady_state(p, DriveField::from_flux(p, cfg, photon_flux).Y);
    } else {
        ss = general_fixed_point(p, a_in);
    }

    const ComplexRates cr = derive_rates(p);
    const double g = p.g();
    const cplx a_mean = (-ii * g * ss.sigma - std::sqrt(p.kappa_wg()) * a_in) /
                        cr.kappa_tilde;
    // Cavity fluctuations are slaved to the atomic ones; normally
    // ordered, only the atomic excess above |<sigma>|^2 contributes.
    const double fluct = g * g / std::norm(cr.kappa_tilde) *
                         (0.5 * (1.0 + ss.sigma_z) - std::norm(ss.sigma));
    const double w = std::sqrt(0.5 * p.kappa_wg());
    const cplx phase_v = std::exp(ii * cfg.phi_v);
    const cplx a1 = (std::cos(cfg.theta) + phase_v * std::sin(cfg.theta)) / std::sqrt(2.0);
    const cplx a2 = (-std::cos(cfg.theta) + phase_v * std::sin(cfg.theta)) / std::sqrt(2.0);
    const double i1 = std::norm(a1 * b_s + w * a_mean) + w * w * fluct;
    const double i2 = std::norm(a2 * b_s - w * a_mean) + w * w * fluct;
    return {i1, i2};
}

double spontaneous_loss(const SystemParams& p, double Y) {
    const BlochSteadyState s = bloch_steady_state(p, Y);
    return p.gamma() * 0.5 * (1.0 + s.sigma_z);
}

}  // namespace qps
