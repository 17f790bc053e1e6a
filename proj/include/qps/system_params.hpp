#ifndef QPS_SYSTEM_PARAMS_HPP
#define QPS_SYSTEM_PARAMS_HPP

#include <iosfwd>
#include <string>

#include "qps/units.hpp"

namespace qps {

// Complex decay rates and generalized cooperativity of the driven
// atom-cavity system. On resonance eta_tilde reduces to the real
// cooperativity eta = 4 g^2 / (kappa gamma).
struct ComplexRates {
    cplx kappa_tilde;  // kappa/2 + i Delta_c
    cplx gamma_tilde;  // gamma/2 + i Delta_a
    cplx eta_tilde;    // g^2 / (kappa_tilde gamma_tilde)
};

// All physical rates of the atom-cavity system in one place.
// Immutable value type; every rate is an angular frequency in rad/us.
class SystemParams {
  public:
    //   g         half the single-photon Rabi frequency
    //   kappa_wg  cavity decay into the waveguide
    //   kappa_sc  cavity decay into loss (scattering) channels
    //   gamma     atomic population decay
    //   delta_a   atom-laser detuning, Delta_a = omega_a - omega_L
    //   delta_c   cavity-laser detuning, Delta_c = omega_c - omega_L
    SystemParams(double g, double kappa_wg, double kappa_sc, double gamma,
                 double delta_a = 0.0, double delta_c = 0.0);

    // Builds the rate set from the dimensionless pair (eta, k) plus the
    // total cavity decay and atomic decay. Round-trips with eta()/k().
    static SystemParams from_cooperativity(double eta, double k, double kappa,
                                           double gamma, double delta_a = 0.0,
                                           double delta_c = 0.0);

    double g() const { return g_; }
    double kappa_wg() const { return kappa_wg_; }
    double kappa_sc() const { return kappa_sc_; }
    double gamma() const { return gamma_; }
    double delta_a() const { return delta_a_; }
    double delta_c() const { return delta_c_; }

    double kappa() const { return kappa_wg_ + kappa_sc_; }
    double k() const { return kappa_wg_ / kappa(); }
    double eta() const { return 4.0 * g_ * g_ / (kappa() * gamma_); }

    // Laser-atom detuning with the sign convention used for plotted
    // spectra: delta = -Delta_a.
    double delta() const { return -delta_a_; }

    SystemParams with_delta_a(double delta_a) const;
    SystemParams with_delta_c(double delta_c) const;
    SystemParams with_delta(double delta) const { return with_delta_a(-delta); }

  private:
    double g_;
    double kappa_wg_;
    double kappa_sc_;
    double gamma_;
    double delta_a_;
    double delta_c_;
};

// Reference-arm phase and polarization angles of the interferometer.
struct InterferometerConfig {
    double phi_v = 0.0;            // reference-arm phase
    double theta = pi / 4.0;       // input polarization angle w.r.t. H
    double theta_prime = pi / 4.0; // detection-basis angle (pi/4 throughout)

    // Input angle chosen so the d1 port is dark for an empty cavity on
    // resonance: tan(theta) = 2k - 1.
    static InterferometerConfig dark_port(double k, double phi_v = 0.0);
};

ComplexRates derive_rates(const SystemParams& p);

// Cooperativity from a measured excited-state lifetime tau (us):
// eta = (1/tau - gamma)/gamma. A lifetime at or above the free-space
// value signals no coupling; the result is then <= 0 and the optional
// flag is set instead of throwing.
double cooperativity_from_lifetime(double tau, double gamma,
                                   bool* weak_coupling_flag = nullptr);

// Flat key-value (text) serialization. Keys:
//   g_2pi_MHz, kappa_wg_2pi_GHz, kappa_sc_2pi_GHz,
//   gamma_2pi_MHz, delta_a_2pi_MHz, delta_c_2pi_MHz
SystemParams read_params(std::istream& in);
SystemParams load_params_file(const std::string& path);
void write_params(std::ostream& out, const SystemParams& p);
void save_params_file(const std::string& path, const SystemParams& p);

}  // namespace qps

#endif
