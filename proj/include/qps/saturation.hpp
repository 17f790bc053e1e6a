#ifndef QPS_SATURATION_HPP
#define QPS_SATURATION_HPP

#include <utility>

#include "qps/system_params.hpp"

namespace qps {

// Incident drive on the interferometer. photon_flux = |b_s|^2 in
// photons/us; Y is the dimensionless drive amplitude of the adiabatic
// theory, Y^2 = (4 eta / gamma) k |b_s|^2 cos^2(theta).
struct DriveField {
    double photon_flux = 0.0;
    double Y = 0.0;

    static DriveField from_flux(const SystemParams& p,
                                const InterferometerConfig& cfg, double flux);
    static DriveField from_Y(const SystemParams& p,
                             const InterferometerConfig& cfg, double Y);
};

// Steady-state atomic Bloch vector after adiabatic elimination of the
// cavity.
struct BlochSteadyState {
    cplx sigma;      // <sigma>
    double sigma_z;  // <sigma_z>
};

// Steady state for drive amplitude Y. On resonance this is the closed
// form sigma = i Y (1+eta) / (2Y^2 + (1+eta)^2),
// sigma_z = -(1+eta)^2 / (2Y^2 + (1+eta)^2); off resonance the fixed
// point of the adiabatically eliminated Bloch equations is solved
// directly (it is linear in the unknowns) and verified against the ODE
// right-hand side.
BlochSteadyState bloch_steady_state(const SystemParams& p, double Y);

// Saturated intensities (photons/us) at the two interferometer ports for
// the dark-port configuration tan(theta) = 2k-1, phi_v = 0, on
// resonance. Closed forms in (eta, k, Y).
std::pair<double, double> port_intensities(const SystemParams& p, double Y);

// General (any detuning, any interferometer setting) saturated port
// intensities from the adiabatically eliminated steady state, including
// the incoherent fluorescence contribution. Reduces to port_intensities
// for the resonant dark-port configuration.
std::pair<double, double> port_intensities_general(
    const SystemParams& p, const InterferometerConfig& cfg, double photon_flux);

// Rate of spontaneous emission into free space, gamma <sigma^dag sigma>,
// for the steady state at drive Y (photons/us). Closes the photon budget
// together with the port intensities when kappa_sc = 0.
double spontaneous_loss(const SystemParams& p, double Y);

}  // namespace qps

#endif
