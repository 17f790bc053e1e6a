#ifndef QPS_LINRES_HPP
#define QPS_LINRES_HPP

#include <span>
#include <utility>

#include "qps/system_params.hpp"
#include "qps/trace_series.hpp"

namespace qps {

// Weak-drive scattering amplitudes of the cavity-waveguide system into
// the {reflected, cavity-scattered, spontaneous-emission} modes, for the
// uncoupled (u) and coupled (c) atomic states. Each branch satisfies
// |r|^2 + |t|^2 + |l|^2 = 1.
struct ScatteringAmplitudes {
    cplx r_u, r_c;
    cplx t_u, t_c;
    cplx l_u, l_c;
};

// Field amplitudes at the two interferometer detectors for unit input
// amplitude b_s = 1.
struct PortFields {
    cplx d1, d2;
};

// Empty-interferometer characterization model: reference arm with fixed
// reflectivity matched to the empty cavity on resonance, cavity arm with
// the lossy reflection coefficient, arms beating at the interferometer
// free spectral range.
struct SpectrumModel {
    double nu_fsr_ghz;         // free spectral range (GHz)
    double kappa_wg;           // rad/us
    double kappa_sc;           // rad/us
    double global_amplitude = 1.0;
    double global_phase = 0.0; // rad
};

// Quality flags attached to phase spectra. Neither is an error: sweeps
// through critical coupling and coarse sweeps are legitimate.
struct PhaseSpectrumFlags {
    bool near_critical = false;   // some |r_c| below threshold, phase ill-defined
    bool sparse_sweep = false;    // adjacent unwrapped step exceeded pi/2
};

// Amplitude reflection coefficient of the lossless atom-cavity system:
// r = ((eta-1) gamma + 2 i delta) / ((eta+1) gamma - 2 i delta).
cplx reflection_lossless(double eta, double delta, double gamma);

// Full lossy amplitudes from the microscopic rates. Throws
// std::domain_error at the non-physical pole 1 + eta_tilde = 0.
ScatteringAmplitudes scattering_amplitudes(const SystemParams& p);

// Detector fields from the two-arm construction: the cavity arm carries
// r_u or r_c (per atom_present), the reference arm reflects perfectly
// with phase phi_v, and the detection basis sits at theta_prime.
PortFields port_fields(const SystemParams& p, const InterferometerConfig& cfg,
                       bool atom_present);

// Unwrapped phase of the coupled reflection relative to the empty-cavity
// reflection, versus laser-atom detuning delta (rad/us, sorted
// ascending). The cavity detuning is taken from p.
TraceSeries phase_spectrum(const SystemParams& p, std::span<const double> deltas,
                           PhaseSpectrumFlags* flags = nullptr);

// Net winding of an unwrapped phase trace in whole turns of 2 pi,
// closing the sweep through the far-detuned limit (where both endpoints
// share the empty-cavity phase). Returns 2 pi x (number of turns).
double phase_winding(const TraceSeries& phase_trace);

// Purcell enhancement of the atomic decay rate versus cavity detuning:
// Gamma(Delta_c) = gamma [1 + eta / (1 + (2 Delta_c / kappa)^2)].
// y values are Gamma/gamma.
TraceSeries decay_enhancement(const SystemParams& p,
                              std::span<const double> delta_c_sweep);

// Empty-cavity reflection coefficient of the characterization model at
// laser offset nu (GHz) from the cavity resonance.
cplx empty_cavity_reflection(const SpectrumModel& m, double nu_ghz);

// Sum and difference of the two detector powers versus laser frequency,
// as used to characterize the interferometer and cavity.
std::pair<TraceSeries, TraceSeries> characterization_spectrum(
    const SpectrumModel& m, std::span<const double> nu_ghz);

}  // namespace qps

#endif
