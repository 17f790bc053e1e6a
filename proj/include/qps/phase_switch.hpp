#ifndef QPS_PHASE_SWITCH_HPP
#define QPS_PHASE_SWITCH_HPP

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "qps/linres.hpp"
#include "qps/system_params.hpp"
#include "qps/trace_series.hpp"

namespace qps {

// Output coherent amplitudes of the three scattering modes for each
// atomic branch, for input amplitude alpha in the waveguide.
struct BranchOutput {
    cplx alpha;
    ScatteringAmplitudes amps;

    std::array<cplx, 3> u_modes() const {
        return {amps.r_u * alpha, amps.t_u * alpha, amps.l_u * alpha};
    }
    std::array<cplx, 3> c_modes() const {
        return {amps.r_c * alpha, amps.t_c * alpha, amps.l_c * alpha};
    }
};

// 2x2 atomic density matrix in the {u, c} basis (index 0 = u).
struct AtomDensityMatrix {
    Eigen::Matrix2cd m;

    double trace_error() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    cplx off_diagonal() const { return m(0, 1); }  // u,c element
};

// Poisson readout statistics: counts >= threshold are assigned to an
// atom present in the coupled manifold ("n > 1" means threshold = 2).
struct ReadoutModel {
    double lambda_on;   // mean detected photons, coupled atom
    double lambda_off;  // mean detected photons, no coupled atom
    int threshold = 2;

    void validate() const;
};

// Overlap D = <c-branch output | u-branch output> of the multimode
// coherent outputs; |D| <= 1 with equality for identical branches.
cplx coherent_overlap(const BranchOutput& b);

struct SwitchDensities {
    AtomDensityMatrix uncond;
    AtomDensityMatrix cond;  // conditioned on >= 1 photon in the waveguide
};

// Atomic reduced density matrices after scattering a coherent gate field
// of amplitude alpha off the atom prepared in (|u> + |c>)/sqrt(2).
// Throws std::domain_error when conditioning is undefined
// (|r_u|^2 + |r_c|^2 = 0).
SwitchDensities switch_densities(const SystemParams& p, cplx alpha);

// Fidelities of the phase switch: P_uncond = <+|rho|+> without
// conditioning, P_cond = <-|rho_cond|-> with conditioning.
double uncond_fidelity(const AtomDensityMatrix& uncond);
double cond_fidelity(const AtomDensityMatrix& cond);

// Ramsey fringe P_on(theta) = <c| R(theta) rho R(theta)^dag |c> with
// R(theta) the pi/2 rotation about the equatorial axis at angle theta.
// Analytically P_on = 1/2 + |rho_uc| sin(theta + arg rho_uc).
TraceSeries ramsey_fringe(const SystemParams& p, cplx alpha,
                          std::span<const double> thetas, bool conditioned);

// Fringe phase shift relative to the no-gate fringe: arg of the
// (u,c) off-diagonal element.
double fringe_phase_shift(const SystemParams& p, cplx alpha, bool conditioned);

// Success probability of flipping the switch,
// P = 2 epsilon eta_c r^2 / (1 + r^2) with epsilon = |P_cond - 1|, valid
// for the balanced configuration r_u = -r_c = r. The optional flag is
// set when |r_u| and |r_c| differ by more than 1e-6 relative (the
// formula then does not apply).
double switch_success_probability(const SystemParams& p, cplx alpha,
                                  double eta_c,
                                  bool* unbalanced_flag = nullptr);

struct ReadoutFidelity {
    double f_on;   // P(N >= threshold | lambda_on)
    double f_off;  // P(N < threshold | lambda_off)
    double f_avg;
};

ReadoutFidelity readout_fidelity(const ReadoutModel& m);

// Per-measurement and change-point posteriors for atom presence from a
// sequence of readout counts. p_changepoint[i] is the posterior
// probability that the (once-and-for-all) escape happened after
// measurement i, under a uniform prior over escape times including
// "never escaped"; it is non-increasing in i.
struct PresencePosterior {
    std::vector<double> p_individual;
    std::vector<double> p_changepoint;
};

PresencePosterior atom_presence_posterior(std::span<const int> counts,
                                          const ReadoutModel& m);

// CSV export of a readout record: columns
// index,counts,p_individual,p_changepoint.
void write_posterior_csv(std::ostream& out, std::span<const int> counts,
                         const PresencePosterior& posterior);

}  // namespace qps

#endif
