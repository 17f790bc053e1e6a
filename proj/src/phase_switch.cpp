#include "qps/phase_switch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "qps/trace_series.hpp"

namespace qps {

double AtomDensityMatrix::trace_error() const {
    return std::abs(m.trace() - cplx(1.0, 0.0));
}

double AtomDensityMatrix::hermiticity_error() const {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double AtomDensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (m + m.adjoint()));
    return es.eigenvalues().minCoeff();
}

void ReadoutModel::validate() const {
    if (!(lambda_off >= 0.0) || !(lambda_on > lambda_off)) {
        throw std::invalid_argument("readout: need lambda_on > lambda_off >= 0");
    }
    if (threshold < 1) throw std::invalid_argument("readout: threshold must be >= 1");
}

cplx coherent_overlap(const BranchOutput& b) {
    const auto u = b.u_modes();
    const auto c = b.c_modes();
    cplx exponent = 0.0;
    for (int i = 0; i < 3; ++i) {
        exponent += -0.5 * std::norm(u[i]) - 0.5 * std::norm(c[i]) +
                    std::conj(c[i]) * u[i];
    }
    return std::exp(exponent);
}

SwitchDensities switch_densities(const SystemParams& p, cplx alpha) {
    const BranchOutput b{alpha, scattering_amplitudes(p)};
    const cplx d = coherent_overlap(b);
    const cplx r_u = b.amps.r_u;
    const cplx r_c = b.amps.r_c;

    SwitchDensities out;
    out.uncond.m << 0.5, 0.5 * d, 0.5 * std::conj(d), 0.5;

    const double n = std::norm(r_u) + std::norm(r_c);
    if (n <= 0.0) {
        throw std::domain_error(
            "switch_densities: conditioning undefined, both branches reflect nothing");
    }
    out.cond.m << std::norm(r_u) / n, d * std::conj(r_c) * r_u / n,
        std::conj(d) * std::conj(r_u) * r_c / n, std::norm(r_c) / n;
    return out;
}

double uncond_fidelity(const AtomDensityMatrix& uncond) {
    return 0.5 * std::real(uncond.m(0, 0) + uncond.m(1, 1)) +
           std::real(uncond.m(0, 1));
}

double cond_fidelity(const AtomDensityMatrix& cond) {
    return 0.5 * std::real(cond.m(0, 0) + cond.m(1, 1)) -
           std::real(cond.m(0, 1));
}

TraceSeries ramsey_fringe(const SystemParams& p, cplx alpha,
                          std::span<const double> thetas, bool conditioned) {
    if (thetas.size() < 2) throw std::invalid_argument("ramsey: need >= 2 phases");
    const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
    if (*hi - *lo < 2.0 * pi - 1e-9) {
        throw std::invalid_argument("ramsey: phases must cover one full period");
    }
    const SwitchDensities dens = switch_densities(p, alpha);
    const cplx od = (conditioned ? dens.cond : dens.uncond).off_diagonal();
    TraceSeries out("theta_rad", "P_on", conditioned ? "conditioned" : "unconditioned");
    for (double th : thetas) {
        out.push(th, 0.5 + std::imag(std::exp(ii * th) * od));
    }
    return out;
}

double fringe_phase_shift(const SystemParams& p, cplx alpha, bool conditioned) {
    const SwitchDensities dens = switch_densities(p, alpha);
    return std::arg((conditioned ? dens.cond : dens.uncond).off_diagonal());
}

double switch_success_probability(const SystemParams& p, cplx alpha,
                                  double eta_c, bool* unbalanced_flag) {
    if (eta_c < 0.0 || eta_c > 1.0) {
        throw std::invalid_argument("eta_c must be in [0, 1]");
    }
    const ScatteringAmplitudes amps = scattering_amplitudes(p);
    const double ru = std::abs(amps.r_u);
    const double rc = std::abs(amps.r_c);
    if (unbalanced_flag) {
        *unbalanced_flag = std::abs(ru - rc) > 1e-6 * std::max({ru, rc, 1e-30});
    }
    const double r2 = ru * rc;
    const SwitchDensities dens = switch_densities(p, alpha);
    const double eps = std::abs(cond_fidelity(dens.cond) - 1.0);
    return 2.0 * eps * eta_c * r2 / (1.0 + r2);
}

namespace {

double poisson_cdf_below(int threshold, double lambda) {
    // P(N < threshold)
    double p = std::exp(-lambda);
    double acc = p;
    for (int n = 1; n < threshold; ++n) {
        p *= lambda / n;
        acc += p;
    }
    return std::min(acc, 1.0);
}

double log_poisson(int count, double lambda) {
    if (lambda == 0.0) {
        return count == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return -lambda + count * std::log(lambda) - std::lgamma(count + 1.0);
}

}  // namespace

ReadoutFidelity readout_fidelity(const ReadoutModel& m) {
    m.validate();
    ReadoutFidelity f;
    f.f_on = 1.0 - poisson_cdf_below(m.threshold, m.lambda_on);
    f.f_off = poisson_cdf_below(m.threshold, m.lambda_off);
    f.f_avg = 0.5 * (f.f_on + f.f_off);
    return f;
}

PresencePosterior atom_presence_posterior(std::span<const int> counts,
                                          const ReadoutModel& m) {
    m.validate();
    PresencePosterior out;
    const int n = static_cast<int>(counts.size());
    if (n == 0) return out;
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("counts must be >= 0");
    }

    std::vector<double> lp_on(n), lp_off(n);
    for (int i = 0; i < n; ++i) {
        lp_on[i] = log_poisson(counts[i], m.lambda_on);
        lp_off[i] = log_poisson(counts[i], m.lambda_off);
    }

    out.p_individual.resize(n);
    for (int i = 0; i < n; ++i) {
        // Uniform prior between present/absent for a single measurement.
        out.p_individual[i] = 1.0 / (1.0 + std::exp(lp_off[i] - lp_on[i]));
    }

    // Change-point hypotheses: atom present for the first m measurements,
    // m = 0..n, uniform prior (m = n means it never escaped).
    std::vector<double> pre_on(n + 1, 0.0), pre_off(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        pre_on[i + 1] = pre_on[i] + lp_on[i];
        pre_off[i + 1] = pre_off[i] + lp_off[i];
    }
    std::vector<double> loglik(n + 1);
    double max_ll = -std::numeric_limits<double>::infinity();
    for (int mm = 0; mm <= n; ++mm) {
        loglik[mm] = pre_on[mm] + (pre_off[n] - pre_off[mm]);
        max_ll = std::max(max_ll, loglik[mm]);
    }
    std::vector<double> post(n + 1);
    double norm = 0.0;
    for (int mm = 0; mm <= n; ++mm) {
        post[mm] = std::exp(loglik[mm] - max_ll);
        norm += post[mm];
    }
    for (auto& v : post) v /= norm;

    // P(atom present at measurement i) = P(m >= i + 1), a suffix sum, so
    // the sequence is non-increasing by construction.
    out.p_changepoint.resize(n);
    double suffix = 0.0;
    for (int i = n; i >= 1; --i) {
        suffix += post[i];
        out.p_changepoint[i - 1] = std::min(suffix, 1.0);
    }
    return out;
}

void write_posterior_csv(std::ostream& out, std::span<const int> counts,
                         const PresencePosterior& posterior) {
    if (counts.size() != posterior.p_individual.size() ||
        counts.size() != posterior.p_changepoint.size()) {
        throw std::invalid_argument("posterior csv: size mismatch");
    }
    out << "index,counts,p_individual,p_changepoint\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << i << ',' << counts[i] << ',' << format_double(posterior.p_individual[i])
            << ',' << format_double(posterior.p_changepoint[i]) << '\n';
    }
}

}  // namespace qps
