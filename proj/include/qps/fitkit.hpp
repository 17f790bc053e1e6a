#ifndef QPS_FITKIT_HPP
#define QPS_FITKIT_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace qps {

struct FitResult {
    std::vector<double> params;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;  // sqrt(sum of squared weighted residuals)
    bool converged = false;
    int n_iterations = 0;
    bool degenerate = false;  // model insensitive to data (flat trace, V ~ 0)
    bool ambiguous = false;   // multi-start minima disagree beyond 1 sigma

    double sigma(int i) const { return std::sqrt(covariance(i, i)); }
};

struct LMOptions {
    int max_iterations = 300;
    double ftol = 1e-14;   // relative cost decrease
    double xtol = 1e-12;   // relative step size
    double diff_step = 1e-6;  // relative central-difference step
};

// Levenberg-Marquardt on a vector-valued residual function. Residuals
// are expected pre-weighted (r_i = (y_i - f_i)/sigma_i); the covariance
// is (J^T J)^-1, rescaled by the reduced chi^2 when unweighted = true.
FitResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    const Eigen::VectorXd& x0, bool unweighted, const LMOptions& opts = {});

// y = A exp(-t/tau) + B on points with t >= window_start, weighted by
// sqrt(max(y,1)) (Poisson counting). Params: (A, tau, B).
FitResult fit_exponential(std::span<const double> ts, std::span<const double> ys,
                          double window_start);

// y = C + V cos(x - phi). Params: (C, V, phi). xs must span at least one
// period (2 pi). Initialized by the exact linear solve in
// (C, V cos phi, V sin phi), then polished. V ~ 0 marks the fit
// degenerate with the phase undefined.
FitResult fit_sinusoid(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> sigmas = {});

// Joint fit of the interferometer characterization traces (sum and
// difference of the detector powers) over
// (nu_fsr_ghz, kappa_wg_2pi_ghz, kappa_sc_2pi_ghz, global_phase,
//  global_amplitude). Multi-start (>= 8 starts); disagreeing minima of
// equal quality set the ambiguous flag.
FitResult fit_spectrum(std::span<const double> nus_ghz,
                       std::span<const double> sum_ys,
                       std::span<const double> diff_ys);

}  // namespace qps

#endif
