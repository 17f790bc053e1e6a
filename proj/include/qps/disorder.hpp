#ifndef QPS_DISORDER_HPP
#define QPS_DISORDER_HPP

#include <functional>
#include <vector>

#include "qps/trace_series.hpp"

namespace qps {

// Gaussian spread of atomic detunings induced by trap light shifts.
// sigma_delta in rad/us; n_nodes odd so the resonant center is a node.
// 161 nodes hold Gauss-Hermite truncation below ~5e-5 for the
// Lorentzian-like integrands of this system (whose width can sit well
// under sigma_delta); lighter rules are fine for smooth integrands.
struct DetuningDistribution {
    double sigma_delta = 0.0;
    int n_nodes = 161;
};

// Gauss-Hermite rule rescaled to weight exp(-d^2/(2 sigma^2)) with
// normalized weights (sum = 1).
struct QuadratureRule {
    std::vector<double> nodes;    // detunings, rad/us
    std::vector<double> weights;  // sum to 1
};

QuadratureRule gauss_hermite(const DetuningDistribution& dist);

// <f(delta)> over the detuning distribution. Exact for polynomial f up
// to degree 2 n_nodes - 1; sigma_delta = 0 returns f(0).
double average_intensity(const std::function<double(double)>& f,
                         const DetuningDistribution& dist);

// Disorder-averaged correlation trace. Coincidence rates average with
// weight I^2 and singles with weight I (the detuning fluctuates fast
// compared to the accumulation window but slow compared to the emitter
// dynamics), so the result is <I^2 g2> / <I>^2 pointwise in tau.
// All node traces must share one tau grid. Sets the optional flag when
// <I> falls below 1e-14.
TraceSeries average_g2(const std::function<TraceSeries(double)>& g2_fn,
                       const std::function<double(double)>& i_fn,
                       const DetuningDistribution& dist,
                       bool* low_intensity_warn = nullptr);

}  // namespace qps

#endif
