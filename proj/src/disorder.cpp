#include "qps/disorder.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace qps {

namespace {

void validate(const DetuningDistribution& dist) {
    if (dist.sigma_delta < 0.0) {
        throw std::invalid_argument("sigma_delta must be >= 0");
    }
    if (dist.n_nodes < 3 || dist.n_nodes % 2 == 0) {
        throw std::invalid_argument("n_nodes must be odd and >= 3");
    }
}

}  // namespace

QuadratureRule gauss_hermite(const DetuningDistribution& dist) {
    validate(dist);
    const int n = dist.n_nodes;
    // Golub-Welsch on the Hermite Jacobi matrix (weight exp(-x^2)):
    // zero diagonal, off-diagonal sqrt(i/2).
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(0.5 * i);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double scale = std::sqrt(2.0) * dist.sigma_delta;
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = scale * es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;  // already sums to 1
    }
    return rule;
}

double average_intensity(const std::function<double(double)>& f,
                         const DetuningDistribution& dist) {
    validate(dist);
    if (dist.sigma_delta == 0.0) return f(0.0);
    const QuadratureRule rule = gauss_hermite(dist);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double fv = f(rule.nodes[i]);
        if (!std::isfinite(fv)) {
            throw std::runtime_error("average_intensity: integrand not finite");
        }
        acc += rule.weights[i] * fv;
    }
    return acc;
}

TraceSeries average_g2(const std::function<TraceSeries(double)>& g2_fn,
                       const std::function<double(double)>& i_fn,
                       const DetuningDistribution& dist,
                       bool* low_intensity_warn) {
    validate(dist);
    if (dist.sigma_delta == 0.0) {
        if (low_intensity_warn) *low_intensity_warn = i_fn(0.0) < 1e-14;
        return g2_fn(0.0);
    }
    const QuadratureRule rule = gauss_hermite(dist);

    TraceSeries acc;
    double mean_i = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double delta = rule.nodes[i];
        const double w = rule.weights[i];
        const double inten = i_fn(delta);
        const TraceSeries g2 = g2_fn(delta);
        if (first) {
            acc = g2;
            acc.tag += "_disorder";
            for (auto& y : acc.y) y = 0.0;
            first = false;
        }
        if (g2.size() != acc.size()) {
            throw std::invalid_argument("average_g2: tau grids differ across nodes");
        }
        for (std::size_t t = 0; t < acc.size(); ++t) {
            if (g2.x[t] != acc.x[t]) {
                throw std::invalid_argument("average_g2: tau grids differ across nodes");
            }
            // Coincidences carry I^2, singles carry I.
            acc.y[t] += w * inten * inten * g2.y[t];
        }
        mean_i += w * inten;
    }
    if (low_intensity_warn) *low_intensity_warn = mean_i < 1e-14;
    const double norm = mean_i * mean_i;
    for (auto& y : acc.y) y /= norm;
    return acc;
}

}  // namespace qps
