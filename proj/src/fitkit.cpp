#include "qps/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qps/linres.hpp"

namespace qps {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd sanitized(VectorXd r) {
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r(i))) r(i) = 1e150;
    }
    return r;
}

MatrixXd jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                  const VectorXd& x, Eigen::Index m, double rel_step) {
    MatrixXd j(m, x.size());
    for (Eigen::Index col = 0; col < x.size(); ++col) {
        const double h = rel_step * std::max(std::abs(x(col)), 1.0);
        VectorXd xp = x, xm = x;
        xp(col) += h;
        xm(col) -= h;
        j.col(col) = (sanitized(f(xp)) - sanitized(f(xm))) / (2.0 * h);
    }
    return j;
}

}  // namespace

FitResult levenberg_marquardt(
    const std::function<VectorXd(const VectorXd&)>& residuals,
    const VectorXd& x0, bool unweighted, const LMOptions& opts) {
    VectorXd x = x0;
    VectorXd r = sanitized(residuals(x));
    const Eigen::Index m = r.size();
    const Eigen::Index np = x.size();
    if (m < np) throw std::invalid_argument("fit: fewer points than parameters");

    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    MatrixXd j;

    for (; iter < opts.max_iterations && !converged; ++iter) {
        j = jacobian(residuals, x, m, opts.diff_step);
        const MatrixXd jtj = j.transpose() * j;
        const VectorXd g = j.transpose() * r;

        bool stepped = false;
        for (int tries = 0; tries < 30; ++tries) {
            MatrixXd damped = jtj;
            for (Eigen::Index d = 0; d < np; ++d) {
                damped(d, d) += lambda * std::max(jtj(d, d), 1e-30);
            }
            const VectorXd delta = damped.ldlt().solve(-g);
            const VectorXd x_new = x + delta;
            const VectorXd r_new = sanitized(residuals(x_new));
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                const double drop = cost - cost_new;
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (drop <= opts.ftol * std::max(cost, 1e-300) ||
                    delta.norm() <= opts.xtol * (x.norm() + opts.xtol)) {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
        if (!stepped) {
            // No downhill step left at any damping: stationary point.
            converged = true;
        }
    }

    FitResult out;
    out.params.assign(x.data(), x.data() + np);
    out.residual_norm = std::sqrt(cost);
    out.converged = converged;
    out.n_iterations = iter;

    j = jacobian(residuals, x, m, opts.diff_step);
    MatrixXd jtj = j.transpose() * j;
    MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
    if (unweighted && m > np) {
        cov *= cost / double(m - np);
    }
    out.covariance = cov;
    return out;
}

FitResult fit_exponential(std::span<const double> ts, std::span<const double> ys,
                          double window_start) {
    if (ts.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
    std::vector<double> t, y, sig;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] >= window_start) {
            t.push_back(ts[i]);
            y.push_back(ys[i]);
            sig.push_back(std::sqrt(std::max(ys[i], 1.0)));
        }
    }
    if (t.size() < 4) {
        throw std::invalid_argument("fit_exponential: need >= 4 points after window");
    }

    const double y_lo = *std::min_element(y.begin(), y.end());
    const double b0 = y_lo;
    const double span = t.back() - t.front();
    double tau0 = span / 3.0;
    // Refine from the point where the excess drops by 1/e.
    const double target = (y.front() - b0) / std::exp(1.0) + b0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (y[i] <= target) {
            tau0 = std::max(t[i] - t.front(), span * 1e-3);
            break;
        }
    }
    const double a0 = (y.front() - b0) * std::exp(t.front() / tau0);

    auto resid = [&](const VectorXd& x) {
        VectorXd r(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double model = x(0) * std::exp(-t[i] / x(1)) + x(2);
            r(i) = (model - y[i]) / sig[i];
        }
        return r;
    };
    VectorXd x0(3);
    x0 << a0, tau0, b0;
    FitResult fit = levenberg_marquardt(resid, x0, /*unweighted=*/false);

    // Reweight once with model-based counting errors; weights taken from
    // the noisy data themselves bias the fit and its covariance.
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double model =
            fit.params[0] * std::exp(-t[i] / fit.params[1]) + fit.params[2];
        sig[i] = std::sqrt(std::max(model, 1.0));
    }
    VectorXd x1(3);
    x1 << fit.params[0], fit.params[1], fit.params[2];
    return levenberg_marquardt(resid, x1, /*unweighted=*/false);
}

FitResult fit_sinusoid(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> sigmas) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
    if (!sigmas.empty() && sigmas.size() != xs.size()) {
        throw std::invalid_argument("fit: sigma size mismatch");
    }
    if (xs.size() < 4) throw std::invalid_argument("fit_sinusoid: need >= 4 points");
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*hi - *lo < 2.0 * pi - 1e-9) {
        throw std::invalid_argument("fit_sinusoid: xs must span one period");
    }

    // Exact linear solve in (C, V cos phi, V sin phi).
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = sigmas.empty() ? 1.0 : 1.0 / (sigmas[i] * sigmas[i]);
        const Eigen::Vector3d row(1.0, std::cos(xs[i]), std::sin(xs[i]));
        ata += w * row * row.transpose();
        atb += w * row * ys[i];
    }
    const Eigen::Vector3d lin = ata.ldlt().solve(atb);
    const double v0 = std::hypot(lin(1), lin(2));
    const double phi0 = std::atan2(lin(2), lin(1));

    auto resid = [&](const VectorXd& x) {
        VectorXd r(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double model = x(0) + x(1) * std::cos(xs[i] - x(2));
            const double s = sigmas.empty() ? 1.0 : sigmas[i];
            r(i) = (model - ys[i]) / s;
        }
        return r;
    };
    VectorXd x0(3);
    x0 << lin(0), v0, phi0;
    FitResult out = levenberg_marquardt(resid, x0, sigmas.empty());
    if (std::abs(out.params[1]) < 1e-12 * std::max(std::abs(out.params[0]), 1.0)) {
        out.degenerate = true;  // phase undefined
    }
    return out;
}

namespace {

struct SpectrumData {
    std::span<const double> nus;
    std::span<const double> sum_ys;
    std::span<const double> diff_ys;
};

VectorXd spectrum_residuals(const SpectrumData& d, const VectorXd& x) {
    SpectrumModel m;
    m.nu_fsr_ghz = x(0);
    m.kappa_wg = units::two_pi_ghz(x(1));
    m.kappa_sc = units::two_pi_ghz(x(2));
    m.global_phase = x(3);
    m.global_amplitude = x(4);
    VectorXd r(2 * d.nus.size());
    if (m.nu_fsr_ghz <= 0.0 || x(1) <= 0.0) {
        r.setConstant(1e150);
        return r;
    }
    const auto [sum, diff] = characterization_spectrum(m, d.nus);
    for (std::size_t i = 0; i < d.nus.size(); ++i) {
        r(i) = sum.y[i] - d.sum_ys[i];
        r(d.nus.size() + i) = diff.y[i] - d.diff_ys[i];
    }
    return r;
}

}  // namespace

FitResult fit_spectrum(std::span<const double> nus_ghz,
                       std::span<const double> sum_ys,
                       std::span<const double> diff_ys) {
    const std::size_t n = nus_ghz.size();
    if (sum_ys.size() != n || diff_ys.size() != n) {
        throw std::invalid_argument("fit: size mismatch");
    }
    if (n < 16) throw std::invalid_argument("fit_spectrum: too few points");
    const auto [nu_lo, nu_hi] =
        std::minmax_element(nus_ghz.begin(), nus_ghz.end());
    if (!(*nu_lo < 0.0 && *nu_hi > 0.0)) {
        throw std::invalid_argument("fit_spectrum: span must cover the resonance");
    }
    SpectrumData data{nus_ghz, sum_ys, diff_ys};

    const double sum_max = *std::max_element(sum_ys.begin(), sum_ys.end());
    const double sum_min = *std::min_element(sum_ys.begin(), sum_ys.end());
    const bool flat_sum = (sum_max - sum_min) < 1e-9 * std::max(std::abs(sum_max), 1e-300);

    // Dip width at half depth estimates kappa; the dip floor fixes
    // |1-2k| up to the over/under-coupled sign, resolved by multi-start.
    double kappa_ghz = 0.2 * (*nu_hi - *nu_lo);
    if (!flat_sum) {
        const double half = 0.5 * (sum_max + sum_min);
        double w_lo = 0.0, w_hi = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if ((sum_ys[i] - half) * (sum_ys[i + 1] - half) <= 0.0) {
                if (w_lo == 0.0 && nus_ghz[i] < 0) w_lo = nus_ghz[i];
                if (nus_ghz[i] > 0) { w_hi = nus_ghz[i]; break; }
            }
        }
        if (w_hi > w_lo && w_lo < 0.0) kappa_ghz = w_hi - w_lo;
    }
    // FSR guess from zero crossings of the oscillating difference trace.
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if ((diff_ys[i] >= 0) != (diff_ys[i + 1] >= 0)) ++crossings;
    }
    const double fsr0 =
        crossings > 1 ? 2.0 * (*nu_hi - *nu_lo) / crossings : 0.5 * (*nu_hi - *nu_lo);

    const double depth = flat_sum ? 0.0 : std::max(sum_min, 0.0) / sum_max;
    const double rv0 = std::sqrt(std::max(2.0 * depth / (1.0 + depth), 0.0));
    std::vector<double> k_guesses = {0.5 * (1.0 + rv0), 0.5 * (1.0 - rv0)};

    FitResult best;
    bool have_best = false;
    std::vector<FitResult> finished;
    for (double k0 : k_guesses) {
        k0 = std::clamp(k0, 0.05, 0.98);
        for (int ip = 0; ip < 8; ++ip) {
            VectorXd x0(5);
            x0 << fsr0, std::max(k0 * kappa_ghz, 1e-3),
                std::max((1.0 - k0) * kappa_ghz, 1e-3), ip * pi / 4.0,
                std::max(sum_max, 1e-12);
            FitResult r = levenberg_marquardt(
                [&](const VectorXd& x) { return spectrum_residuals(data, x); },
                x0, /*unweighted=*/true);
            if (!r.converged) continue;
            r.params[3] = std::remainder(r.params[3], 2.0 * pi);
            finished.push_back(r);
            if (!have_best || r.residual_norm < best.residual_norm) {
                best = r;
                have_best = true;
            }
        }
    }
    if (!have_best) {
        FitResult r;
        r.converged = false;
        r.degenerate = flat_sum;
        return r;
    }

    // Equal-quality minima disagreeing beyond 1 sigma mark the fit
    // ambiguous.
    for (const auto& r : finished) {
        if (r.residual_norm > best.residual_norm * (1.0 + 1e-3) + 1e-12) continue;
        for (int ip = 0; ip < 3; ++ip) {  // physical params only
            const double s = std::max(best.sigma(ip), 1e-12);
            if (std::abs(r.params[ip] - best.params[ip]) > s) {
                best.ambiguous = true;
            }
        }
    }
    best.degenerate = flat_sum;
    if (*nu_hi - *nu_lo < 2.0 * best.params[0]) best.ambiguous = true;
    return best;
}

}  // namespace qps
