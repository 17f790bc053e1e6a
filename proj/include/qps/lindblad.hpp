#ifndef QPS_LINDBLAD_HPP
#define QPS_LINDBLAD_HPP

#include <Eigen/Dense>
#include <map>
#include <span>

#include "qps/system_params.hpp"
#include "qps/trace_series.hpp"

namespace qps {

// Fock-space truncation. The steady-state solver reports the population
// of the top Fock level; truncation is considered valid below 1e-6.
struct HilbertConfig {
    int n_max = 10;
};

// Density matrix on atom (x) Fock with basis index atom*(n_max+1) + n
// (atom index slow, Fock index fast; atom 0 = ground, 1 = excited).
struct QuantumState {
    Eigen::MatrixXcd rho;

    double trace_error() const;      // |Tr(rho) - 1|
    double hermiticity_error() const;
    double min_eigenvalue() const;
    // Population of the highest Fock level, summed over atomic states.
    double top_fock_population() const;
};

// Detector-mode operator d = A b_s + w a (+ C b_v). The drive part is a
// c-number (b_s is a coherent amplitude, b_v stays in vacuum and drops
// out of normally ordered moments); the cavity part is the operator
// w a with w = +/- sqrt(kappa_wg/2).
struct PortOperator {
    cplx drive_coeff;    // A_i
    double cavity_weight; // +sqrt(kappa_wg/2) for port 1, - for port 2
    cplx vacuum_coeff;   // C_i
    cplx drive_part;     // A_i * b_s
};

enum class Port { A, D };  // d1 and d2 of the dark-port configuration

PortOperator make_port_operator(const SystemParams& p,
                                const InterferometerConfig& cfg, Port port,
                                cplx b_s);

struct SteadyStateOptions {
    double residual_tol = 1e-10;   // on ||L rho|| scaled by max|L|
    double degeneracy_tol = 1e-8;  // two-construction agreement
    int max_relax_rounds = 60;     // long-time integration fallback
};

struct G2Quality {
    bool dark_port_hazard = false;   // <d^dag d> below 1e-14
    double top_fock_population = 0.0;
};

// Generator of the driven dissipative atom-cavity dynamics,
// d rho / dt = L[rho], with collapse operators sqrt(kappa) a and
// sqrt(gamma) sigma and a coherent waveguide drive of amplitude
// drive_amplitude = <a_wg,in> (sqrt(photons/us)).
class Liouvillian {
  public:
    Liouvillian(const SystemParams& p, cplx drive_amplitude,
                const HilbertConfig& h);

    int dim() const { return dim_; }            // Hilbert-space dimension
    int superdim() const { return dim_ * dim_; }
    const Eigen::MatrixXcd& matrix() const { return L_; }

    const Eigen::MatrixXcd& annihilation() const { return a_; }
    const Eigen::MatrixXcd& atom_lowering() const { return sigma_; }
    const Eigen::MatrixXcd& atom_sz() const { return sz_; }
    const Eigen::MatrixXcd& hamiltonian() const { return H_; }

    // L[rho] as a matrix.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

    // exp(L t) acting on a state (dense scaled-and-squared exponential).
    QuantumState evolve(const QuantumState& state, double t) const;

    // Null-space steady state with unit trace. Throws
    // std::runtime_error when the residual target cannot be met or the
    // null space is degenerate.
    QuantumState steady_state(const SteadyStateOptions& opts = {}) const;

    Eigen::MatrixXcd propagator(double dt) const;

    cplx expectation(const Eigen::MatrixXcd& op, const QuantumState& s) const;

  private:
    int dim_;
    Eigen::MatrixXcd L_;
    Eigen::MatrixXcd H_;
    Eigen::MatrixXcd a_, sigma_, sz_;
};

// Same-time value g2(0) plus the port intensity <d^dag d>, computed from
// steady-state moments only (no propagation). Used to average over
// detuning disorder and as an independent route for g2(tau = 0).
struct G2Zero {
    double g2_0;
    double intensity;  // photons/us
};

// Correlation evaluator holding one Liouvillian, its steady state and a
// propagator cache, shared by both ports.
class G2Engine {
  public:
    G2Engine(const SystemParams& p, const InterferometerConfig& cfg,
             double photon_flux, const HilbertConfig& h);

    // Normalized two-time intensity correlation of the selected port via
    // the quantum regression theorem: the collapsed state
    // d rho_ss d^dag is evolved under L and read out with d^dag d.
    // taus sorted ascending, in us; the returned series is in ns.
    TraceSeries correlation(Port port, std::span<const double> taus,
                            G2Quality* quality = nullptr);
    G2Zero zero(Port port, G2Quality* quality = nullptr) const;

    const QuantumState& steady() const { return rho_ss_; }

  private:
    Eigen::MatrixXcd port_matrix(Port port) const;
    void fill_quality(double intensity, G2Quality* quality) const;

    SystemParams p_;
    InterferometerConfig cfg_;
    double b_s_;
    Liouvillian lv_;
    QuantumState rho_ss_;
    std::map<double, Eigen::MatrixXcd> propagators_;
};

// One-shot conveniences over G2Engine.
TraceSeries g2_correlation(const SystemParams& p,
                           const InterferometerConfig& cfg, double photon_flux,
                           const HilbertConfig& h, Port port,
                           std::span<const double> taus,
                           G2Quality* quality = nullptr);
G2Zero g2_zero(const SystemParams& p, const InterferometerConfig& cfg,
               double photon_flux, const HilbertConfig& h, Port port,
               G2Quality* quality = nullptr);

}  // namespace qps

#endif
