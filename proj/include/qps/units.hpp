#ifndef QPS_UNITS_HPP
#define QPS_UNITS_HPP

#include <complex>

// Canonical unit system: angular frequencies in rad/us, times in us.
// A quantity quoted as "2pi x f MHz" is stored as 2*pi*f rad/us.

namespace qps {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx ii{0.0, 1.0};

namespace units {

// "2pi x f" conveniences, all returning rad/us.
constexpr double two_pi_mhz(double f_mhz) { return 2.0 * pi * f_mhz; }
constexpr double two_pi_ghz(double f_ghz) { return 2.0 * pi * 1e3 * f_ghz; }

constexpr double to_two_pi_mhz(double w) { return w / (2.0 * pi); }
constexpr double to_two_pi_ghz(double w) { return w / (2.0 * pi * 1e3); }

// Times, returning us.
constexpr double ns(double t_ns) { return 1e-3 * t_ns; }
constexpr double to_ns(double t_us) { return 1e3 * t_us; }

}  // namespace units

}  // namespace qps

#endif
