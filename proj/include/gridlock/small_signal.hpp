#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "gridlock/signal.hpp"

namespace gridlock {

/// Rational function in the Laplace variable. Coefficients are stored in
/// ascending powers of s; den.back() is nonzero and deg(num) <= deg(den) <= 2.
struct RationalTf {
    std::vector<double> num;
    std::vector<double> den;

    int order() const { return static_cast<int>(den.size()) - 1; }
    Complex eval(Complex s) const;
    double dc_gain() const { return num.front() / den.front(); }
};

enum class TfKind {
    ConvOmega,   // kd / (s^2 + k s + kd)
    ConvTheta,   // (k s + kd) / (s^2 + k s + kd)
    SrfOmega,    // d / (s + d)
    SrfOmegaB,   // kd / (s^2 + (k+d) s + kd)
    SrfThetaHat, // d / (s + d)
    SrfThetaE,   // k s / ((s+k)(s+d))
    SrfThetaEst, // ((k+d) s + kd) / (s^2 + (k+d) s + kd)
};

/// Closed-loop models of both estimators' frequency and phase channels.
RationalTf build_tf(TfKind kind, double k, double d);

/// Open-loop gain of the frequency loop: (d/s) * k/(s+k) without the
/// selected loop filter, and exactly d/s with it (the two branches sum to 1).
RationalTf open_loop_gain(double k, double d, bool with_selected_g);

struct SecondOrderChar {
    std::vector<Complex> poles;
    std::optional<double> zeta;    // order 2 only
    std::optional<double> omega_n; // order 2 only
};

/// Closed-form root extraction for order 1 and 2 denominators. For order 2
/// (monic a2 s^2 + a1 s + a0): zeta = a1 / (2 sqrt(a0 a2)), wn = sqrt(a0/a2).
SecondOrderChar characteristic(const RationalTf& tf);

/// |num(jw)/den(jw)| per frequency. All omegas must be > 0.
std::vector<double> bode_magnitude(const RationalTf& tf, const std::vector<double>& omegas);

/// Unit-step response by partial fractions, with branches for distinct real,
/// repeated real, and complex-conjugate pole pairs. Rejects unstable or
/// marginal poles. Independent of any time-stepping simulator by design.
std::vector<double> step_response(const RationalTf& tf, const std::vector<double>& times);

/// Steady-state auxiliary variable of the frozen dq low-pass stage under a
/// constant frequency error: ((k^2 + j k w_e) / (k^2 + w_e^2)) * V^2.
Complex steady_state_aux(double k, double omega_e, double v);

/// Percent overshoot of a second-order step response; 0 when zeta >= 1.
double overshoot_percent(double zeta);

/// Log-spaced frequency grid, inclusive of both endpoints.
std::vector<double> log_spaced(double omega_min, double omega_max, std::size_t points);

} // namespace gridlock
