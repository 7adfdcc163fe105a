#include "gridlock/small_signal.hpp"

#include <algorithm>
#include <cmath>

#include "gridlock/errors.hpp"

namespace gridlock {

namespace {

Complex polyval(const std::vector<double>& coeffs, Complex s) {
    Complex acc{0.0, 0.0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

void check_gains(double k, double d) {
    if (!(k > 0.0) || !(d > 0.0)) {
        throw ConfigError("transfer function: gains must be > 0");
    }
}

} // namespace

Complex RationalTf::eval(Complex s) const { return polyval(num, s) / polyval(den, s); }

RationalTf build_tf(TfKind kind, double k, double d) {
    check_gains(k, d);
    const double kd = k * d;
    switch (kind) {
    case TfKind::ConvOmega:
        return {{kd}, {kd, k, 1.0}};
    case TfKind::ConvTheta:
        return {{kd, k}, {kd, k, 1.0}};
    case TfKind::SrfOmega:
    case TfKind::SrfThetaHat:
        return {{d}, {d, 1.0}};
    case TfKind::SrfOmegaB:
        return {{kd}, {kd, k + d, 1.0}};
    case TfKind::SrfThetaE:
        return {{0.0, k}, {kd, k + d, 1.0}};
    case TfKind::SrfThetaEst:
        return {{kd, k + d}, {kd, k + d, 1.0}};
    }
    throw ConfigError("transfer function: unknown kind");
}

RationalTf open_loop_gain(double k, double d, bool with_selected_g) {
    check_gains(k, d);
    if (with_selected_g) {
        // The k/(s+k) and s/(s+k) branches sum to 1, leaving a bare integrator.
        return {{d}, {0.0, 1.0}};
    }
    return {{k * d}, {0.0, k, 1.0}};
}

SecondOrderChar characteristic(const RationalTf& tf) {
    const int order = tf.order();
    if (order != 1 && order != 2) {
        throw ConfigError("characteristic: only order 1 and 2 supported");
    }

    SecondOrderChar result;
    if (order == 1) {
        result.poles = {Complex{-tf.den[0] / tf.den[1], 0.0}};
        return result;
    }

    const double a0 = tf.den[0];
    const double a1 = tf.den[1];
    const double a2 = tf.den[2];
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    // Repeated-root detection must be robust at the advertised k = d design
    // point, where the discriminant cancels exactly.
    const double disc_tol = 1e-9 * std::max(a1 * a1, std::abs(4.0 * a2 * a0));
    if (std::abs(disc) < disc_tol) {
        const double p = -a1 / (2.0 * a2);
        result.poles = {Complex{p, 0.0}, Complex{p, 0.0}};
    } else if (disc > 0.0) {
        const double root = std::sqrt(disc);
        // Numerically stable split: compute the larger-magnitude root first.
        const double q = -0.5 * (a1 + std::copysign(root, a1));
        result.poles = {Complex{q / a2, 0.0}, Complex{a0 / q, 0.0}};
    } else {
        const double re = -a1 / (2.0 * a2);
        const double im = std::sqrt(-disc) / (2.0 * a2);
        result.poles = {Complex{re, im}, Complex{re, -im}};
    }
    result.omega_n = std::sqrt(a0 / a2);
    result.zeta = a1 / (2.0 * std::sqrt(a0 * a2));
    return result;
}

std::vector<double> bode_magnitude(const RationalTf& tf, const std::vector<double>& omegas) {
    std::vector<double> mags;
    mags.reserve(omegas.size());
    for (double w : omegas) {
        if (!(w > 0.0)) {
            throw ConfigError("bode: frequencies must be > 0");
        }
        mags.push_back(std::abs(tf.eval(Complex{0.0, w})));
    }
    return mags;
}

std::vector<double> step_response(const RationalTf& tf, const std::vector<double>& times) {
    const int order = tf.order();
    if (order != 1 && order != 2) {
        throw ConfigError("step_response: only order 1 and 2 supported");
    }
    const SecondOrderChar ch = characteristic(tf);
    for (const Complex& p : ch.poles) {
        if (!(p.real() < 0.0)) {
            throw ConfigError("step_response: poles must have negative real parts");
        }
    }

    const double dc = tf.dc_gain();
    std::vector<double> values;
    values.reserve(times.size());

    if (order == 1) {
        // Y(s) = H(s)/s = dc/s + B/(s-p)
        const Complex p = ch.poles[0];
        const Complex b = polyval(tf.num, p) / (tf.den[1] * p);
        for (double t : times) {
            values.push_back(dc + (b * std::exp(p * t)).real());
        }
        return values;
    }

    const double a2 = tf.den[2];
    const Complex p1 = ch.poles[0];
    const Complex p2 = ch.poles[1];

    if (p1 == p2) {
        // Y(s) = dc/s + B/(s-p) + C/(s-p)^2
        const Complex p = p1;
        const Complex c = polyval(tf.num, p) / (a2 * p);
        Complex dnum{0.0, 0.0}; // d/ds num(s) at p
        for (std::size_t i = 1; i < tf.num.size(); ++i) {
            dnum += static_cast<double>(i) * tf.num[i] * std::pow(p, static_cast<double>(i - 1));
        }
        const Complex b = dnum / (a2 * p) - polyval(tf.num, p) / (a2 * p * p);
        for (double t : times) {
            values.push_back(((b + c * t) * std::exp(p * t)).real() + dc);
        }
        return values;
    }

    // Distinct poles (real pair or complex-conjugate pair):
    // Y(s) = dc/s + B1/(s-p1) + B2/(s-p2)
    const Complex b1 = polyval(tf.num, p1) / (a2 * p1 * (p1 - p2));
    const Complex b2 = polyval(tf.num, p2) / (a2 * p2 * (p2 - p1));
    for (double t : times) {
        const Complex y = b1 * std::exp(p1 * t) + b2 * std::exp(p2 * t);
        values.push_back(dc + y.real());
    }
    return values;
}

Complex steady_state_aux(double k, double omega_e, double v) {
    if (!(k > 0.0) || !(v > 0.0)) {
        throw ConfigError("steady_state_aux: k and V must be > 0");
    }
    const double denom = k * k + omega_e * omega_e;
    return Complex{k * k / denom, k * omega_e / denom} * (v * v);
}

double overshoot_percent(double zeta) {
    if (!(zeta > 0.0)) {
        throw ConfigError("overshoot_percent: zeta must be > 0");
    }
    if (zeta >= 1.0) {
        return 0.0;
    }
    return 100.0 * std::exp(-kPi * zeta / std::sqrt(1.0 - zeta * zeta));
}

std::vector<double> log_spaced(double omega_min, double omega_max, std::size_t points) {
    if (!(omega_min > 0.0) || !(omega_max > omega_min) || points < 2) {
        throw ConfigError("log_spaced: need 0 < min < max and at least 2 points");
    }
    std::vector<double> grid;
    grid.reserve(points);
    const double log_min = std::log10(omega_min);
    const double step = (std::log10(omega_max) - log_min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid.push_back(std::pow(10.0, log_min + step * static_cast<double>(i)));
    }
    grid.back() = omega_max;
    return grid;
}

} // namespace gridlock
