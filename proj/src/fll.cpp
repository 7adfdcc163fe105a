#include "gridlock/fll.hpp"

#include <cmath>

#include "gridlock/errors.hpp"

namespace gridlock {

void FllGains::validate() const {
    if (!(k > 0.0) || !is_finite(k)) {
        throw ConfigError("gains: k must be > 0");
    }
    if (!(d > 0.0) || !is_finite(d)) {
        throw ConfigError("gains: d must be > 0");
    }
    if (!(v_nom > 0.0) || !is_finite(v_nom)) {
        throw ConfigError("gains: v_nom must be > 0");
    }
    if (!is_finite(theta0_hat)) {
        throw ConfigError("gains: theta0_hat must be finite");
    }
}

bool all_finite(const FllOutputs& out) {
    return is_finite(out.omega_hat) && is_finite(out.omega_b) && is_finite(out.theta_hat) &&
           is_finite(out.u_dq) && is_finite(out.u_hat_dq) && is_finite(out.x_a) &&
           is_finite(out.e_q) && is_finite(out.theta_e_hat) && is_finite(out.theta_est) &&
           is_finite(out.u_dq_est);
}

std::optional<PhaseOutputs> phase_outputs(const SrfFllState& state, Complex u_ab, double eps_mag) {
    if (std::abs(state.u_hat_dq) <= eps_mag) {
        return std::nullopt;
    }
    PhaseOutputs out;
    out.theta_e_hat = wrap_angle(std::atan2(state.u_hat_dq.imag(), state.u_hat_dq.real()));
    out.theta_est = wrap_angle(state.theta_hat + out.theta_e_hat);
    out.u_dq_est = park_transform(u_ab, out.theta_est);
    return out;
}

FllEstimator::FllEstimator(const FllGains& gains) : gains_(gains) {
    gains_.validate();
    eps_mag_ = 1e-6 * gains_.v_nom;
    last_theta_e_ = 0.0;
}

void FllEstimator::check_ts(double ts, double fastest_gain) const {
    if (!(ts > 0.0) || !(ts * fastest_gain < 0.5)) {
        throw ConfigError("step: need ts > 0 and ts * gain < 0.5 for explicit integration");
    }
}

namespace {

// Fills the phase-reconstruction columns; holds the previous theta_e while
// |u_hat_dq| is below the start-up guard.
void fill_phase_columns(FllOutputs& out, const SrfFllState& dq_view, Complex u_ab, double eps_mag,
                        double& last_theta_e) {
    if (auto phase = phase_outputs(dq_view, u_ab, eps_mag)) {
        out.theta_e_hat = phase->theta_e_hat;
        out.theta_est = phase->theta_est;
        out.u_dq_est = phase->u_dq_est;
        last_theta_e = phase->theta_e_hat;
    } else {
        out.theta_e_hat = last_theta_e;
        out.theta_est = wrap_angle(dq_view.theta_hat + last_theta_e);
        out.u_dq_est = park_transform(u_ab, out.theta_est);
    }
}

} // namespace

ConventionalFll::ConventionalFll(const FllGains& gains) : FllEstimator(gains) { reset(); }

void ConventionalFll::reset() {
    state_ = ConvFllState{};
    state_.omega_hat = kNominalOmega;
    state_.theta_hat = wrap_angle(gains_.theta0_hat);
    last_theta_e_ = 0.0;
}

FllOutputs ConventionalFll::step(Complex u_ab, double ts) {
    check_ts(ts, gains_.k);
    if (!is_finite(u_ab)) {
        throw DivergenceError("conventional: non-finite input");
    }

    const Complex x_a = aux_variable(u_ab, state_.u_hat_ab); // frame-invariant
    const double omega = state_.omega_hat;

    FllOutputs out;
    out.omega_hat = omega;
    out.omega_b = omega;
    out.theta_hat = state_.theta_hat;
    out.u_dq = park_transform(u_ab, state_.theta_hat);
    out.u_hat_dq = park_transform(state_.u_hat_ab, state_.theta_hat);
    out.x_a = x_a;
    out.e_q = out.u_dq.imag() - out.u_hat_dq.imag();

    SrfFllState dq_view{out.u_hat_dq, omega, state_.theta_hat};
    fill_phase_columns(out, dq_view, u_ab, eps_mag_, last_theta_e_);

    const Complex du = Complex{0.0, omega} * state_.u_hat_ab + gains_.k * (u_ab - state_.u_hat_ab);
    state_.u_hat_ab += ts * du;
    state_.omega_hat += ts * gains_.big_d() * x_a.imag();
    state_.theta_hat = wrap_angle(state_.theta_hat + omega * ts);

    if (!is_finite(state_.u_hat_ab) || !is_finite(state_.omega_hat) || !all_finite(out)) {
        throw DivergenceError("conventional: state diverged");
    }
    return out;
}

SrfFll0::SrfFll0(const FllGains& gains) : FllEstimator(gains) { reset(); }

void SrfFll0::reset() {
    state_ = SrfFllState{};
    state_.omega_b = kNominalOmega;
    state_.theta_hat = wrap_angle(gains_.theta0_hat);
    last_theta_e_ = 0.0;
}

FllOutputs SrfFll0::step(Complex u_ab, double ts) {
    check_ts(ts, gains_.k);
    if (!is_finite(u_ab)) {
        throw DivergenceError("srf_fll0: non-finite input");
    }

    const Complex u_dq = park_transform(u_ab, state_.theta_hat);
    const Complex x_a = aux_variable(u_dq, state_.u_hat_dq);
    const double omega = state_.omega_b;

    FllOutputs out;
    out.omega_hat = omega;
    out.omega_b = omega;
    out.theta_hat = state_.theta_hat;
    out.u_dq = u_dq;
    out.u_hat_dq = state_.u_hat_dq;
    out.x_a = x_a;
    out.e_q = u_dq.imag() - state_.u_hat_dq.imag();
    fill_phase_columns(out, state_, u_ab, eps_mag_, last_theta_e_);

    state_.u_hat_dq += ts * gains_.k * (u_dq - state_.u_hat_dq);
    state_.omega_b += ts * gains_.big_d() * x_a.imag();
    state_.theta_hat = wrap_angle(state_.theta_hat + omega * ts);

    if (!is_finite(state_.u_hat_dq) || !is_finite(state_.omega_b) || !all_finite(out)) {
        throw DivergenceError("srf_fll0: state diverged");
    }
    return out;
}

SrfFll::SrfFll(const FllGains& gains) : FllEstimator(gains) { reset(); }

void SrfFll::reset() {
    state_ = SrfFllState{};
    state_.omega_b = kNominalOmega;
    state_.theta_hat = wrap_angle(gains_.theta0_hat);
    last_theta_e_ = 0.0;
}

FllOutputs SrfFll::step(Complex u_ab, double ts) {
    check_ts(ts, std::max(gains_.k, gains_.d));
    if (!is_finite(u_ab)) {
        throw DivergenceError("srf_fll: non-finite input");
    }

    const Complex u_dq = park_transform(u_ab, state_.theta_hat);
    const Complex x_a = aux_variable(u_dq, state_.u_hat_dq);
    const double e_q = u_dq.imag() - state_.u_hat_dq.imag();
    // Feedthrough uses the pre-update e_q; only omega_b is integrated.
    const double omega = state_.omega_b + (gains_.d / gains_.v_nom) * e_q;

    FllOutputs out;
    out.omega_hat = omega;
    out.omega_b = state_.omega_b;
    out.theta_hat = state_.theta_hat;
    out.u_dq = u_dq;
    out.u_hat_dq = state_.u_hat_dq;
    out.x_a = x_a;
    out.e_q = e_q;
    fill_phase_columns(out, state_, u_ab, eps_mag_, last_theta_e_);

    state_.u_hat_dq += ts * gains_.k * (u_dq - state_.u_hat_dq);
    state_.omega_b += ts * gains_.big_d() * x_a.imag();
    state_.theta_hat = wrap_angle(state_.theta_hat + omega * ts);

    if (!is_finite(state_.u_hat_dq) || !is_finite(state_.omega_b) || !all_finite(out)) {
        throw DivergenceError("srf_fll: state diverged");
    }
    return out;
}

Complex frozen_loop_aux(double k, double omega_e, double v, double ts, double duration_s) {
    if (!(k > 0.0) || !(v > 0.0) || !(ts > 0.0) || !(ts * k < 0.5) || !(duration_s > 0.0)) {
        throw ConfigError("frozen_loop_aux: invalid parameters");
    }
    const auto n = static_cast<std::size_t>(std::llround(duration_s / ts));
    Complex u_hat{0.0, 0.0};
    Complex x_a{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        // In the frozen frame the input rotates at the imposed frequency error.
        const double phase = omega_e * static_cast<double>(i) * ts;
        const Complex u = v * Complex{std::cos(phase), std::sin(phase)};
        x_a = aux_variable(u, u_hat);
        u_hat += ts * k * (u - u_hat);
    }
    return x_a;
}

} // namespace gridlock
