#pragma once

#include <memory>
#include <optional>

#include "gridlock/signal.hpp"

namespace gridlock {

inline constexpr double kNominalFrequencyHz = 60.0;
inline constexpr double kNominalOmega = kTwoPi * kNominalFrequencyHz;

/// Tuning set shared by all estimators. D = k*d/v_nom^2 is derived on use.
struct FllGains {
    double k = 120.0 * kPi;     // rad/s, LPF/ROGI gain
    double d = 120.0 * kPi;     // rad/s, frequency-estimation gain
    double v_nom = 1.0;         // pu, nominal amplitude
    double theta0_hat = 0.0;    // rad, initial generated phase

    double big_d() const { return k * d / (v_nom * v_nom); }
    void validate() const;
};

/// State of the stationary-frame estimator (Fig. 1a topology).
struct ConvFllState {
    Complex u_hat_ab{0.0, 0.0};
    double omega_hat = kNominalOmega;
    double theta_hat = 0.0; // accumulated from omega_hat for dq trace outputs
};

/// State of the synchronous-frame estimators.
struct SrfFllState {
    Complex u_hat_dq{0.0, 0.0};
    double omega_b = kNominalOmega; // integrator output
    double theta_hat = 0.0;         // generated phase, in (-pi, pi]
};

/// Uniform per-step output record. All values are taken at the step's input
/// sample, before the state update.
struct FllOutputs {
    double omega_hat = 0.0;   // frequency estimate
    double omega_b = 0.0;     // integrator branch (== omega_hat for conventional / SRF-FLL0)
    double theta_hat = 0.0;   // generated phase
    Complex u_dq;             // rotated input
    Complex u_hat_dq;         // filter state, dq frame
    Complex x_a;              // u_dq * conj(u_hat_dq)
    double e_q = 0.0;         // u_q - uhat_q
    double theta_e_hat = 0.0; // estimated phase offset of the dq frame
    double theta_est = 0.0;   // theta_hat + theta_e_hat, wrapped
    Complex u_dq_est;         // input rotated by theta_est; V + j0 at lock
};

bool all_finite(const FllOutputs& out);

/// x_a = u_dq * conj(u_hat_dq). Its imaginary part carries the frequency error.
inline Complex aux_variable(Complex u_dq, Complex u_hat_dq) {
    return u_dq * std::conj(u_hat_dq);
}

struct PhaseOutputs {
    double theta_e_hat = 0.0;
    double theta_est = 0.0;
    Complex u_dq_est;
};

/// Phase reconstruction from the filter state. Returns nothing while
/// |u_hat_dq| <= eps_mag (start-up); callers hold the last valid value.
std::optional<PhaseOutputs> phase_outputs(const SrfFllState& state, Complex u_ab, double eps_mag);

class FllEstimator {
public:
    explicit FllEstimator(const FllGains& gains);
    virtual ~FllEstimator() = default;

    /// Advances one fixed step of ts seconds. Outputs reflect the pre-update
    /// state and the current input. Throws DivergenceError on non-finite
    /// input or state, ConfigError when ts violates the stability margin.
    virtual FllOutputs step(Complex u_ab, double ts) = 0;
    virtual void reset() = 0;

    const FllGains& gains() const { return gains_; }

protected:
    void check_ts(double ts, double fastest_gain) const;

    FllGains gains_;
    double eps_mag_ = 0.0;     // |u_hat| guard for phase reconstruction
    double last_theta_e_ = 0.0;
};

/// Stationary-frame ROGI-FLL (the conventional structure):
///   duhat_ab/dt = j*omega_hat*uhat_ab + k*(u_ab - uhat_ab)
///   domega_hat/dt = D * Im(u_ab * conj(uhat_ab))
/// dq and phase outputs are derived by rotating with the accumulated phase,
/// so traces share one column set across estimators.
class ConventionalFll : public FllEstimator {
public:
    explicit ConventionalFll(const FllGains& gains);

    FllOutputs step(Complex u_ab, double ts) override;
    void reset() override;

    ConvFllState& state() { return state_; }
    const ConvFllState& state() const { return state_; }

private:
    ConvFllState state_;
};

/// Synchronous-frame FLL without the loop filter (dq image of the
/// conventional FLL):
///   u_dq = u_ab * e^(-j*theta_hat)
///   duhat_dq/dt = k*(u_dq - uhat_dq)
///   domega/dt = D * Im(u_dq * conj(uhat_dq)),  dtheta_hat/dt = omega
class SrfFll0 : public FllEstimator {
public:
    explicit SrfFll0(const FllGains& gains);

    FllOutputs step(Complex u_ab, double ts) override;
    void reset() override;

    SrfFllState& state() { return state_; }
    const SrfFllState& state() const { return state_; }

private:
    SrfFllState state_;
};

/// Improved synchronous-frame FLL. The extra loop filter is realized
/// implicitly through e_q = u_q - uhat_q:
///   omega_hat = omega_b + (d/V)*e_q   (feedthrough, not integrated)
///   domega_b/dt = D * Im(u_dq * conj(uhat_dq))
/// and theta_hat integrates the feedthrough-corrected omega_hat.
/// Step order: rotate input, form e_q/x_a/omega_hat from current state,
/// Euler-update uhat_dq and omega_b, then advance theta_hat.
class SrfFll : public FllEstimator {
public:
    explicit SrfFll(const FllGains& gains);

    FllOutputs step(Complex u_ab, double ts) override;
    void reset() override;

    SrfFllState& state() { return state_; }
    const SrfFllState& state() const { return state_; }

private:
    SrfFllState state_;
};

/// Open-loop diagnostic: steps the dq low-pass stage with the frequency
/// estimate frozen and a constant frequency error imposed, returning the
/// final x_a. Converges to the analytic steady state within ~10/k seconds.
Complex frozen_loop_aux(double k, double omega_e, double v, double ts, double duration_s);

} // namespace gridlock
