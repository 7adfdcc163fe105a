#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace gridlock {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
    double w = std::remainder(angle, kTwoPi);
    if (w <= -kPi) {
        w += kTwoPi;
    }
    return w;
}

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Rotates an alpha-beta phasor into the frame at `angle`: u * e^(-j*angle).
/// Magnitude is preserved up to rounding.
Complex park_transform(Complex u_ab, double angle);

struct GridParams {
    double amplitude = 1.0;     // per unit, > 0
    double frequency_hz = 60.0; // > 0
    double initial_phase = 0.0; // rad
};

/// Scripted disturbance applied at a point in time. The event snaps to the
/// nearest sample boundary at or after its nominal time.
struct GridEvent {
    enum class Kind { FrequencyStep, PhaseJump, AmplitudeChange };

    double time_s = 0.0;
    Kind kind = Kind::FrequencyStep;
    double value = 0.0; // df in Hz | dtheta in rad | new amplitude in pu

    static GridEvent frequency_step(double t_s, double df_hz) {
        return {t_s, Kind::FrequencyStep, df_hz};
    }
    static GridEvent phase_jump(double t_s, double dtheta_rad) {
        return {t_s, Kind::PhaseJump, dtheta_rad};
    }
    static GridEvent amplitude_change(double t_s, double v_new) {
        return {t_s, Kind::AmplitudeChange, v_new};
    }
};

struct GridScenario {
    GridParams initial;
    std::vector<GridEvent> events; // strictly increasing times, all < duration
    double duration_s = 0.5;
    double sample_rate_hz = 10000.0;

    std::size_t sample_count() const {
        return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    }
    double ts() const { return 1.0 / sample_rate_hz; }

    /// Throws ConfigError when any invariant is violated.
    void validate() const;
};

struct GroundTruth {
    double v = 0.0;     // pu
    double omega = 0.0; // rad/s
    double theta = 0.0; // rad, in (-pi, pi]
};

struct ScenarioSample {
    double t = 0.0;
    Complex u_ab;
    GroundTruth truth;
};

/// Sample index an event time snaps to (nearest boundary at or after).
std::size_t snap_to_sample(double t_s, double sample_rate_hz);

/// Generates the positive-sequence voltage u_ab(t) = V(t)*e^(j*theta(t)).
/// Phase accumulates per sample by omega*Ts and stays continuous across
/// frequency and amplitude events; phase jumps add their offset at the
/// event sample. First sample is at t = 0.
std::vector<ScenarioSample> synthesize_scenario(const GridScenario& scenario);

} // namespace gridlock
