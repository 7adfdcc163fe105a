#include "gridlock/signal.hpp"

#include <cmath>
#include <string>

#include "gridlock/errors.hpp"

namespace gridlock {

Complex park_transform(Complex u_ab, double angle) {
    if (!is_finite(u_ab) || !is_finite(angle)) {
        throw DivergenceError("park_transform: non-finite input");
    }
    return u_ab * Complex{std::cos(angle), -std::sin(angle)};
}

std::size_t snap_to_sample(double t_s, double sample_rate_hz) {
    // Guard against t*rate landing a few ulps above an exact boundary.
    const double x = t_s * sample_rate_hz;
    const double snapped = std::ceil(x - 1e-9 - 1e-12 * x);
    return snapped <= 0.0 ? 0 : static_cast<std::size_t>(snapped);
}

void GridScenario::validate() const {
    if (!(initial.amplitude > 0.0)) {
        throw ConfigError("scenario: amplitude must be > 0");
    }
    if (!(initial.frequency_hz > 0.0)) {
        throw ConfigError("scenario: frequency must be > 0");
    }
    if (!is_finite(initial.initial_phase)) {
        throw ConfigError("scenario: initial phase must be finite");
    }
    if (!(duration_s > 0.0)) {
        throw ConfigError("scenario: duration must be > 0");
    }
    if (!(sample_rate_hz >= 20.0 * initial.frequency_hz)) {
        throw ConfigError("scenario: sample rate must be >= 20x the fundamental");
    }

    const std::size_t n = sample_count();
    double prev = -1.0;
    for (const GridEvent& ev : events) {
        if (!(ev.time_s >= 0.0)) {
            throw ConfigError("scenario: event time must be >= 0");
        }
        if (!(ev.time_s > prev)) {
            throw ConfigError("scenario: event times must be strictly increasing");
        }
        if (!(ev.time_s < duration_s)) {
            throw ConfigError("scenario: event at t=" + std::to_string(ev.time_s) +
                              " is not before the scenario end");
        }
        if (snap_to_sample(ev.time_s, sample_rate_hz) >= n) {
            throw ConfigError("scenario: event snaps beyond the last sample");
        }
        if (ev.kind == GridEvent::Kind::AmplitudeChange && !(ev.value > 0.0)) {
            throw ConfigError("scenario: amplitude change must stay > 0");
        }
        if (!is_finite(ev.value)) {
            throw ConfigError("scenario: event value must be finite");
        }
        prev = ev.time_s;
    }
}

std::vector<ScenarioSample> synthesize_scenario(const GridScenario& scenario) {
    scenario.validate();

    const std::size_t n = scenario.sample_count();
    const double ts = scenario.ts();

    double v = scenario.initial.amplitude;
    double omega = kTwoPi * scenario.initial.frequency_hz;
    double theta = wrap_angle(scenario.initial.initial_phase);

    std::vector<ScenarioSample> samples;
    samples.reserve(n);

    std::size_t next_event = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (next_event < scenario.events.size() &&
               snap_to_sample(scenario.events[next_event].time_s, scenario.sample_rate_hz) == i) {
            const GridEvent& ev = scenario.events[next_event];
            switch (ev.kind) {
            case GridEvent::Kind::FrequencyStep:
                omega += kTwoPi * ev.value;
                break;
            case GridEvent::Kind::PhaseJump:
                theta = wrap_angle(theta + ev.value);
                break;
            case GridEvent::Kind::AmplitudeChange:
                v = ev.value;
                break;
            }
            ++next_event;
        }

        ScenarioSample s;
        s.t = static_cast<double>(i) * ts;
        s.u_ab = Complex{v * std::cos(theta), v * std::sin(theta)};
        s.truth = GroundTruth{v, omega, theta};
        samples.push_back(s);

        theta = wrap_angle(theta + omega * ts);
    }
    return samples;
}

} // namespace gridlock
