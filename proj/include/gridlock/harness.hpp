#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridlock/fll.hpp"
#include "gridlock/signal.hpp"

namespace gridlock {

enum class EstimatorKind { Conventional, SrfFll0, SrfFll };

std::string_view estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(std::string_view name);
std::unique_ptr<FllEstimator> make_estimator(EstimatorKind kind, const FllGains& gains);

enum class Channel {
    OmegaHat,
    OmegaB,
    ThetaHat,
    ThetaEHat,
    ThetaEst,
    UD,
    UQ,
    UHatD,
    UHatQ,
    UDEst,
    UQEst,
    XaI,
    EQ,
};

std::string_view channel_name(Channel channel);
bool is_angle_channel(Channel channel);
double channel_value(const FllOutputs& out, Channel channel);

struct RunConfig {
    EstimatorKind estimator = EstimatorKind::SrfFll;
    FllGains gains;
    GridScenario scenario;
    double warmup_s = 0.2; // lock period before the first event

    double ts() const { return scenario.ts(); }
    void validate() const;
};

/// Time-indexed record of all estimator outputs plus ground truth.
struct RunTrace {
    RunConfig config;
    double ts = 0.0;
    std::vector<double> time;
    std::vector<FllOutputs> outputs;
    std::vector<GroundTruth> truth;

    std::size_t size() const { return time.size(); }
    /// First sample index with t >= t_s (same snapping rule as events).
    std::size_t index_at(double t_s) const;
};

/// Deterministic run of one estimator over one scenario. Throws
/// DivergenceError (with the offending sample index) if any state or output
/// becomes non-finite.
RunTrace run(const RunConfig& config);

struct StepMetrics {
    bool settled = false;
    double settling_time_s = 0.0;  // 2%-band, measured from the event
    double overshoot_pct = 0.0;    // % of the step (or of the band scale)
    double peak_value = 0.0;       // channel units
    double peak_time_s = 0.0;
    double steady_state_error = 0.0; // trace-end value minus target
};

/// Step metrics on one channel from `event_time_s` to the end of the trace.
/// The settling band is 2% of |target - pre-event value|, or of `band_scale`
/// when given. For return-to-value channels (target == pre-event value) the
/// peak excursion from the target is used as the scale.
StepMetrics step_metrics(const RunTrace& trace, Channel channel, double event_time_s,
                         double target, std::optional<double> band_scale = std::nullopt);

/// Max |a - b| over the channel; wrap-aware for angle channels.
/// Throws ConfigError when the time grids differ.
double compare_traces(const RunTrace& a, const RunTrace& b, Channel channel);

// Scenario builders shared by the comparison suites and the validation runs.
GridScenario constant_scenario(double f_hz, double duration_s, double sample_rate_hz = 10000.0,
                               double amplitude = 1.0, double theta0 = 0.0);
GridScenario freq_step_scenario(double f0_hz, double df_hz, double t_event_s, double duration_s,
                                double sample_rate_hz = 10000.0);
GridScenario phase_jump_scenario(double f0_hz, double dtheta_rad, double t_event_s,
                                 double duration_s, double sample_rate_hz = 10000.0);
GridScenario amplitude_sag_scenario(double f0_hz, double v_sag, double t_event_s,
                                    double t_restore_s, double duration_s,
                                    double sample_rate_hz = 10000.0);

enum class Suite { FreqStepFig5, PhaseStepFig6, OptimalFig7, DisturbanceFig8 };

std::string_view suite_name(Suite suite);
Suite suite_from_name(std::string_view name);

struct SweepCell {
    std::string label;         // e.g. "d0.5k" or "sag"
    std::string suite_tag;     // suite name, possibly with a variant suffix
    EstimatorKind estimator;
    double d_over_k = 1.0;
    double event_time_s = 0.0;
    RunTrace trace;
    StepMetrics omega_hat_metrics;
    StepMetrics omega_b_metrics;
};

struct SweepCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SweepReport {
    Suite suite;
    std::vector<SweepCell> cells;
    std::vector<SweepCheck> checks;
    bool all_pass() const;
};

/// Runs one of the published comparison grids and evaluates its qualitative
/// orderings. Cells run in parallel (capped by GRIDLOCK_THREADS).
SweepReport paper_sweep(Suite suite);

/// Thread cap for parallel sweep cells: GRIDLOCK_THREADS when set and valid,
/// otherwise the hardware concurrency.
unsigned sweep_thread_cap();

} // namespace gridlock
