#include "gridlock/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "gridlock/errors.hpp"
#include "gridlock/small_signal.hpp"

namespace gridlock {

std::string_view estimator_name(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::Conventional: return "conventional";
    case EstimatorKind::SrfFll0: return "srf_fll0";
    case EstimatorKind::SrfFll: return "srf_fll";
    }
    return "unknown";
}

EstimatorKind estimator_from_name(std::string_view name) {
    if (name == "conventional") return EstimatorKind::Conventional;
    if (name == "srf_fll0") return EstimatorKind::SrfFll0;
    if (name == "srf_fll") return EstimatorKind::SrfFll;
    throw ConfigError("unknown estimator: " + std::string(name));
}

std::unique_ptr<FllEstimator> make_estimator(EstimatorKind kind, const FllGains& gains) {
    switch (kind) {
    case EstimatorKind::Conventional: return std::make_unique<ConventionalFll>(gains);
    case EstimatorKind::SrfFll0: return std::make_unique<SrfFll0>(gains);
    case EstimatorKind::SrfFll: return std::make_unique<SrfFll>(gains);
    }
    throw ConfigError("unknown estimator kind");
}

std::string_view channel_name(Channel channel) {
    switch (channel) {
    case Channel::OmegaHat: return "omega_hat";
    case Channel::OmegaB: return "omega_b";
    case Channel::ThetaHat: return "theta_hat";
    case Channel::ThetaEHat: return "theta_e_hat";
    case Channel::ThetaEst: return "theta_est";
    case Channel::UD: return "u_d";
    case Channel::UQ: return "u_q";
    case Channel::UHatD: return "uhat_d";
    case Channel::UHatQ: return "uhat_q";
    case Channel::UDEst: return "ud_est";
    case Channel::UQEst: return "uq_est";
    case Channel::XaI: return "x_aI";
    case Channel::EQ: return "e_q";
    }
    return "unknown";
}

bool is_angle_channel(Channel channel) {
    return channel == Channel::ThetaHat || channel == Channel::ThetaEHat ||
           channel == Channel::ThetaEst;
}

double channel_value(const FllOutputs& out, Channel channel) {
    switch (channel) {
    case Channel::OmegaHat: return out.omega_hat;
    case Channel::OmegaB: return out.omega_b;
    case Channel::ThetaHat: return out.theta_hat;
    case Channel::ThetaEHat: return out.theta_e_hat;
    case Channel::ThetaEst: return out.theta_est;
    case Channel::UD: return out.u_dq.real();
    case Channel::UQ: return out.u_dq.imag();
    case Channel::UHatD: return out.u_hat_dq.real();
    case Channel::UHatQ: return out.u_hat_dq.imag();
    case Channel::UDEst: return out.u_dq_est.real();
    case Channel::UQEst: return out.u_dq_est.imag();
    case Channel::XaI: return out.x_a.imag();
    case Channel::EQ: return out.e_q;
    }
    return 0.0;
}

void RunConfig::validate() const {
    gains.validate();
    scenario.validate();
    if (!(ts() * std::max(gains.k, gains.d) < 0.5)) {
        throw ConfigError("run config: Ts * max(k, d) must be < 0.5");
    }
    if (!(warmup_s >= 0.0)) {
        throw ConfigError("run config: warmup must be >= 0");
    }
    if (!scenario.events.empty() && !(warmup_s < scenario.events.front().time_s)) {
        throw ConfigError("run config: warmup must end before the first event");
    }
}

std::size_t RunTrace::index_at(double t_s) const {
    const std::size_t idx = snap_to_sample(t_s, 1.0 / ts);
    return std::min(idx, size());
}

RunTrace run(const RunConfig& config) {
    config.validate();

    const auto samples = synthesize_scenario(config.scenario);
    auto estimator = make_estimator(config.estimator, config.gains);
    const double ts = config.ts();

    RunTrace trace;
    trace.config = config;
    trace.ts = ts;
    trace.time.reserve(samples.size());
    trace.outputs.reserve(samples.size());
    trace.truth.reserve(samples.size());

    for (std::size_t i = 0; i < samples.size(); ++i) {
        FllOutputs out;
        try {
            out = estimator->step(samples[i].u_ab, ts);
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " at sample " + std::to_string(i), i);
        }
        trace.time.push_back(samples[i].t);
        trace.outputs.push_back(out);
        trace.truth.push_back(samples[i].truth);
    }
    return trace;
}

namespace {

double channel_error(double value, double target, bool angle) {
    return angle ? wrap_angle(value - target) : value - target;
}

} // namespace

StepMetrics step_metrics(const RunTrace& trace, Channel channel, double event_time_s,
                         double target, std::optional<double> band_scale) {
    const std::size_t start = trace.index_at(event_time_s);
    if (start == 0 || start >= trace.size()) {
        throw ConfigError("step_metrics: event time must lie inside the trace");
    }
    const bool angle = is_angle_channel(channel);
    const double pre = channel_value(trace.outputs[start - 1], channel);
    const double step = std::abs(channel_error(target, pre, angle));

    // Peak excursion from the target over the post-event window.
    double peak_abs = 0.0;
    std::size_t peak_idx = start;
    for (std::size_t i = start; i < trace.size(); ++i) {
        const double err = std::abs(channel_error(channel_value(trace.outputs[i], channel), target, angle));
        if (err > peak_abs) {
            peak_abs = err;
            peak_idx = i;
        }
    }

    double scale = 0.0;
    bool return_to_value = false;
    if (band_scale) {
        scale = *band_scale;
    } else if (step > 1e-12 * std::max(1.0, std::abs(target))) {
        scale = step;
    } else {
        // Return-to-value channel: the peak excursion sets the scale.
        return_to_value = true;
        scale = peak_abs;
    }
    if (!(scale > 0.0)) {
        throw ConfigError("step_metrics: zero step and no excursion; nothing to measure");
    }

    const double band = 0.02 * scale;
    const double direction = channel_error(target, pre, angle) >= 0.0 ? 1.0 : -1.0;

    StepMetrics m;
    m.peak_value = channel_value(trace.outputs[peak_idx], channel);
    m.peak_time_s = trace.time[peak_idx];
    m.steady_state_error =
        channel_error(channel_value(trace.outputs.back(), channel), target, angle);

    if (return_to_value) {
        m.overshoot_pct = 100.0 * peak_abs / scale;
    } else {
        double beyond = 0.0;
        for (std::size_t i = start; i < trace.size(); ++i) {
            const double excess =
                direction * channel_error(channel_value(trace.outputs[i], channel), target, angle);
            beyond = std::max(beyond, excess);
        }
        m.overshoot_pct = 100.0 * beyond / scale;
    }

    // Last sample outside the 2% band marks the settling instant.
    std::size_t last_outside = start; // sentinel: "never outside" handled below
    bool any_outside = false;
    for (std::size_t i = start; i < trace.size(); ++i) {
        const double err = std::abs(channel_error(channel_value(trace.outputs[i], channel), target, angle));
        if (err > band) {
            last_outside = i;
            any_outside = true;
        }
    }
    if (!any_outside) {
        m.settled = true;
        m.settling_time_s = 0.0;
    } else if (last_outside == trace.size() - 1) {
        m.settled = false;
        m.settling_time_s = trace.time.back() - event_time_s;
    } else {
        m.settled = true;
        m.settling_time_s = trace.time[last_outside] - event_time_s;
    }
    return m;
}

double compare_traces(const RunTrace& a, const RunTrace& b, Channel channel) {
    if (a.size() != b.size() || a.ts != b.ts) {
        throw ConfigError("compare_traces: time grids differ");
    }
    const bool angle = is_angle_channel(channel);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(channel_error(channel_value(a.outputs[i], channel),
                                                   channel_value(b.outputs[i], channel), angle));
        max_diff = std::max(max_diff, diff);
    }
    return max_diff;
}

GridScenario constant_scenario(double f_hz, double duration_s, double sample_rate_hz,
                               double amplitude, double theta0) {
    GridScenario s;
    s.initial = GridParams{amplitude, f_hz, theta0};
    s.duration_s = duration_s;
    s.sample_rate_hz = sample_rate_hz;
    return s;
}

GridScenario freq_step_scenario(double f0_hz, double df_hz, double t_event_s, double duration_s,
                                double sample_rate_hz) {
    GridScenario s = constant_scenario(f0_hz, duration_s, sample_rate_hz);
    s.events.push_back(GridEvent::frequency_step(t_event_s, df_hz));
    return s;
}

GridScenario phase_jump_scenario(double f0_hz, double dtheta_rad, double t_event_s,
                                 double duration_s, double sample_rate_hz) {
    GridScenario s = constant_scenario(f0_hz, duration_s, sample_rate_hz);
    s.events.push_back(GridEvent::phase_jump(t_event_s, dtheta_rad));
    return s;
}

GridScenario amplitude_sag_scenario(double f0_hz, double v_sag, double t_event_s,
                                    double t_restore_s, double duration_s,
                                    double sample_rate_hz) {
    GridScenario s = constant_scenario(f0_hz, duration_s, sample_rate_hz);
    s.events.push_back(GridEvent::amplitude_change(t_event_s, v_sag));
    s.events.push_back(GridEvent::amplitude_change(t_restore_s, 1.0));
    return s;
}

std::string_view suite_name(Suite suite) {
    switch (suite) {
    case Suite::FreqStepFig5: return "freq_step_fig5";
    case Suite::PhaseStepFig6: return "phase_step_fig6";
    case Suite::OptimalFig7: return "optimal_fig7";
    case Suite::DisturbanceFig8: return "disturbance_fig8";
    }
    return "unknown";
}

Suite suite_from_name(std::string_view name) {
    if (name == "freq_step_fig5") return Suite::FreqStepFig5;
    if (name == "phase_step_fig6") return Suite::PhaseStepFig6;
    if (name == "optimal_fig7") return Suite::OptimalFig7;
    if (name == "disturbance_fig8") return Suite::DisturbanceFig8;
    throw ConfigError("unknown suite: " + std::string(name));
}

bool SweepReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const SweepCheck& c) { return c.pass; });
}

unsigned sweep_thread_cap() {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRIDLOCK_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed >= 1) {
            cap = static_cast<unsigned>(parsed);
        }
    }
    return cap;
}

namespace {

constexpr double kSweepK = 120.0 * kPi;
constexpr double kEventTime = 0.25;
constexpr double kWarmup = 0.2;
constexpr double kSweepDuration = 0.6;
constexpr double kDOverKGrid[] = {0.25, 0.5, 1.0, 2.0};

std::string d_label(double d_over_k) {
    std::ostringstream os;
    os << "d" << d_over_k << "k";
    return os.str();
}

/// Runs the cell configs in parallel and fills traces in input order.
std::vector<RunTrace> run_parallel(const std::vector<RunConfig>& configs) {
    std::vector<RunTrace> traces(configs.size());
    const unsigned workers =
        std::min<unsigned>(sweep_thread_cap(), static_cast<unsigned>(configs.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            traces[i] = run(configs[i]);
        }
        return traces;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) {
                return;
            }
            try {
                traces[i] = run(configs[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return traces;
}

SweepCell make_cell(std::string label, std::string suite_tag, const RunConfig& config,
                    RunTrace trace, double target, std::optional<double> scale) {
    SweepCell cell;
    cell.label = std::move(label);
    cell.suite_tag = std::move(suite_tag);
    cell.estimator = config.estimator;
    cell.d_over_k = config.gains.d / config.gains.k;
    cell.event_time_s = kEventTime;
    cell.omega_hat_metrics = step_metrics(trace, Channel::OmegaHat, kEventTime, target, scale);
    cell.omega_b_metrics = step_metrics(trace, Channel::OmegaB, kEventTime, target, scale);
    cell.trace = std::move(trace);
    return cell;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

SweepReport grid_sweep(Suite suite) {
    const bool phase_suite = suite == Suite::PhaseStepFig6;
    const GridScenario scenario =
        phase_suite
            ? phase_jump_scenario(60.0, 20.0 * kPi / 180.0, kEventTime, kSweepDuration)
            : freq_step_scenario(60.0, 5.0, kEventTime, kSweepDuration);
    const double target = phase_suite ? kTwoPi * 60.0 : kTwoPi * 65.0;
    const std::optional<double> scale =
        phase_suite ? std::nullopt : std::optional<double>(kTwoPi * 5.0);

    std::vector<RunConfig> configs;
    std::vector<std::string> labels;
    for (EstimatorKind kind : {EstimatorKind::Conventional, EstimatorKind::SrfFll}) {
        for (double r : kDOverKGrid) {
            RunConfig c;
            c.estimator = kind;
            c.gains = FllGains{kSweepK, r * kSweepK, 1.0, 0.0};
            c.scenario = scenario;
            c.warmup_s = kWarmup;
            configs.push_back(c);
            labels.push_back(d_label(r));
        }
    }

    auto traces = run_parallel(configs);

    SweepReport report;
    report.suite = suite;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        report.cells.push_back(make_cell(labels[i], std::string(suite_name(suite)), configs[i],
                                         std::move(traces[i]), target, scale));
    }

    auto cell = [&](EstimatorKind kind, double r) -> const SweepCell& {
        for (const SweepCell& c : report.cells) {
            if (c.estimator == kind && std::abs(c.d_over_k - r) < 1e-12) {
                return c;
            }
        }
        throw ConfigError("sweep: missing cell");
    };

    if (!phase_suite) {
        bool conv_increasing = true;
        bool srf_settling_decreasing = true;
        bool srf_b_overshoot_ok = true;
        for (std::size_t i = 0; i + 1 < std::size(kDOverKGrid); ++i) {
            conv_increasing &=
                cell(EstimatorKind::Conventional, kDOverKGrid[i]).omega_hat_metrics.overshoot_pct <
                cell(EstimatorKind::Conventional, kDOverKGrid[i + 1]).omega_hat_metrics.overshoot_pct;
            srf_settling_decreasing &=
                cell(EstimatorKind::SrfFll, kDOverKGrid[i]).omega_hat_metrics.settling_time_s >
                cell(EstimatorKind::SrfFll, kDOverKGrid[i + 1]).omega_hat_metrics.settling_time_s;
        }
        for (double r : kDOverKGrid) {
            srf_b_overshoot_ok &= cell(EstimatorKind::SrfFll, r).omega_b_metrics.overshoot_pct < 1.0;
        }
        report.checks.push_back({"conventional overshoot increases with d", conv_increasing, ""});
        report.checks.push_back({"srf_fll omega_hat settling decreases with d",
                                 srf_settling_decreasing, ""});
        report.checks.push_back({"srf_fll omega_b overshoot < 1% for all d", srf_b_overshoot_ok, ""});
    } else {
        bool omega_b_best = true;
        std::string detail;
        for (double r : kDOverKGrid) {
            const SweepCell& c = cell(EstimatorKind::SrfFll, r);
            const double ex_hat = std::abs(c.omega_hat_metrics.peak_value - kTwoPi * 60.0);
            const double ex_b = std::abs(c.omega_b_metrics.peak_value - kTwoPi * 60.0);
            omega_b_best &= ex_b < ex_hat;
            detail += d_label(r) + ": " + fmt(ex_b) + " vs " + fmt(ex_hat) + " rad/s; ";
        }
        report.checks.push_back(
            {"srf_fll omega_b excursion below omega_hat on phase steps", omega_b_best, detail});
    }
    return report;
}

SweepReport optimal_sweep() {
    const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEventTime, kSweepDuration);
    const double target = kTwoPi * 65.0;
    const std::optional<double> scale = kTwoPi * 5.0;

    RunConfig conv;
    conv.estimator = EstimatorKind::Conventional;
    conv.gains = FllGains{kSweepK, 0.5 * kSweepK, 1.0, 0.0}; // its optimal damping
    conv.scenario = scenario;
    conv.warmup_s = kWarmup;

    RunConfig srf = conv;
    srf.estimator = EstimatorKind::SrfFll;
    srf.gains.d = kSweepK;

    auto traces = run_parallel({conv, srf});

    SweepReport report;
    report.suite = Suite::OptimalFig7;
    report.cells.push_back(make_cell("d0.5k", "optimal_fig7", conv, std::move(traces[0]), target, scale));
    report.cells.push_back(make_cell("d1k", "optimal_fig7", srf, std::move(traces[1]), target, scale));

    const StepMetrics& conv_m = report.cells[0].omega_hat_metrics;
    const StepMetrics& srf_m = report.cells[1].omega_hat_metrics;
    const StepMetrics& srf_b = report.cells[1].omega_b_metrics;
    report.checks.push_back({"srf_fll omega_hat settles faster than the optimal conventional",
                             srf_m.settling_time_s < conv_m.settling_time_s,
                             fmt(srf_m.settling_time_s) + " s vs " + fmt(conv_m.settling_time_s) + " s"});
    report.checks.push_back({"conventional shows its damping-limited overshoot",
                             conv_m.overshoot_pct > 2.0 && conv_m.overshoot_pct < 7.0,
                             fmt(conv_m.overshoot_pct) + " %"});
    report.checks.push_back({"srf_fll omega_b overshoot below 1%", srf_b.overshoot_pct < 1.0,
                             fmt(srf_b.overshoot_pct) + " %"});
    return report;
}

SweepReport disturbance_sweep() {
    const double restore = kEventTime + 0.15;
    const double duration = 0.8;
    const FllGains gains{kSweepK, kSweepK, 1.0, 0.0};

    struct Variant {
        const char* label;
        GridScenario scenario;
        double target;
        std::optional<double> scale;
    };
    std::vector<Variant> variants;
    variants.push_back({"sag", amplitude_sag_scenario(60.0, 0.5, kEventTime, restore, duration),
                        kTwoPi * 60.0, std::nullopt});
    variants.push_back({"freq_step", freq_step_scenario(60.0, -5.0, kEventTime, duration),
                        kTwoPi * 55.0, kTwoPi * 5.0});
    variants.push_back({"phase_step",
                        phase_jump_scenario(60.0, 20.0 * kPi / 180.0, kEventTime, duration),
                        kTwoPi * 60.0, std::nullopt});

    std::vector<RunConfig> configs;
    for (const Variant& v : variants) {
        RunConfig c;
        c.estimator = EstimatorKind::SrfFll;
        c.gains = gains;
        c.scenario = v.scenario;
        c.warmup_s = kWarmup;
        configs.push_back(c);
    }
    auto traces = run_parallel(configs);

    SweepReport report;
    report.suite = Suite::DisturbanceFig8;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        report.cells.push_back(make_cell(variants[i].label,
                                         std::string(suite_name(report.suite)) + "/" + variants[i].label,
                                         configs[i], std::move(traces[i]), variants[i].target,
                                         variants[i].scale));
    }

    // Re-lock within 0.3 s of the last disturbance, on every variant.
    bool relocked = true;
    std::string detail;
    for (const SweepCell& c : report.cells) {
        const RunTrace& trace = c.trace;
        const double last_event = trace.config.scenario.events.back().time_s;
        const std::size_t from = trace.index_at(last_event + 0.3);
        double worst = 0.0;
        for (std::size_t i = from; i < trace.size(); ++i) {
            worst = std::max(worst, std::abs(trace.outputs[i].omega_hat - trace.truth[i].omega));
        }
        relocked &= worst < 1e-3;
        detail += c.label + ": " + fmt(worst) + " rad/s; ";
    }
    report.checks.push_back({"re-lock within 0.3 s of the last disturbance", relocked, detail});
    return report;
}

} // namespace

SweepReport paper_sweep(Suite suite) {
    switch (suite) {
    case Suite::FreqStepFig5:
    case Suite::PhaseStepFig6:
        return grid_sweep(suite);
    case Suite::OptimalFig7:
        return optimal_sweep();
    case Suite::DisturbanceFig8:
        return disturbance_sweep();
    }
    throw ConfigError("unknown suite");
}

} // namespace gridlock
