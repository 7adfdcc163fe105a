#include <doctest.h>

#include <cmath>
#include <cstring>

#include "gridlock/errors.hpp"
#include "gridlock/harness.hpp"
#include "gridlock/small_signal.hpp"
#include "gridlock/trace_io.hpp"

using namespace gridlock;

namespace {

constexpr double kK = 120.0 * kPi;

RunConfig basic_config(EstimatorKind kind, double d, const GridScenario& scenario) {
    RunConfig c;
    c.estimator = kind;
    c.gains = FllGains{kK, d, 1.0, 0.0};
    c.scenario = scenario;
    c.warmup_s = 0.2;
    return c;
}

// Builds a trace whose omega_hat channel follows the given values; used to
// exercise the metric extraction against closed forms.
RunTrace synthetic_trace(const std::vector<double>& values, double ts) {
    RunTrace trace;
    trace.ts = ts;
    trace.config.scenario.duration_s = static_cast<double>(values.size()) * ts;
    trace.config.scenario.sample_rate_hz = 1.0 / ts;
    for (std::size_t i = 0; i < values.size(); ++i) {
        trace.time.push_back(static_cast<double>(i) * ts);
        FllOutputs out;
        out.omega_hat = values[i];
        out.omega_b = values[i];
        trace.outputs.push_back(out);
        trace.truth.push_back(GroundTruth{1.0, 0.0, 0.0});
    }
    return trace;
}

} // namespace

TEST_CASE("run locks on a constant scenario") {
    const GridScenario scenario = constant_scenario(60.0, 0.5);
    for (EstimatorKind kind : {EstimatorKind::SrfFll0, EstimatorKind::SrfFll}) {
        RunConfig config = basic_config(kind, kK, scenario);
        const RunTrace trace = run(config);
        REQUIRE(trace.size() == scenario.sample_count());
        for (std::size_t i = trace.index_at(0.2); i < trace.size(); ++i) {
            CHECK(std::abs(trace.outputs[i].omega_hat - kTwoPi * 60.0) < 1e-3);
        }
    }
}

TEST_CASE("run is deterministic bit for bit") {
    RunConfig config =
        basic_config(EstimatorKind::SrfFll, kK, freq_step_scenario(60.0, 5.0, 0.25, 0.5));
    const RunTrace a = run(config);
    const RunTrace b = run(config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::memcmp(&a.outputs[i], &b.outputs[i], sizeof(FllOutputs)) == 0);
    }
}

TEST_CASE("run config validation") {
    RunConfig config =
        basic_config(EstimatorKind::SrfFll, kK, freq_step_scenario(60.0, 5.0, 0.25, 0.5));
    config.warmup_s = 0.3; // past the event
    CHECK_THROWS_AS(run(config), ConfigError);

    config = basic_config(EstimatorKind::SrfFll, kK, freq_step_scenario(60.0, 5.0, 0.25, 0.5));
    config.gains.d = 6000.0; // Ts*d > 0.5 at 10 kHz
    CHECK_THROWS_AS(run(config), ConfigError);
}

TEST_CASE("conventional frequency step matches its second-order oracle") {
    // Optimal damping point: the simulated trajectory has to track the
    // closed-form step response within 2% of the step.
    RunConfig config = basic_config(EstimatorKind::Conventional, 0.5 * kK,
                                    freq_step_scenario(60.0, 5.0, 0.25, 0.6));
    const RunTrace trace = run(config);

    const RationalTf tf = build_tf(TfKind::ConvOmega, kK, 0.5 * kK);
    const double step = kTwoPi * 5.0;
    const std::size_t start = trace.index_at(0.25);
    std::vector<double> times;
    for (std::size_t i = start; i < trace.size(); ++i) {
        times.push_back(trace.time[i] - trace.time[start]);
    }
    const std::vector<double> oracle = step_response(tf, times);
    double worst = 0.0;
    for (std::size_t i = start; i < trace.size(); ++i) {
        const double expect = kTwoPi * 60.0 + step * oracle[i - start];
        worst = std::max(worst, std::abs(trace.outputs[i].omega_hat - expect));
    }
    CHECK(worst < 0.02 * step);
}

TEST_CASE("phase step drives u_q to sin(20 deg) and back") {
    RunConfig config = basic_config(EstimatorKind::SrfFll, kK,
                                    phase_jump_scenario(60.0, 20.0 * kPi / 180.0, 0.25, 0.6));
    const RunTrace trace = run(config);

    const std::size_t at_event = trace.index_at(0.25);
    CHECK(trace.outputs[at_event].u_dq.imag() ==
          doctest::Approx(std::sin(20.0 * kPi / 180.0)).epsilon(1e-3));
    for (std::size_t i = trace.index_at(0.35); i < trace.size(); ++i) {
        CHECK(std::abs(trace.outputs[i].u_dq.imag()) < 0.01);
    }
}

TEST_CASE("step metrics on closed-form channels") {
    const double ts = 1e-4;
    const double d = 120.0 * kPi;

    SUBCASE("first-order rise") {
        std::vector<double> values;
        for (int i = 0; i < 3000; ++i) {
            const double t = i * ts;
            values.push_back(t < 0.1 ? 0.0 : 1.0 - std::exp(-d * (t - 0.1)));
        }
        const StepMetrics m = step_metrics(synthetic_trace(values, ts), Channel::OmegaHat, 0.1, 1.0);
        CHECK(m.settled);
        CHECK(m.settling_time_s == doctest::Approx(std::log(50.0) / d).epsilon(0.05));
        CHECK(m.overshoot_pct == doctest::Approx(0.0).scale(1.0).epsilon(0.01));
    }
    SUBCASE("second-order response at the optimal damping") {
        const RationalTf tf = build_tf(TfKind::ConvOmega, kK, 0.5 * kK);
        std::vector<double> times;
        for (int i = 0; i < 3000; ++i) {
            times.push_back(i * ts);
        }
        const std::vector<double> resp = step_response(tf, times);
        std::vector<double> values(1000, 0.0);
        values.insert(values.end(), resp.begin(), resp.end());
        const StepMetrics m = step_metrics(synthetic_trace(values, ts), Channel::OmegaHat, 0.1, 1.0);
        CHECK(m.overshoot_pct == doctest::Approx(100.0 * std::exp(-kPi)).epsilon(0.02));
        CHECK(m.peak_value > 1.0);
    }
    SUBCASE("constant channel already at the target") {
        const std::vector<double> values(2000, 5.0);
        const StepMetrics m = step_metrics(synthetic_trace(values, ts), Channel::OmegaHat, 0.1, 5.0);
        CHECK(m.settled);
        CHECK(m.settling_time_s == 0.0);
        CHECK(m.overshoot_pct == 0.0);
    }
    SUBCASE("never-settling channel is flagged") {
        std::vector<double> values(2000, 0.0);
        for (std::size_t i = 1000; i < values.size(); ++i) {
            values[i] = 0.5; // stays halfway forever
        }
        const StepMetrics m = step_metrics(synthetic_trace(values, ts), Channel::OmegaHat, 0.1, 1.0);
        CHECK_FALSE(m.settled);
        CHECK(m.steady_state_error == doctest::Approx(-0.5));
    }
}

TEST_CASE("compare_traces is wrap-aware on angle channels") {
    std::vector<double> zeros(10, 0.0);
    RunTrace a = synthetic_trace(zeros, 1e-4);
    RunTrace b = synthetic_trace(zeros, 1e-4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.outputs[i].theta_hat = kPi - 0.01;
        b.outputs[i].theta_hat = -kPi + 0.01;
    }
    CHECK(compare_traces(a, b, Channel::ThetaHat) == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(compare_traces(a, a, Channel::ThetaHat) == 0.0);
    CHECK(compare_traces(a, b, Channel::OmegaHat) == 0.0);

    RunTrace c = synthetic_trace(std::vector<double>(9, 0.0), 1e-4);
    CHECK_THROWS_AS(compare_traces(a, c, Channel::OmegaHat), ConfigError);
}

TEST_CASE("freq-step sweep grid") {
    const SweepReport report = paper_sweep(Suite::FreqStepFig5);
    CHECK(report.cells.size() == 8);
    CHECK(sweep_metrics_rows(report).size() == 16);
    for (const SweepCheck& check : report.checks) {
        INFO(check.name, ": ", check.detail);
        CHECK(check.pass);
    }

    for (const SweepCell& cell : report.cells) {
        if (cell.estimator == EstimatorKind::SrfFll && cell.d_over_k == 2.0) {
            CHECK(cell.omega_b_metrics.overshoot_pct < 1.0);
        }
        if (cell.estimator == EstimatorKind::Conventional && cell.d_over_k == 2.0) {
            CHECK(cell.omega_hat_metrics.overshoot_pct == doctest::Approx(30.5).epsilon(0.1));
        }
        if (cell.estimator == EstimatorKind::SrfFll && cell.d_over_k == 1.0) {
            CHECK(cell.omega_hat_metrics.settling_time_s ==
                  doctest::Approx(std::log(50.0) / kK).epsilon(0.2));
        }
    }
}

TEST_CASE("phase-step sweep prefers the integrator branch") {
    const SweepReport report = paper_sweep(Suite::PhaseStepFig6);
    CHECK(report.cells.size() == 8);
    for (const SweepCheck& check : report.checks) {
        INFO(check.name, ": ", check.detail);
        CHECK(check.pass);
    }
}

TEST_CASE("optimal-design comparison") {
    const SweepReport report = paper_sweep(Suite::OptimalFig7);
    CHECK(report.cells.size() == 2);
    for (const SweepCheck& check : report.checks) {
        INFO(check.name, ": ", check.detail);
        CHECK(check.pass);
    }
}

TEST_CASE("disturbance suite stays locked") {
    const SweepReport report = paper_sweep(Suite::DisturbanceFig8);
    CHECK(report.cells.size() == 3);
    CHECK(report.all_pass());
}

TEST_CASE("estimator and suite names round-trip") {
    for (EstimatorKind kind :
         {EstimatorKind::Conventional, EstimatorKind::SrfFll0, EstimatorKind::SrfFll}) {
        CHECK(estimator_from_name(estimator_name(kind)) == kind);
    }
    for (Suite suite : {Suite::FreqStepFig5, Suite::PhaseStepFig6, Suite::OptimalFig7,
                        Suite::DisturbanceFig8}) {
        CHECK(suite_from_name(suite_name(suite)) == suite);
    }
    CHECK_THROWS_AS(estimator_from_name("nope"), ConfigError);
    CHECK_THROWS_AS(suite_from_name("nope"), ConfigError);
}
