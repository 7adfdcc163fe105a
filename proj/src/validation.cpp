#include "gridlock/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "gridlock/errors.hpp"
#include "gridlock/harness.hpp"
#include "gridlock/small_signal.hpp"

namespace gridlock {

namespace {

constexpr double kK = 120.0 * kPi;
constexpr double kEvent = 0.25;
constexpr double kDuration = 0.6;

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

RunConfig make_config(EstimatorKind kind, double d, const GridScenario& scenario,
                      double theta0_hat = 0.0) {
    RunConfig c;
    c.estimator = kind;
    c.gains = FllGains{kK, d, 1.0, theta0_hat};
    c.scenario = scenario;
    c.warmup_s = 0.2;
    return c;
}

/// Max deviation of a trace channel from the oracle step response
/// pre + step * h(t - t_event), over [t_event, t_event + window].
double max_oracle_error(const RunTrace& trace, Channel channel, const RationalTf& tf,
                        double t_event, double window, double pre, double step) {
    const std::size_t start = trace.index_at(t_event);
    const std::size_t stop = std::min(trace.size(), trace.index_at(t_event + window) + 1);
    std::vector<double> times;
    times.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) {
        times.push_back(trace.time[i] - trace.time[start]);
    }
    const std::vector<double> oracle = step_response(tf, times);
    double worst = 0.0;
    for (std::size_t i = start; i < stop; ++i) {
        const double expect = pre + step * oracle[i - start];
        worst = std::max(worst, std::abs(channel_value(trace.outputs[i], channel) - expect));
    }
    return worst;
}

CriterionResult criterion_equivalence() {
    CriterionResult r{"equivalence", false, ""};
    const double step = kTwoPi * 5.0;
    const double limit = 0.005 * step;

    auto diff_at = [&](double rate) {
        const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEvent, kDuration, rate);
        const RunTrace conv = run(make_config(EstimatorKind::Conventional, 0.5 * kK, scenario));
        const RunTrace srf0 = run(make_config(EstimatorKind::SrfFll0, 0.5 * kK, scenario));
        return compare_traces(conv, srf0, Channel::OmegaHat);
    };

    const double diff_coarse = diff_at(10000.0);
    const double diff_fine = diff_at(20000.0);
    const double ratio = diff_coarse / diff_fine;
    r.passed = diff_coarse < limit && ratio >= 1.8;
    r.detail = "max|dw| = " + fmt(diff_coarse) + " rad/s (limit " + fmt(limit) +
               "), Ts-halving ratio = " + fmt(ratio, 3) + " (need >= 1.8)";
    return r;
}

CriterionResult criterion_first_order_law() {
    CriterionResult r{"first_order_law", false, ""};
    const double step = kTwoPi * 5.0;
    const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEvent, kDuration);
    const RunTrace trace = run(make_config(EstimatorKind::SrfFll, kK, scenario));

    const double err = max_oracle_error(trace, Channel::OmegaHat, build_tf(TfKind::SrfOmega, kK, kK),
                                        kEvent, 0.2, kTwoPi * 60.0, step);
    const StepMetrics m = step_metrics(trace, Channel::OmegaHat, kEvent, kTwoPi * 65.0, step);
    const double expected_settling = std::log(50.0) / kK;

    const bool err_ok = err < 0.02 * step;
    const bool settle_ok =
        m.settled && std::abs(m.settling_time_s - expected_settling) <= 0.2 * expected_settling;
    r.passed = err_ok && settle_ok;
    r.detail = "max oracle error = " + fmt(100.0 * err / step, 3) + "% of step (limit 2%), settling = " +
               fmt(m.settling_time_s * 1e3, 4) + " ms (expect " + fmt(expected_settling * 1e3, 4) +
               " ms +-20%)";
    return r;
}

CriterionResult criterion_second_order_law() {
    CriterionResult r{"second_order_law", false, ""};
    const double step = kTwoPi * 5.0;
    const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEvent, kDuration);
    const RunTrace trace = run(make_config(EstimatorKind::SrfFll, kK, scenario));

    const double err = max_oracle_error(trace, Channel::OmegaB, build_tf(TfKind::SrfOmegaB, kK, kK),
                                        kEvent, 0.2, kTwoPi * 60.0, step);
    const StepMetrics m = step_metrics(trace, Channel::OmegaB, kEvent, kTwoPi * 65.0, step);

    r.passed = err < 0.02 * step && m.overshoot_pct < 1.0;
    r.detail = "max oracle error = " + fmt(100.0 * err / step, 3) + "% of step (limit 2%), overshoot = " +
               fmt(m.overshoot_pct, 3) + "% (limit 1%)";
    return r;
}

CriterionResult criterion_optimal_conventional() {
    CriterionResult r{"optimal_conventional", false, ""};
    const double step = kTwoPi * 5.0;
    const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEvent, kDuration);

    struct Case {
        double d_over_k;
        double expected_pct;
        double tol_pct;
    };
    const Case cases[] = {{0.5, overshoot_percent(std::sqrt(0.5)), 1.5},
                          {1.0, overshoot_percent(0.5), 2.0},
                          {2.0, overshoot_percent(0.5 / std::sqrt(2.0)), 3.0}};

    bool all_ok = true;
    std::string detail;
    for (const Case& c : cases) {
        const RunTrace trace =
            run(make_config(EstimatorKind::Conventional, c.d_over_k * kK, scenario));
        const StepMetrics m = step_metrics(trace, Channel::OmegaHat, kEvent, kTwoPi * 65.0, step);
        const bool ok = std::abs(m.overshoot_pct - c.expected_pct) <= c.tol_pct;
        all_ok &= ok;
        detail += "d=" + fmt(c.d_over_k, 3) + "k: " + fmt(m.overshoot_pct, 3) + "% (expect " +
                  fmt(c.expected_pct, 3) + " +-" + fmt(c.tol_pct, 2) + "); ";
    }
    r.passed = all_ok;
    r.detail = detail;
    return r;
}

CriterionResult criterion_damping_non_deterioration() {
    CriterionResult r{"damping_non_deterioration", false, ""};
    const double step = kTwoPi * 5.0;
    const GridScenario scenario = freq_step_scenario(60.0, 5.0, kEvent, kDuration);
    const double grid[] = {0.25, 0.5, 1.0, 2.0};

    bool overshoot_ok = true;
    bool settling_ok = true;
    double prev_settling = 0.0;
    std::string detail;
    for (double ratio : grid) {
        const RunTrace trace = run(make_config(EstimatorKind::SrfFll, ratio * kK, scenario));
        const StepMetrics m = step_metrics(trace, Channel::OmegaB, kEvent, kTwoPi * 65.0, step);
        overshoot_ok &= m.overshoot_pct < 1.0;
        if (ratio > 0.25 && ratio <= 1.0) {
            settling_ok &= m.settling_time_s < prev_settling;
        }
        prev_settling = m.settling_time_s;
        detail += "d=" + fmt(ratio, 3) + "k: overshoot " + fmt(m.overshoot_pct, 3) +
                  "%, settling " + fmt(m.settling_time_s * 1e3, 4) + " ms; ";
    }
    r.passed = overshoot_ok && settling_ok;
    r.detail = detail;
    return r;
}

CriterionResult criterion_steady_state_aux() {
    CriterionResult r{"steady_state_aux", false, ""};
    const double omega_e = kTwoPi * 5.0;
    const Complex expected = steady_state_aux(kK, omega_e, 1.0);
    const Complex simulated = frozen_loop_aux(kK, omega_e, 1.0, 1e-4, 10.0 / kK);

    const double err_re = std::abs(simulated.real() - expected.real()) / std::abs(expected.real());
    const double err_im = std::abs(simulated.imag() - expected.imag()) / std::abs(expected.imag());
    r.passed = err_re < 1e-3 && err_im < 1e-3;
    r.detail = "simulated " + fmt(simulated.real(), 6) + " + j" + fmt(simulated.imag(), 6) +
               " vs " + fmt(expected.real(), 6) + " + j" + fmt(expected.imag(), 6) +
               "; rel errors " + fmt(err_re, 3) + ", " + fmt(err_im, 3) + " (limit 1e-3)";
    return r;
}

CriterionResult criterion_bode_comparison() {
    CriterionResult r{"bode_comparison", false, ""};
    const RationalTf conv = build_tf(TfKind::ConvOmega, kK, kK);
    const RationalTf srf_b = build_tf(TfKind::SrfOmegaB, kK, kK);

    const double mag_conv = bode_magnitude(conv, {kK})[0];
    const double mag_srf = bode_magnitude(srf_b, {kK})[0];
    const bool point_ok = std::abs(mag_srf - 0.5) < 1e-9 && std::abs(mag_conv - 1.0) < 1e-9;

    bool ordered = true;
    for (double w : log_spaced(kK, 100.0 * kK, 200)) {
        const double a = bode_magnitude(srf_b, {w})[0];
        const double b = bode_magnitude(conv, {w})[0];
        ordered &= a <= b + 1e-12;
    }
    r.passed = point_ok && ordered;
    r.detail = "|SrfOmegaB(jk)| = " + fmt(mag_srf, 10) + ", |ConvOmega(jk)| = " + fmt(mag_conv, 10) +
               "; ordering above k " + (ordered ? "holds" : "violated");
    return r;
}

CriterionResult criterion_phase_step() {
    CriterionResult r{"phase_step", false, ""};
    const double dtheta = 20.0 * kPi / 180.0;
    const GridScenario scenario = phase_jump_scenario(60.0, dtheta, kEvent, kDuration);
    const RunTrace trace = run(make_config(EstimatorKind::SrfFll, kK, scenario));
    const double omega_true = kTwoPi * 60.0;

    double peak_hat = 0.0;
    double peak_b = 0.0;
    for (std::size_t i = trace.index_at(kEvent); i < trace.size(); ++i) {
        peak_hat = std::max(peak_hat, std::abs(trace.outputs[i].omega_hat - omega_true));
        peak_b = std::max(peak_b, std::abs(trace.outputs[i].omega_b - omega_true));
    }
    const double expected_spike = kK * std::sin(dtheta); // d/V * V sin(20 deg)
    const bool spike_ok = std::abs(peak_hat - expected_spike) <= 0.05 * expected_spike;
    const bool branch_ok = peak_b < peak_hat;

    double worst_angle = 0.0;
    for (std::size_t i = trace.index_at(kEvent + 0.1); i < trace.size(); ++i) {
        worst_angle = std::max(
            worst_angle, std::abs(wrap_angle(trace.outputs[i].theta_est - trace.truth[i].theta)));
    }
    const bool relock_ok = worst_angle < 0.5 * kPi / 180.0;

    r.passed = spike_ok && branch_ok && relock_ok;
    r.detail = "omega_hat spike " + fmt(peak_hat, 5) + " rad/s (expect " + fmt(expected_spike, 5) +
               " +-5%); omega_b peak " + fmt(peak_b, 5) + "; theta_est error after 0.1 s = " +
               fmt(worst_angle * 180.0 / kPi, 4) + " deg (limit 0.5)";
    return r;
}

CriterionResult criterion_synchronized_output() {
    CriterionResult r{"synchronized_output", false, ""};
    const double restore = kEvent + 0.15;
    const std::vector<GridScenario> scenarios = {
        freq_step_scenario(60.0, 5.0, kEvent, kDuration),
        freq_step_scenario(60.0, -5.0, kEvent, kDuration),
        phase_jump_scenario(60.0, 20.0 * kPi / 180.0, kEvent, kDuration),
        amplitude_sag_scenario(60.0, 0.5, kEvent, restore, 0.8),
    };
    const double theta0s[] = {0.0, kPi / 4.0, -kPi / 2.0};

    bool all_ok = true;
    double worst = 0.0;
    for (double theta0 : theta0s) {
        for (const GridScenario& scenario : scenarios) {
            const RunTrace trace =
                run(make_config(EstimatorKind::SrfFll, kK, scenario, theta0));
            const FllOutputs& last = trace.outputs.back();
            const double v_final = trace.truth.back().v;
            const double err = std::max(std::abs(last.u_dq_est.real() - v_final),
                                        std::abs(last.u_dq_est.imag()));
            worst = std::max(worst, err);
            all_ok &= err < 1e-3;
        }
    }
    r.passed = all_ok;
    r.detail = "worst per-component |u_dqest - (V + j0)| = " + fmt(worst, 4) +
               " over 4 scenarios x theta0 in {0, pi/4, -pi/2} (limit 1e-3)";
    return r;
}

CriterionResult criterion_guideline_grid() {
    CriterionResult r{"guideline_grid", false, ""};
    std::mt19937 rng(20240611u);
    std::uniform_real_distribution<double> k_dist(40.0 * kPi, 400.0 * kPi);
    std::uniform_real_distribution<double> ratio_dist(0.05, 4.0);

    const double tol = 1e-9;
    bool all_ok = true;
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const double k = k_dist(rng);
        const double d = ratio_dist(rng) * k;
        const auto ch = characteristic(build_tf(TfKind::ConvOmega, k, d));
        const double zeta = ch.zeta.value();

        const bool regime1 = d <= 0.25 * k * (1.0 + tol);
        const bool regime2 = d <= 0.5 * k * (1.0 + tol);
        const bool z1 = zeta >= 1.0 - tol;
        const bool z2 = zeta >= 1.0 / std::sqrt(2.0) - tol;
        all_ok &= (regime1 == z1) && (regime2 == z2);
        ++checked;
    }
    // The advertised boundary points must land in their regimes exactly.
    const double k = kK;
    all_ok &= characteristic(build_tf(TfKind::ConvOmega, k, 0.25 * k)).zeta.value() >= 1.0 - tol;
    all_ok &= characteristic(build_tf(TfKind::ConvOmega, k, 0.5 * k)).zeta.value() >=
              1.0 / std::sqrt(2.0) - tol;

    r.passed = all_ok;
    r.detail = fmt(checked, 3) + " random (k, d) pairs plus boundary points, tolerance 1e-9";
    return r;
}

CriterionResult criterion_robustness() {
    CriterionResult r{"robustness", false, ""};
    const double restore = kEvent + 0.15;
    const GridScenario scenario = amplitude_sag_scenario(60.0, 0.5, kEvent, restore, 0.8);

    try {
        const RunTrace trace = run(make_config(EstimatorKind::SrfFll, kK, scenario));
        double worst_omega = 0.0;
        double worst_sync = 0.0;
        for (std::size_t i = trace.index_at(kEvent + 0.3); i < trace.size(); ++i) {
            worst_omega =
                std::max(worst_omega, std::abs(trace.outputs[i].omega_hat - trace.truth[i].omega));
            const double err = std::max(
                std::abs(trace.outputs[i].u_dq_est.real() - trace.truth[i].v),
                std::abs(trace.outputs[i].u_dq_est.imag()));
            worst_sync = std::max(worst_sync, err);
        }
        r.passed = worst_omega < 1e-3 && worst_sync < 1e-3;
        r.detail = "sag to 0.5 pu: |w err| = " + fmt(worst_omega, 4) + " rad/s, |sync err| = " +
                   fmt(worst_sync, 4) + " from 0.3 s after the sag (limits 1e-3); all states finite";
    } catch (const DivergenceError& e) {
        r.passed = false;
        r.detail = std::string("diverged: ") + e.what();
    }
    return r;
}

struct Criterion {
    const char* name;
    std::function<CriterionResult()> fn;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {"equivalence", criterion_equivalence},
        {"first_order_law", criterion_first_order_law},
        {"second_order_law", criterion_second_order_law},
        {"optimal_conventional", criterion_optimal_conventional},
        {"damping_non_deterioration", criterion_damping_non_deterioration},
        {"steady_state_aux", criterion_steady_state_aux},
        {"bode_comparison", criterion_bode_comparison},
        {"phase_step", criterion_phase_step},
        {"synchronized_output", criterion_synchronized_output},
        {"guideline_grid", criterion_guideline_grid},
        {"robustness", criterion_robustness},
    };
    return list;
}

} // namespace

std::vector<std::string> criterion_names() {
    std::vector<std::string> names;
    names.reserve(criteria().size());
    for (const Criterion& c : criteria()) {
        names.emplace_back(c.name);
    }
    return names;
}

std::vector<CriterionResult> run_acceptance(const std::vector<std::string>& filter) {
    for (const std::string& name : filter) {
        const bool known = std::any_of(criteria().begin(), criteria().end(),
                                       [&](const Criterion& c) { return name == c.name; });
        if (!known) {
            throw ConfigError("unknown criterion: " + name);
        }
    }

    std::vector<CriterionResult> results;
    for (const Criterion& c : criteria()) {
        if (!filter.empty() &&
            std::find(filter.begin(), filter.end(), c.name) == filter.end()) {
            continue;
        }
        results.push_back(c.fn());
    }
    return results;
}

} // namespace gridlock
