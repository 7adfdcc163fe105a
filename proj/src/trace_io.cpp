#include "gridlock/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gridlock/errors.hpp"

namespace gridlock {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

constexpr char kTraceHeader[] =
    "t,u_alpha,u_beta,u_d,u_q,uhat_d,uhat_q,omega_hat,omega_b,theta_hat,theta_e_hat,"
    "theta_est,ud_est,uq_est,x_aI,e_q,true_omega,true_theta,true_v";

void append(std::string& out, double v) {
    out += format_double(v);
    out += ',';
}

} // namespace

std::string trace_csv(const RunTrace& trace) {
    std::string out;
    out.reserve(64 + trace.size() * 19 * 26);
    out += kTraceHeader;
    out += '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const FllOutputs& o = trace.outputs[i];
        const GroundTruth& g = trace.truth[i];
        // Reconstruct the alpha-beta input from the ground truth (exact: the
        // synthesizer produced it from the same V and theta).
        append(out, trace.time[i]);
        append(out, g.v * std::cos(g.theta));
        append(out, g.v * std::sin(g.theta));
        append(out, o.u_dq.real());
        append(out, o.u_dq.imag());
        append(out, o.u_hat_dq.real());
        append(out, o.u_hat_dq.imag());
        append(out, o.omega_hat);
        append(out, o.omega_b);
        append(out, o.theta_hat);
        append(out, o.theta_e_hat);
        append(out, o.theta_est);
        append(out, o.u_dq_est.real());
        append(out, o.u_dq_est.imag());
        append(out, o.x_a.imag());
        append(out, o.e_q);
        append(out, g.omega);
        append(out, g.theta);
        out += format_double(g.v);
        out += '\n';
    }
    return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "suite,estimator,d_over_k,channel,settling_time_s,overshoot_pct,"
                      "peak_value,peak_time_s,steady_state_error\n";
    for (const MetricsRow& r : rows) {
        out += r.suite;
        out += ',';
        out += r.estimator;
        out += ',';
        append(out, r.d_over_k);
        out += r.channel;
        out += ',';
        // An unsettled channel reports nan; the residual sits in steady_state_error.
        out += r.metrics.settled ? format_double(r.metrics.settling_time_s) : "nan";
        out += ',';
        append(out, r.metrics.overshoot_pct);
        append(out, r.metrics.peak_value);
        append(out, r.metrics.peak_time_s);
        out += format_double(r.metrics.steady_state_error);
        out += '\n';
    }
    return out;
}

std::string bode_csv(const std::vector<BodeRow>& rows) {
    std::string out = "omega_rad_s,kind,magnitude,magnitude_db\n";
    for (const BodeRow& r : rows) {
        append(out, r.omega);
        out += r.kind;
        out += ',';
        append(out, r.magnitude);
        out += format_double(20.0 * std::log10(r.magnitude));
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ConfigError("cannot open for writing: " + path);
    }
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!file) {
        throw ConfigError("write failed: " + path);
    }
}

std::vector<MetricsRow> sweep_metrics_rows(const SweepReport& report) {
    std::vector<MetricsRow> rows;
    rows.reserve(report.cells.size() * 2);
    for (const SweepCell& cell : report.cells) {
        MetricsRow base;
        base.suite = cell.suite_tag;
        base.estimator = std::string(estimator_name(cell.estimator));
        base.d_over_k = cell.d_over_k;

        MetricsRow hat = base;
        hat.channel = "omega_hat";
        hat.metrics = cell.omega_hat_metrics;
        rows.push_back(hat);

        MetricsRow b = base;
        b.channel = "omega_b";
        b.metrics = cell.omega_b_metrics;
        rows.push_back(b);
    }
    return rows;
}

} // namespace gridlock
