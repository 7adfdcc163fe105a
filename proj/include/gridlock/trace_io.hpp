#pragma once

#include <string>
#include <vector>

#include "gridlock/harness.hpp"
#include "gridlock/small_signal.hpp"

namespace gridlock {

/// Round-trip-exact, locale-independent decimal rendering (17 significant
/// digits via to_chars).
std::string format_double(double value);

/// One metrics.csv row.
struct MetricsRow {
    std::string suite;
    std::string estimator;
    double d_over_k = 1.0;
    std::string channel;
    StepMetrics metrics;
};

std::string trace_csv(const RunTrace& trace);
std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct BodeRow {
    double omega = 0.0;
    std::string kind;
    double magnitude = 0.0;
};

std::string bode_csv(const std::vector<BodeRow>& rows);

/// Writes atomically: the full content is assembled first, then written in
/// one pass so failures never leave partial files.
void write_file(const std::string& path, const std::string& content);

std::vector<MetricsRow> sweep_metrics_rows(const SweepReport& report);

} // namespace gridlock
