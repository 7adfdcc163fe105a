#pragma once

#include <string>

#include <json.hpp>

#include "gridlock/harness.hpp"
#include "gridlock/small_signal.hpp"

namespace gridlock {

// JSON schema notes: angles are degrees in fields suffixed _deg and radians
// in fields suffixed _rad. All parsers throw ConfigError on missing or
// ill-typed fields.

GridScenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const GridScenario& scenario);

FllGains gains_from_json(const nlohmann::json& j);
nlohmann::json gains_to_json(const FllGains& gains);

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);

TfKind tf_kind_from_name(std::string_view name);
std::string_view tf_kind_name(TfKind kind);

struct BodeConfig {
    double k = 120.0 * kPi;
    double d = 120.0 * kPi;
    std::vector<TfKind> kinds;
    double omega_min = 0.1;
    double omega_max = 1e4;
    std::size_t points = 200;
};

BodeConfig bode_config_from_json(const nlohmann::json& j);

/// Applies one `dotted.path=value` override onto a JSON document. The value
/// is parsed as a JSON literal when possible and falls back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

nlohmann::json load_json_file(const std::string& path);

} // namespace gridlock
