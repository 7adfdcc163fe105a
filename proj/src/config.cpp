#include "gridlock/config.hpp"

#include <fstream>

#include "gridlock/errors.hpp"

namespace gridlock {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key, const char* context) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(std::string(context) + ": missing field '" + key + "'");
    }
    return *it;
}

double require_number(const json& j, const char* key, const char* context) {
    const json& v = require(j, key, context);
    if (!v.is_number()) {
        throw ConfigError(std::string(context) + ": field '" + key + "' must be a number");
    }
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        return fallback;
    }
    if (!it->is_number()) {
        throw ConfigError(std::string("field '") + key + "' must be a number");
    }
    return it->get<double>();
}

} // namespace

GridScenario scenario_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("scenario: expected an object");
    }
    GridScenario s;
    const json& initial = require(j, "initial", "scenario");
    s.initial.amplitude = require_number(initial, "v", "scenario.initial");
    s.initial.frequency_hz = require_number(initial, "f_hz", "scenario.initial");
    s.initial.initial_phase = number_or(initial, "theta0_rad", 0.0);
    s.duration_s = require_number(j, "duration_s", "scenario");
    s.sample_rate_hz = require_number(j, "sample_rate_hz", "scenario");

    if (auto it = j.find("events"); it != j.end()) {
        if (!it->is_array()) {
            throw ConfigError("scenario: 'events' must be an array");
        }
        for (const json& ev : *it) {
            const double t = require_number(ev, "t_s", "scenario event");
            const std::string kind = require(ev, "kind", "scenario event").get<std::string>();
            if (kind == "freq_step") {
                s.events.push_back(
                    GridEvent::frequency_step(t, require_number(ev, "df_hz", "freq_step event")));
            } else if (kind == "phase_jump") {
                const double deg = require_number(ev, "dtheta_deg", "phase_jump event");
                s.events.push_back(GridEvent::phase_jump(t, deg * kPi / 180.0));
            } else if (kind == "amp_change") {
                s.events.push_back(
                    GridEvent::amplitude_change(t, require_number(ev, "v_new", "amp_change event")));
            } else {
                throw ConfigError("scenario event: unknown kind '" + kind + "'");
            }
        }
    }
    s.validate();
    return s;
}

json scenario_to_json(const GridScenario& s) {
    json j;
    j["initial"] = {{"v", s.initial.amplitude},
                    {"f_hz", s.initial.frequency_hz},
                    {"theta0_rad", s.initial.initial_phase}};
    j["duration_s"] = s.duration_s;
    j["sample_rate_hz"] = s.sample_rate_hz;
    j["events"] = json::array();
    for (const GridEvent& ev : s.events) {
        json e{{"t_s", ev.time_s}};
        switch (ev.kind) {
        case GridEvent::Kind::FrequencyStep:
            e["kind"] = "freq_step";
            e["df_hz"] = ev.value;
            break;
        case GridEvent::Kind::PhaseJump:
            e["kind"] = "phase_jump";
            e["dtheta_deg"] = ev.value * 180.0 / kPi;
            break;
        case GridEvent::Kind::AmplitudeChange:
            e["kind"] = "amp_change";
            e["v_new"] = ev.value;
            break;
        }
        j["events"].push_back(e);
    }
    return j;
}

FllGains gains_from_json(const json& j) {
    FllGains g;
    g.k = require_number(j, "k", "gains");
    g.d = require_number(j, "d", "gains");
    g.v_nom = number_or(j, "v_nom", 1.0);
    g.theta0_hat = number_or(j, "theta0_rad", 0.0);
    g.validate();
    return g;
}

json gains_to_json(const FllGains& g) {
    return json{{"k", g.k}, {"d", g.d}, {"v_nom", g.v_nom}, {"theta0_rad", g.theta0_hat}};
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    const std::string est = require(j, "estimator", "run config").get<std::string>();
    c.estimator = estimator_from_name(est);
    c.gains = gains_from_json(require(j, "gains", "run config"));
    c.scenario = scenario_from_json(require(j, "scenario", "run config"));
    c.warmup_s = number_or(j, "warmup_s", 0.2);
    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c) {
    json j;
    j["estimator"] = std::string(estimator_name(c.estimator));
    j["gains"] = gains_to_json(c.gains);
    j["scenario"] = scenario_to_json(c.scenario);
    j["warmup_s"] = c.warmup_s;
    return j;
}

TfKind tf_kind_from_name(std::string_view name) {
    if (name == "conv_omega") return TfKind::ConvOmega;
    if (name == "conv_theta") return TfKind::ConvTheta;
    if (name == "srf_omega") return TfKind::SrfOmega;
    if (name == "srf_omega_b") return TfKind::SrfOmegaB;
    if (name == "srf_theta_hat") return TfKind::SrfThetaHat;
    if (name == "srf_theta_e") return TfKind::SrfThetaE;
    if (name == "srf_theta_est") return TfKind::SrfThetaEst;
    throw ConfigError("unknown transfer function kind: " + std::string(name));
}

std::string_view tf_kind_name(TfKind kind) {
    switch (kind) {
    case TfKind::ConvOmega: return "conv_omega";
    case TfKind::ConvTheta: return "conv_theta";
    case TfKind::SrfOmega: return "srf_omega";
    case TfKind::SrfOmegaB: return "srf_omega_b";
    case TfKind::SrfThetaHat: return "srf_theta_hat";
    case TfKind::SrfThetaE: return "srf_theta_e";
    case TfKind::SrfThetaEst: return "srf_theta_est";
    }
    return "unknown";
}

BodeConfig bode_config_from_json(const json& j) {
    BodeConfig c;
    c.k = require_number(j, "k", "bode config");
    c.d = require_number(j, "d", "bode config");
    const json& kinds = require(j, "kinds", "bode config");
    if (!kinds.is_array() || kinds.empty()) {
        throw ConfigError("bode config: 'kinds' must be a non-empty array");
    }
    for (const json& name : kinds) {
        c.kinds.push_back(tf_kind_from_name(name.get<std::string>()));
    }
    const json& grid = require(j, "grid", "bode config");
    c.omega_min = require_number(grid, "min_rad_s", "bode grid");
    c.omega_max = require_number(grid, "max_rad_s", "bode grid");
    const double points = require_number(grid, "points", "bode grid");
    if (!(c.omega_min > 0.0) || !(c.omega_max > c.omega_min) || !(points >= 2.0)) {
        throw ConfigError("bode grid: need 0 < min < max and points >= 2");
    }
    c.points = static_cast<std::size_t>(points);
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like path.to.key=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw; // not a JSON literal; keep as string
    }

    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) {
            throw ConfigError("override has an empty path segment: " + assignment);
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

json load_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return json::parse(file);
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

} // namespace gridlock
