#include "mmspc/config.hpp"
#include "mmspc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mmspc {

std::string to_string(Method m) {
    switch (m) {
        case Method::Proposed:
            return "proposed";
        case Method::Reference:
            return "reference";
        case Method::ProposedSensorless:
            return "proposed-sensorless";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "proposed") return Method::Proposed;
    if (text == "reference") return Method::Reference;
    if (text == "proposed-sensorless") return Method::ProposedSensorless;
    throw ConfigError("unknown method \"" + std::string(text) +
                      "\" (expected proposed, reference or proposed-sensorless)");
}

std::string to_string(DemandMode m) {
    return m == DemandMode::EqualShare ? "equal-share" : "soc-proportional";
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v, const std::string& key) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a number, got \"" + std::string(v) + "\"");
    }
    return out;
}

long long to_integer(std::string_view v, const std::string& key) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(key + ": expected an integer, got \"" + std::string(v) + "\"");
    }
    return out;
}

bool to_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got \"" + std::string(v) + "\"");
}

std::vector<double> to_list(std::string_view v, const std::string& key) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(to_double(trim(v.substr(0, comma)), key));
        if (comma == std::string_view::npos) {
            break;
        }
        v.remove_prefix(comma + 1);
    }
    if (out.empty()) {
        throw ConfigError(key + ": empty list");
    }
    return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto num = [&t](const char* key, double ScenarioConfig::*field) {
            t[key] = [field](ScenarioConfig& c, std::string_view v, const std::string& k) {
                c.*field = to_double(v, k);
            };
        };
        num("run.duration_s", &ScenarioConfig::duration);
        num("control.sensorless_phase_shift", &ScenarioConfig::sensorless_phase_shift);
        num("battery.capacity_ah", &ScenarioConfig::capacity_ah);
        num("battery.r_b", &ScenarioConfig::r_b);
        num("battery.soc_jitter", &ScenarioConfig::soc_jitter);
        num("interconnect.r_sh", &ScenarioConfig::r_sh);
        num("interconnect.r_sl", &ScenarioConfig::r_sl);
        num("interconnect.r_jitter", &ScenarioConfig::r_jitter);
        num("analysis.lag_min_s", &ScenarioConfig::lag_min);
        num("analysis.lag_max_s", &ScenarioConfig::lag_max);
        num("randles.f_min", &ScenarioConfig::randles_f_min);
        num("randles.f_max", &ScenarioConfig::randles_f_max);

        auto sub = [&t](const char* key, auto member, auto field) {
            t[key] = [member, field](ScenarioConfig& c, std::string_view v, const std::string& k) {
                (c.*member).*field = to_double(v, k);
            };
        };
        sub("waveform.f_out", &ScenarioConfig::waveform, &WaveformSpec::f_out);
        sub("waveform.f_rate", &ScenarioConfig::waveform, &WaveformSpec::f_rate);
        sub("waveform.m", &ScenarioConfig::waveform, &WaveformSpec::m);
        sub("waveform.i_pk", &ScenarioConfig::waveform, &WaveformSpec::i_pk);
        sub("waveform.phi", &ScenarioConfig::waveform, &WaveformSpec::phi);
        sub("control.kp", &ScenarioConfig::proposed, &ProposedSettings::kp);
        sub("control.ki", &ScenarioConfig::proposed, &ProposedSettings::ki);
        sub("control.ki_sensorless", &ScenarioConfig::proposed, &ProposedSettings::ki_sensorless);
        sub("control.anti_windup", &ScenarioConfig::proposed, &ProposedSettings::anti_windup);
        sub("control.anti_windup_sensorless", &ScenarioConfig::proposed,
            &ProposedSettings::anti_windup_sensorless);
        sub("control.feedback_delay_s", &ScenarioConfig::proposed, &ProposedSettings::feedback_delay);
        sub("control.beta", &ScenarioConfig::proposed, &ProposedSettings::beta);
        sub("observer.threshold_v", &ScenarioConfig::proposed, &ProposedSettings::lut_threshold);
        sub("observer.reference_current", &ScenarioConfig::proposed, &ProposedSettings::lut_current);
        sub("reference.update_period_s", &ScenarioConfig::reference, &ReferenceSettings::update_period);
        sub("reference.soc_delay_s", &ScenarioConfig::reference, &ReferenceSettings::soc_delay);
        sub("battery.v_min", &ScenarioConfig::ocv, &OcvMap::v_min);
        sub("battery.v_max", &ScenarioConfig::ocv, &OcvMap::v_max);
        sub("randles.r0", &ScenarioConfig::randles, &RandlesParams::r0);
        sub("randles.rct", &ScenarioConfig::randles, &RandlesParams::rct);
        sub("randles.cdl", &ScenarioConfig::randles, &RandlesParams::cdl);
        sub("randles.sigma_w", &ScenarioConfig::randles, &RandlesParams::sigma_w);

        t["modules.count"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.n_modules = static_cast<int>(to_integer(v, k));
        };
        t["run.method"] = [](ScenarioConfig& c, std::string_view v, const std::string&) {
            c.method = parse_method(v);
        };
        t["run.seed"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            const auto s = to_integer(v, k);
            if (s < 0) throw ConfigError(k + ": must be nonnegative");
            c.seed = static_cast<std::uint64_t>(s);
        };
        t["run.target_module"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            const auto m = to_integer(v, k);
            if (m < 1) throw ConfigError(k + ": modules are numbered from 1");
            c.target_module = static_cast<std::size_t>(m - 1);
        };
        t["control.toggle_limit"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.proposed.toggle_limit = static_cast<int>(to_integer(v, k));
        };
        t["control.regroup"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.proposed.regroup = to_bool(v, k);
        };
        t["control.demand_mode"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            if (v == "equal-share") {
                c.proposed.demand_mode = DemandMode::EqualShare;
            } else if (v == "soc-proportional") {
                c.proposed.demand_mode = DemandMode::SocProportional;
            } else {
                throw ConfigError(k + ": expected equal-share or soc-proportional");
            }
        };
        t["observer.adaptive"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.proposed.adaptive_lut = to_bool(v, k);
        };
        t["battery.soc"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.initial_soc = to_list(v, k);
        };
        t["analysis.cutoffs_hz"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.cutoffs = to_list(v, k);
        };
        t["sweep.m_values"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.sweep_m = to_list(v, k);
        };
        t["randles.points"] = [](ScenarioConfig& c, std::string_view v, const std::string& k) {
            c.randles_points = static_cast<int>(to_integer(v, k));
        };
        return t;
    }();
    return table;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) {
        keys.push_back(k);
    }
    return keys;
}

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
        }
        try {
            it->second(base, value, key);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void ScenarioConfig::validate() const {
    if (n_modules < 2 || n_modules > 8) {
        throw ConfigError("modules.count must lie in [2, 8]");
    }
    try {
        waveform.validate();
        randles.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(duration > 0.0)) {
        throw ConfigError("run.duration_s must be positive");
    }
    const double periods = duration * waveform.f_out;
    if (std::abs(periods - std::round(periods)) > 1e-9 * std::max(1.0, periods)) {
        throw ConfigError("run.duration_s must cover a whole number of load periods");
    }
    const double per_period = waveform.f_rate / waveform.f_out;
    if (std::abs(per_period - std::round(per_period)) > 1e-9 * per_period) {
        throw ConfigError("waveform.f_rate must be an integer multiple of waveform.f_out");
    }
    if (target_module >= static_cast<std::size_t>(n_modules)) {
        throw ConfigError("run.target_module outside the string");
    }
    if (!initial_soc.empty() && initial_soc.size() != static_cast<std::size_t>(n_modules)) {
        throw ConfigError("battery.soc needs one entry per module");
    }
    for (double s : initial_soc) {
        if (s < 0.0 || s > 1.0) throw ConfigError("battery.soc entries must lie in [0, 1]");
    }
    if (!(capacity_ah > 0.0) || !(r_b > 0.0) || !(r_sh > 0.0) || !(r_sl > 0.0)) {
        throw ConfigError("capacity and resistances must be positive");
    }
    if (!(ocv.v_max > ocv.v_min)) {
        throw ConfigError("battery.v_max must exceed battery.v_min");
    }
    if (soc_jitter < 0.0 || r_jitter < 0.0 || r_jitter >= 1.0) {
        throw ConfigError("jitter amplitudes must be nonnegative (relative jitter below 1)");
    }
    if (proposed.toggle_limit < 1) {
        throw ConfigError("control.toggle_limit must be >= 1");
    }
    if (proposed.kp < 0.0 || proposed.ki < 0.0 || proposed.ki_sensorless < 0.0 ||
        !(proposed.anti_windup > 0.0) || !(proposed.anti_windup_sensorless > 0.0)) {
        throw ConfigError("controller gains must be nonnegative and limits positive");
    }
    if (proposed.feedback_delay < 0.0 || reference.soc_delay < 0.0) {
        throw ConfigError("delays must be nonnegative");
    }
    if (!(reference.update_period > 0.0)) {
        throw ConfigError("reference.update_period_s must be positive");
    }
    if (!(proposed.lut_threshold > 0.0) || !(proposed.lut_current > 0.0)) {
        throw ConfigError("observer threshold and reference current must be positive");
    }
    if (cutoffs.empty()) {
        throw ConfigError("analysis.cutoffs_hz must not be empty");
    }
    for (double fc : cutoffs) {
        if (!(fc > 0.0) || !(fc < 0.5 * waveform.f_rate)) {
            throw ConfigError("cut-offs must lie in (0, f_rate / 2)");
        }
    }
    if (!(lag_min >= 0.0) || !(lag_max > lag_min) || lag_max >= duration) {
        throw ConfigError("analysis lag window must satisfy 0 <= min < max < duration");
    }
    for (double m : sweep_m) {
        if (m < 0.0 || m > 1.0) throw ConfigError("sweep.m_values entries must lie in [0, 1]");
    }
    if (!(randles_f_min > 0.0) || !(randles_f_max > randles_f_min) || randles_points < 2) {
        throw ConfigError("randles sweep needs 0 < f_min < f_max and at least 2 points");
    }
}

std::size_t ScenarioConfig::tick_count() const {
    return static_cast<std::size_t>(std::llround(duration * waveform.f_rate));
}

std::size_t ScenarioConfig::period_ticks() const {
    return static_cast<std::size_t>(std::llround(waveform.f_rate / waveform.f_out));
}

}  // namespace mmspc
