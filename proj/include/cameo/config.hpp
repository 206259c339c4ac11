#pragma once

#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cameo/analytics.hpp"
#include "cameo/detector.hpp"
#include "cameo/ingest.hpp"
#include "cameo/synthgen.hpp"

namespace cameo {

// Fully resolved run settings. Defaults follow the published values
// where one exists (alpha/beta 0.5, thresholds 0.9/0.9, cutoff 300 s,
// group limit 10); everything is overridable by config file or flag.
struct RunConfig {
    FilterConfig filter;
    LoadOptions load;
    SynthConfig synth;

    std::string events_path;
    std::string roster_path;
    std::string detections_path;
    std::string truth_path;
    std::string out_dir = "out";

    double sweep_max_seconds = 3600.0;
    double sweep_step_seconds = 30.0;
    std::vector<std::size_t> cert_thresholds = default_cert_thresholds();

    std::uint64_t seed = 0;
    unsigned jobs = 0;  // 0 = all available cores
    bool export_ip_groups = false;
};

namespace detail {

inline bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") { out = true; return true; }
    if (v == "false" || v == "0") { out = false; return true; }
    return false;
}

template <typename T>
bool parse_number(const std::string& v, T& out) {
    std::istringstream in(v);
    T parsed{};
    in >> parsed;
    if (in.fail() || !(in >> std::ws).eof()) return false;
    out = parsed;
    return true;
}

inline bool parse_thresholds(const std::string& v, std::vector<std::size_t>& out) {
    std::vector<std::size_t> parsed;
    std::istringstream in(v);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        std::size_t n;
        if (!parse_number(tok, n)) return false;
        parsed.push_back(n);
    }
    if (parsed.empty()) return false;
    out = std::move(parsed);
    return true;
}

}  // namespace detail

// One settable key. Keeping apply and print in a single table means
// --print-config can never drift from what the parser accepts.
struct ConfigKey {
    std::string name;
    std::function<bool(RunConfig&, const std::string&)> apply;
    std::function<std::string(const RunConfig&)> print;
};

inline const std::vector<ConfigKey>& config_keys() {
    using detail::parse_bool;
    using detail::parse_number;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        auto add = [&k](const std::string& name, auto apply, auto print) {
            k.push_back({name,
                         [apply](RunConfig& c, const std::string& v) { return apply(c, v); },
                         [print](const RunConfig& c) {
                             std::ostringstream out;
                             out << std::setprecision(15) << print(c);
                             return out.str();
                         }});
        };
        auto add_num = [&add](const std::string& name, auto ptr) {
            add(name,
                [ptr](RunConfig& c, const std::string& v) { return parse_number(v, c.*ptr); },
                [ptr](const RunConfig& c) { return c.*ptr; });
        };
        auto add_str = [&add](const std::string& name, auto ptr) {
            add(name,
                [ptr](RunConfig& c, const std::string& v) {
                    c.*ptr = v;
                    return true;
                },
                [ptr](const RunConfig& c) { return c.*ptr; });
        };
        auto add_bool = [&add](const std::string& name, auto get, auto set) {
            add(name,
                [set](RunConfig& c, const std::string& v) {
                    bool b;
                    if (!parse_bool(v, b)) return false;
                    set(c, b);
                    return true;
                },
                [get](const RunConfig& c) { return get(c) ? "true" : "false"; });
        };

        add("alpha",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.prior.alpha);
            },
            [](const RunConfig& c) { return c.filter.prior.alpha; });
        add("beta",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.prior.beta);
            },
            [](const RunConfig& c) { return c.filter.prior.beta; });
        add("pi_threshold",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.criterion.pi_threshold);
            },
            [](const RunConfig& c) { return c.filter.criterion.pi_threshold; });
        add("confidence",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.criterion.confidence);
            },
            [](const RunConfig& c) { return c.filter.criterion.confidence; });
        add("percentile_q",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.percentile_q);
            },
            [](const RunConfig& c) { return c.filter.percentile_q; });
        add("cutoff_seconds",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.cutoff_seconds);
            },
            [](const RunConfig& c) { return c.filter.cutoff_seconds; });
        add("max_group_accounts",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.max_group_accounts);
            },
            [](const RunConfig& c) { return c.filter.max_group_accounts; });
        add_bool(
            "group_exclude_at_threshold",
            [](const RunConfig& c) { return c.filter.group_exclude_at_threshold; },
            [](RunConfig& c, bool b) { c.filter.group_exclude_at_threshold = b; });
        add("min_common_items",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.filter.min_common_items);
            },
            [](const RunConfig& c) { return c.filter.min_common_items; });
        add("timestamp_policy",
            [](RunConfig& c, const std::string& v) {
                if (v == "earliest") c.filter.timestamp_policy = TimestampPolicy::Earliest;
                else if (v == "latest") c.filter.timestamp_policy = TimestampPolicy::Latest;
                else return false;
                return true;
            },
            [](const RunConfig& c) {
                return std::string(c.filter.timestamp_policy == TimestampPolicy::Earliest
                                       ? "earliest"
                                       : "latest");
            });
        add("max_error_rate",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.load.max_error_rate);
            },
            [](const RunConfig& c) { return c.load.max_error_rate; });

        add_str("events", &RunConfig::events_path);
        add_str("roster", &RunConfig::roster_path);
        add_str("detections", &RunConfig::detections_path);
        add_str("truth", &RunConfig::truth_path);
        add_str("out", &RunConfig::out_dir);

        add_num("sweep_max_seconds", &RunConfig::sweep_max_seconds);
        add_num("sweep_step_seconds", &RunConfig::sweep_step_seconds);
        add("cert_thresholds",
            [](RunConfig& c, const std::string& v) {
                return detail::parse_thresholds(v, c.cert_thresholds);
            },
            [](const RunConfig& c) {
                std::ostringstream out;
                for (std::size_t i = 0; i < c.cert_thresholds.size(); ++i)
                    out << (i ? "," : "") << c.cert_thresholds[i];
                return out.str();
            });

        add_num("seed", &RunConfig::seed);
        add_num("jobs", &RunConfig::jobs);
        add_bool(
            "export_ip_groups", [](const RunConfig& c) { return c.export_ip_groups; },
            [](RunConfig& c, bool b) { c.export_ip_groups = b; });

        auto add_synth = [&add](const std::string& name, auto ptr) {
            add(name,
                [ptr](RunConfig& c, const std::string& v) {
                    return parse_number(v, c.synth.*ptr);
                },
                [ptr](const RunConfig& c) { return c.synth.*ptr; });
        };
        add_synth("synth_courses", &SynthConfig::courses);
        add_synth("synth_items", &SynthConfig::items_per_course);
        add_synth("synth_benign_independent", &SynthConfig::benign_independent);
        add_synth("synth_benign_synchronized", &SynthConfig::benign_synchronized);
        add_synth("synth_benign_offset", &SynthConfig::benign_offset);
        add_synth("synth_cafe_accounts", &SynthConfig::cafe_accounts);
        add_synth("synth_cameo_pairs", &SynthConfig::cameo_pairs);
        add_synth("synth_cameo_items", &SynthConfig::cameo_items);
        add_synth("synth_window_seconds", &SynthConfig::window_seconds);
        add_synth("synth_participation", &SynthConfig::participation);
        add_synth("synth_sync_jitter_seconds", &SynthConfig::sync_jitter_seconds);
        add_synth("synth_offset_seconds", &SynthConfig::offset_seconds);
        add_synth("synth_offset_jitter_seconds", &SynthConfig::offset_jitter_seconds);
        add("synth_lag_mean_seconds",
            [](RunConfig& c, const std::string& v) {
                return parse_number(v, c.synth.lag.seconds);
            },
            [](const RunConfig& c) { return c.synth.lag.seconds; });
        add("synth_lag_kind",
            [](RunConfig& c, const std::string& v) {
                if (v == "exponential") c.synth.lag.kind = LagDistribution::Kind::Exponential;
                else if (v == "fixed") c.synth.lag.kind = LagDistribution::Kind::Fixed;
                else return false;
                return true;
            },
            [](const RunConfig& c) {
                return std::string(c.synth.lag.kind == LagDistribution::Kind::Exponential
                                       ? "exponential"
                                       : "fixed");
            });
        return k;
    }();
    return keys;
}

// Sets one key; returns false when the key is unknown, throws when the
// value does not parse.
inline bool apply_config_value(RunConfig& config, const std::string& key,
                               const std::string& value) {
    for (const ConfigKey& entry : config_keys()) {
        if (entry.name != key) continue;
        if (!entry.apply(config, value))
            throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
        return true;
    }
    return false;
}

// Flat `key = value` lines with # comments. Unknown keys are collected
// and reported together.
inline void load_config_file(std::istream& in, RunConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> unknown;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (!apply_config_value(config, key, value)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& key : unknown) msg += ' ' + key;
        throw std::invalid_argument(msg);
    }
}

inline void print_config(std::ostream& out, const RunConfig& config) {
    for (const ConfigKey& entry : config_keys())
        out << entry.name << " = " << entry.print(config) << '\n';
}

}  // namespace cameo
