#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "mcflab/types.hpp"

namespace mcflab {

// Run configuration: scenario + operation + numeric overrides. Every field
// left unset falls back to the scenario registry defaults.
struct RunConfig {
    std::string scenario;
    std::string operation = "all";  // certify-stability | certify-barrier | flow | uniqueness | all
    std::uint64_t seed = 0;
    std::string out_dir = "runs/out";

    std::optional<int> sigma_samples;
    std::optional<double> margin;

    std::optional<double> epsilon1;
    std::optional<double> safety;

    std::optional<double> dt_safety;
    std::optional<double> t_end;
    std::optional<int> resample_every;
    std::optional<int> record_every;
    std::optional<double> hausdorff_tol;
    std::optional<double> meanH_tol;
    std::optional<double> amplitude;
    std::optional<int> snapshot_every;

    std::optional<int> seeds;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double x = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid numeric value for '" + key + "': " + val);
    }
}

inline long parse_int(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const long x = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer value for '" + key + "': " + val);
    }
}

}  // namespace detail

// Applies one dotted key (e.g. "flow.dt_safety") with range validation.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_double;
    using detail::parse_int;
    auto positive = [&](double v) {
        if (!(v > 0)) throw ConfigError("'" + key + "' must be positive");
        return v;
    };
    if (key == "scenario") {
        cfg.scenario = value;
    } else if (key == "operation") {
        if (value != "certify-stability" && value != "certify-barrier" && value != "flow" &&
            value != "uniqueness" && value != "all")
            throw ConfigError("'operation' must be one of certify-stability, certify-barrier, "
                              "flow, uniqueness, all");
        cfg.operation = value;
    } else if (key == "seed") {
        const long v = parse_int(key, value);
        if (v < 0) throw ConfigError("'seed' must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "stability.margin") {
        cfg.margin = positive(parse_double(key, value));
    } else if (key == "stability.samples" || key == "sigma.samples") {
        const long v = parse_int(key, value);
        if (v < 8 || v > 2048) throw ConfigError("'" + key + "' must lie in [8, 2048]");
        cfg.sigma_samples = static_cast<int>(v);
    } else if (key == "barrier.epsilon1") {
        cfg.epsilon1 = positive(parse_double(key, value));
    } else if (key == "barrier.safety") {
        const double v = parse_double(key, value);
        if (!(v >= 0 && v < 1)) throw ConfigError("'barrier.safety' must lie in [0, 1)");
        cfg.safety = v;
    } else if (key == "flow.dt_safety") {
        const double v = parse_double(key, value);
        if (!(v > 0 && v <= 1.0)) throw ConfigError("'flow.dt_safety' must lie in (0, 1]");
        cfg.dt_safety = v;
    } else if (key == "flow.t_end") {
        cfg.t_end = positive(parse_double(key, value));
    } else if (key == "flow.resample_every") {
        const long v = parse_int(key, value);
        if (v < 1) throw ConfigError("'flow.resample_every' must be >= 1");
        cfg.resample_every = static_cast<int>(v);
    } else if (key == "flow.record_every") {
        const long v = parse_int(key, value);
        if (v < 1) throw ConfigError("'flow.record_every' must be >= 1");
        cfg.record_every = static_cast<int>(v);
    } else if (key == "flow.hausdorff_tol") {
        cfg.hausdorff_tol = positive(parse_double(key, value));
    } else if (key == "flow.mean_curvature_tol") {
        cfg.meanH_tol = positive(parse_double(key, value));
    } else if (key == "flow.amplitude") {
        const double v = parse_double(key, value);
        if (v < 0) throw ConfigError("'flow.amplitude' must be >= 0");
        cfg.amplitude = v;
    } else if (key == "flow.snapshot_every") {
        const long v = parse_int(key, value);
        if (v < 0) throw ConfigError("'flow.snapshot_every' must be >= 0");
        cfg.snapshot_every = static_cast<int>(v);
    } else if (key == "uniqueness.seeds") {
        const long v = parse_int(key, value);
        if (v < 1 || v > 1000) throw ConfigError("'uniqueness.seeds' must lie in [1, 1000]");
        cfg.seeds = static_cast<int>(v);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

// Flat key-value text with [sections]; '#' and ';' start comments.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "stability" && section != "barrier" && section != "flow" &&
                section != "uniqueness" && section != "sigma")
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        const std::string dotted = section.empty() ? key : section + "." + key;
        try {
            apply_config_key(cfg, dotted, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (cfg.scenario.empty()) throw ConfigError("config must name a scenario");
    return cfg;
}

// "key=value" form used by --override.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must have the form key=value: " + assignment);
    apply_config_key(cfg, detail::trim(assignment.substr(0, eq)),
                     detail::trim(assignment.substr(eq + 1)));
}

}  // namespace mcflab
