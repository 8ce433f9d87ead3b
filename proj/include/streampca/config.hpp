#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "streampca/experiments.hpp"
#include "streampca/io.hpp"

namespace streampca {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// key = value lines grouped under [section] headers; '#' starts a comment.
// Unknown sections and keys are rejected by the consumers below, duplicates
// here.
struct KvFile {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string origin;

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        if (!has(section, key))
            throw ConfigError(origin + ": missing required key '" + key + "' in [" + section + "]");
        return sections.at(section).at(key);
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? sections.at(section).at(key) : fallback;
    }
};

inline KvFile parse_kv(const std::string& text, const std::string& origin) {
    KvFile out;
    out.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = trim(v);
        if (v.empty()) continue;
        const std::string where = origin + ": line " + std::to_string(line_no);
        if (v.front() == '[') {
            if (v.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = std::string(trim(v.substr(1, v.size() - 2)));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key(trim(v.substr(0, eq)));
        const std::string value(trim(v.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
        if (!out.sections[section].emplace(key, value).second)
            throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    }
    return out;
}

inline void reject_unknown(const KvFile& kv, const std::string& section,
                           const std::set<std::string>& allowed) {
    const auto s = kv.sections.find(section);
    if (s == kv.sections.end()) return;
    for (const auto& [key, value] : s->second)
        if (!allowed.count(key))
            throw ConfigError(kv.origin + ": unknown key '" + key + "' in [" + section + "]");
}

inline double to_double(const KvFile& kv, const std::string& section, const std::string& key) {
    try {
        return parse_double(kv.get(section, key), kv.origin);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string(e.what()) + " (key '" + key + "' in [" + section + "])");
    }
}

inline long long to_int(const KvFile& kv, const std::string& section, const std::string& key) {
    try {
        return parse_integer(kv.get(section, key), kv.origin);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string(e.what()) + " (key '" + key + "' in [" + section + "])");
    }
}

/// "name(arg)" -> {name, arg}; anything else -> nullopt signalled by empty name.
inline std::pair<std::string, std::string> split_call(std::string_view v) {
    const auto open = v.find('(');
    if (open == std::string_view::npos || v.back() != ')') return {"", ""};
    return {std::string(trim(v.substr(0, open))),
            std::string(trim(v.substr(open + 1, v.size() - open - 2)))};
}

inline Vec parse_spectrum(const std::string& value, int dim, const std::string& origin) {
    const auto [name, arg] = split_call(trim(value));
    if (!name.empty()) {
        const std::string ctx = origin + ": spectrum " + name;
        if (name == "flat") return flat_spectrum(dim, static_cast<int>(parse_integer(arg, ctx)));
        if (name == "geometric") return geometric_spectrum(dim, parse_double(arg, ctx));
        if (name == "power") return power_spectrum(dim, parse_double(arg, ctx));
        if (name == "spiked") return spiked_spectrum(dim, parse_double(arg, ctx));
        throw ConfigError(origin + ": unknown spectrum family '" + name +
                          "' (expected flat/geometric/power/spiked or an explicit list)");
    }
    Vec s;
    for (auto field : split_fields(value)) s.push_back(parse_double(field, origin + ": spectrum"));
    if (static_cast<int>(s.size()) != dim)
        throw ConfigError(origin + ": spectrum has " + std::to_string(s.size()) +
                          " entries but dim = " + std::to_string(dim));
    return s;
}

inline CovarianceModel parse_model_section(const KvFile& kv, const std::string& section) {
    reject_unknown(kv, section, {"dim", "spectrum", "rotation_seed"});
    const int dim = static_cast<int>(to_int(kv, section, "dim"));
    if (dim < 1) throw ConfigError(kv.origin + ": dim must be >= 1");
    Vec spectrum = parse_spectrum(kv.get(section, "spectrum"), dim, kv.origin);
    try {
        if (kv.has(section, "rotation_seed")) {
            const auto seed = static_cast<std::uint64_t>(to_int(kv, section, "rotation_seed"));
            return {std::move(spectrum), random_rotation(dim, seed)};
        }
        return CovarianceModel(std::move(spectrum));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(kv.origin + ": " + e.what());
    }
}

} // namespace detail

/// Model file: `dim`, `spectrum`, optional `rotation_seed` under a [model]
/// section.
inline CovarianceModel parse_model(const std::string& text, const std::string& origin = "<model>") {
    const auto kv = detail::parse_kv(text, origin);
    for (const auto& [name, keys] : kv.sections)
        if (name != "model") throw ConfigError(origin + ": unknown section [" + name + "]");
    if (!kv.sections.count("model")) throw ConfigError(origin + ": missing [model] section");
    return detail::parse_model_section(kv, "model");
}

// Full run configuration. Every field of the batch harness comes from here;
// unknown sections or keys are an error, not a warning.
inline RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>",
                                  const std::filesystem::path& base_dir = {}) {
    const auto kv = detail::parse_kv(text, origin);
    static const std::set<std::string> known_sections = {"model", "stream", "init", "schedule", "run"};
    for (const auto& [name, keys] : kv.sections)
        if (!known_sections.count(name)) throw ConfigError(origin + ": unknown section [" + name + "]");

    RunConfig config{detail::parse_model_section(kv, "model"), {}};

    detail::reject_unknown(kv, "stream", {"kind", "path", "b"});
    const std::string stream_kind = kv.get("stream", "kind");
    if (stream_kind == "rademacher") config.stream.kind = StreamKind::rademacher;
    else if (stream_kind == "eigenbasis") config.stream.kind = StreamKind::eigenbasis;
    else if (stream_kind == "file") config.stream.kind = StreamKind::file;
    else if (stream_kind == "exact") config.stream.kind = StreamKind::exact;
    else throw ConfigError(origin + ": unknown stream kind '" + stream_kind + "'");
    if (config.stream.kind == StreamKind::file) {
        if (!kv.has("stream", "path")) throw ConfigError(origin + ": file stream requires 'path'");
        std::filesystem::path p = kv.get("stream", "path");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        config.stream.path = p.string();
        if (!kv.has("stream", "b"))
            throw ConfigError(origin + ": file stream requires a declared bound 'b'");
        config.stream.declared_b = detail::to_double(kv, "stream", "b");
    } else {
        if (kv.has("stream", "path") || kv.has("stream", "b"))
            throw ConfigError(origin + ": 'path'/'b' only apply to file streams");
    }

    detail::reject_unknown(kv, "init", {"method", "t0", "warm_path"});
    const std::string method = kv.get("init", "method");
    if (method == "warm") config.init_method = InitMethod::warm;
    else if (method == "uniform") config.init_method = InitMethod::uniform;
    else if (method == "approx_power") config.init_method = InitMethod::approx_power;
    else throw ConfigError(origin + ": unknown init method '" + method + "'");
    if (config.init_method == InitMethod::approx_power) {
        config.t0 = detail::to_int(kv, "init", "t0");
        if (config.t0 < 1) throw ConfigError(origin + ": t0 must be >= 1 for approx_power");
    } else if (kv.has("init", "t0")) {
        throw ConfigError(origin + ": 't0' only applies to approx_power init");
    }
    if (config.init_method == InitMethod::warm) {
        std::filesystem::path p = kv.get("init", "warm_path");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        config.warm_vector = load_row_vector(p.string());
        if (static_cast<int>(config.warm_vector.size()) != config.model.dim())
            throw ConfigError(origin + ": warm vector has dimension " +
                              std::to_string(config.warm_vector.size()) + ", expected " +
                              std::to_string(config.model.dim()));
    } else if (kv.has("init", "warm_path")) {
        throw ConfigError(origin + ": 'warm_path' only applies to warm init");
    }

    detail::reject_unknown(kv, "schedule", {"kind", "c", "eta"});
    const std::string sched = kv.get("schedule", "kind");
    if (sched == "gap_free") config.schedule_kind = ScheduleKind::gap_free;
    else if (sched == "gap") config.schedule_kind = ScheduleKind::gap;
    else if (sched == "constant") config.schedule_kind = ScheduleKind::constant;
    else throw ConfigError(origin + ": unknown schedule kind '" + sched + "'");
    config.schedule_multiplier = kv.has("schedule", "c") ? detail::to_double(kv, "schedule", "c") : 1.0;
    if (config.schedule_kind == ScheduleKind::constant) {
        config.constant_eta = detail::to_double(kv, "schedule", "eta");
    } else if (kv.has("schedule", "eta")) {
        throw ConfigError(origin + ": explicit 'eta' only applies to the constant schedule");
    }

    detail::reject_unknown(kv, "run", {"T", "seed", "repetitions", "validation"});
    config.T = detail::to_int(kv, "run", "T");
    if (config.T < 1) throw ConfigError(origin + ": T must be >= 1");
    config.master_seed = static_cast<std::uint64_t>(detail::to_int(kv, "run", "seed"));
    config.repetitions = kv.has("run", "repetitions") ? detail::to_int(kv, "run", "repetitions") : 1;
    if (config.repetitions < 1) throw ConfigError(origin + ": repetitions must be >= 1");
    config.validation_samples = kv.has("run", "validation") ? detail::to_int(kv, "run", "validation") : 0;
    if (config.validation_samples < 0) throw ConfigError(origin + ": validation must be >= 0");

    return config;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path, std::filesystem::path(path).parent_path());
}

inline CovarianceModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_model(text.str(), path);
}

} // namespace streampca
