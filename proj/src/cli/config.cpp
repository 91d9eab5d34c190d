#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "qtk/cli.hpp"

namespace qtk::cli {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (l == "inf" || l == "+inf" || l == "infinity") {
        out = INFINITY;
        return true;
    }
    if (l.find("nan") != std::string::npos) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno == 0;
}

bool parse_int(const std::string& s, long long& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtoll(s.c_str(), &end, 10);
    return end == s.c_str() + s.size() && errno == 0;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtoull(s.c_str(), &end, 10);
    return end == s.c_str() + s.size() && errno == 0;
}

const char* type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "an integer";
        case ValueType::UInt64: return "a nonnegative 64-bit integer";
        case ValueType::Double: return "a number";
        case ValueType::DoubleList: return "a comma-separated list of numbers";
        case ValueType::IntList: return "a comma-separated list of integers";
        case ValueType::String: return "a string";
    }
    return "";
}

bool type_ok(ValueType t, const std::string& v) {
    double d;
    long long i;
    std::uint64_t u;
    switch (t) {
        case ValueType::Int: return parse_int(v, i);
        case ValueType::UInt64: return parse_u64(v, u);
        case ValueType::Double: return parse_double(v, d);
        case ValueType::DoubleList: {
            auto items = split_list(v);
            return !items.empty() && std::all_of(items.begin(), items.end(), [&](auto& x) { return parse_double(x, d); });
        }
        case ValueType::IntList: {
            auto items = split_list(v);
            return !items.empty() && std::all_of(items.begin(), items.end(), [&](auto& x) { return parse_int(x, i); });
        }
        case ValueType::String: return true;
    }
    return false;
}

std::vector<KeySpec> with_run(std::vector<KeySpec> keys) {
    keys.push_back({"seed", ValueType::UInt64, std::nullopt, "run"});
    keys.push_back({"out", ValueType::String, "", "run"});
    return keys;
}

std::vector<KeySpec> chain_keys(const std::string& N) {
    return {{"N", ValueType::Int, N.empty() ? std::nullopt : std::optional<std::string>(N), "model"},
            {"energy_unit", ValueType::Double, "1", "model"},
            {"h_goe", ValueType::Double, "2", "model"},
            {"h_mbl", ValueType::Double, "20", "model"}};
}

std::vector<KeySpec> concat(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

const std::map<std::string, std::vector<KeySpec>>& schemas() {
    static const std::map<std::string, std::vector<KeySpec>> s = {
        {"engine-sweep", with_run(concat(chain_keys(""), {
                                             {"wb_over_delta", ValueType::DoubleList, std::nullopt, "model"},
                                             {"beta_c", ValueType::Double, "inf", "model"},
                                             {"beta_h", ValueType::Double, "0", "model"},
                                             {"realizations", ValueType::Int, "1000", "run"},
                                         }))},
        {"engine-diabatic", with_run(concat(chain_keys("8"), {
                                                {"wb_over_delta", ValueType::Double, std::nullopt, "model"},
                                                {"steps", ValueType::IntList, std::nullopt, "model"},
                                                {"dt_times_gap", ValueType::Double, "0.405", "model"},
                                                {"beta_c", ValueType::Double, "inf", "model"},
                                                {"beta_h", ValueType::Double, "0", "model"},
                                                {"realizations", ValueType::Int, "1000", "run"},
                                                {"repulsion_realizations", ValueType::Int, "3000", "run"},
                                            }))},
        {"gapstats", with_run({
                         {"N", ValueType::Int, "10", "model"},
                         {"h", ValueType::Double, std::nullopt, "model"},
                         {"energy_unit", ValueType::Double, "1", "model"},
                         {"window_fraction", ValueType::Double, "0.66666666666666663", "model"},
                         {"realizations", ValueType::Int, "200", "run"},
                     })},
        {"otoc", with_run({
                     {"N", ValueType::Int, "10", "model"},
                     {"J", ValueType::Double, "1", "model"},
                     {"h", ValueType::Double, "0.5", "model"},
                     {"g", ValueType::Double, "1.05", "model"},
                     {"t_max", ValueType::Double, std::nullopt, "model"},
                     {"t_step", ValueType::Double, std::nullopt, "model"},
                 })},
        {"brownian", with_run({
                         {"N", ValueType::Int, "4", "model"},
                         {"dt", ValueType::Double, "5e-4", "model"},
                         {"t_max", ValueType::Double, std::nullopt, "model"},
                         {"t_step", ValueType::Double, std::nullopt, "model"},
                         {"integrator", ValueType::String, "exponential", "model"},
                         {"projection_interval", ValueType::Int, "100", "run"},
                         {"shots", ValueType::Int, "2000", "run"},
                     })},
        {"nats-audit", with_run({
                           {"N_min", ValueType::Int, "2", "model"},
                           {"N_max", ValueType::Int, "6", "model"},
                           {"v", ValueType::DoubleList, std::nullopt, "model"},
                           {"eta", ValueType::Double, std::nullopt, "model"},
                           {"eta_scaling", ValueType::String, "sqrt", "model"},
                           {"alphas", ValueType::DoubleList, "0,0.5,1,2", "model"},
                           {"channels", ValueType::Int, "100", "run"},
                       })},
    };
    return s;
}

}  // namespace

RawConfig parse_raw(const std::string& text) {
    RawConfig raw;
    raw.text = text;
    std::stringstream ss(text);
    std::string line, section;
    int n = 0;
    while (std::getline(ss, line)) {
        ++n;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(at_line(n) + "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError(at_line(n) + "empty section name");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(at_line(n) + "expected key = value");
        std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(at_line(n) + "empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        std::string full = section.empty() ? key : section + "." + key;
        if (raw.entries.count(full))
            throw ConfigError(at_line(n) + "duplicate key '" + full + "' (first set on line " +
                              std::to_string(raw.entries[full].line) + ")");
        raw.entries[full] = {value, n};
    }
    return raw;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (auto& [k, _] : schemas()) v.push_back(k);
        return v;
    }();
    return names;
}

const std::vector<KeySpec>& schema(const std::string& subcommand) {
    auto it = schemas().find(subcommand);
    if (it == schemas().end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
    return it->second;
}

JobConfig parse_config(const std::string& subcommand, const std::string& text,
                       const std::map<std::string, std::string>& overrides) {
    const auto& keys = schema(subcommand);
    RawConfig raw = parse_raw(text);
    JobConfig cfg;
    cfg.subcommand = subcommand;
    cfg.text = text;
    std::map<std::string, const KeySpec*> lookup;
    for (const KeySpec& k : keys) {
        lookup[k.name] = &k;
        lookup[k.section + "." + k.name] = &k;
    }
    std::map<std::string, int> seen;
    for (auto& [full, entry] : raw.entries) {
        auto it = lookup.find(full);
        if (it == lookup.end()) throw ConfigError(at_line(entry.line) + "unknown key '" + full + "' for " + subcommand);
        const KeySpec& k = *it->second;
        if (seen.count(k.name))
            throw ConfigError(at_line(entry.line) + "key '" + k.name + "' already set on line " +
                              std::to_string(seen[k.name]));
        seen[k.name] = entry.line;
        if (!type_ok(k.type, entry.value))
            throw ConfigError(at_line(entry.line) + "key '" + k.name + "': expected " + type_name(k.type) + ", got '" +
                              entry.value + "'");
        cfg.resolved[k.name] = entry.value;
    }
    for (auto& [key, value] : overrides) {
        auto it = lookup.find(key);
        if (it == lookup.end()) throw ConfigError("unknown override '" + key + "' for " + subcommand);
        if (!type_ok(it->second->type, value))
            throw ConfigError("override '" + key + "': expected " + type_name(it->second->type) + ", got '" + value + "'");
        cfg.resolved[it->second->name] = value;
    }
    for (const KeySpec& k : keys) {
        if (cfg.resolved.count(k.name)) continue;
        if (!k.fallback) throw ConfigError("missing required key '" + k.name + "' for " + subcommand);
        cfg.resolved[k.name] = *k.fallback;
    }
    return cfg;
}

namespace {

const std::string& lookup_key(const JobConfig& c, const std::string& key) {
    auto it = c.resolved.find(key);
    if (it == c.resolved.end()) throw ConfigError("internal: key '" + key + "' not in schema");
    return it->second;
}

}  // namespace

double JobConfig::number(const std::string& key) const {
    double d;
    if (!parse_double(lookup_key(*this, key), d)) throw ConfigError("key '" + key + "': expected a number");
    return d;
}

long long JobConfig::integer(const std::string& key) const {
    long long i;
    if (!parse_int(lookup_key(*this, key), i)) throw ConfigError("key '" + key + "': expected an integer");
    return i;
}

std::uint64_t JobConfig::u64(const std::string& key) const {
    std::uint64_t u;
    if (!parse_u64(lookup_key(*this, key), u)) throw ConfigError("key '" + key + "': expected an unsigned integer");
    return u;
}

std::vector<double> JobConfig::numbers(const std::string& key) const {
    std::vector<double> out;
    for (auto& s : split_list(lookup_key(*this, key))) {
        double d;
        if (!parse_double(s, d)) throw ConfigError("key '" + key + "': expected numbers");
        out.push_back(d);
    }
    return out;
}

std::vector<long long> JobConfig::integers(const std::string& key) const {
    std::vector<long long> out;
    for (auto& s : split_list(lookup_key(*this, key))) {
        long long i;
        if (!parse_int(s, i)) throw ConfigError("key '" + key + "': expected integers");
        out.push_back(i);
    }
    return out;
}

const std::string& JobConfig::string(const std::string& key) const { return lookup_key(*this, key); }

}  // namespace qtk::cli
