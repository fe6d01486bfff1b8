#pragma once

// Flat `key = value` pipeline configuration. Blank lines and lines starting
// with '#' are ignored; unknown or repeated keys are rejected.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stsad {

/// Raised for any configuration problem; the CLI maps it to exit status 1.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline const std::set<std::string> &known_config_keys() {
    static const std::set<std::string> keys{
        // general
        "output_dir", "seed", "threads", "solver",
        // solver parameters
        "theta", "lambda", "gamma", "beta1", "beta2", "beta3", "beta4", "max_iter", "tol",
        "circular_diff", "knn_k", "rank_ratio",
        // synthetic data
        "synth_dims", "synth_c", "synth_l", "synth_m", "synth_P", "noise_mean", "noise_var",
        "synth_template",
        // ingestion
        "trips_csv", "zone_list", "year", "timestamp_column", "zone_column",
        // scoring and evaluation
        "h_fraction", "k_list", "events_csv", "bench_repeats", "bench_methods"};
    return keys;
}

class PipelineConfig {
  public:
    PipelineConfig() = default;

    static PipelineConfig parse(std::istream &in, const std::string &source = "<config>") {
        PipelineConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string body = trim(line);
            if (body.empty() || body[0] == '#')
                continue;
            const auto eq = body.find('=');
            auto where = [&] { return source + ": line " + std::to_string(line_no) + ": "; };
            if (eq == std::string::npos)
                throw ConfigError(where() + "expected 'key = value'");
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (!known_config_keys().contains(key))
                throw ConfigError(where() + "unknown key '" + key + "'");
            if (!cfg.values_.emplace(key, value).second)
                throw ConfigError(where() + "key '" + key + "' given twice");
        }
        return cfg;
    }

    static PipelineConfig load(const std::filesystem::path &path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path.string() + "'");
        auto cfg = parse(in, path.string());
        cfg.base_dir_ = path.parent_path();
        return cfg;
    }

    /// Sets or replaces a value (command-line overrides).
    void set(const std::string &key, const std::string &value) {
        if (!known_config_keys().contains(key))
            throw ConfigError("unknown key '" + key + "'");
        values_[key] = value;
    }

    bool has(const std::string &key) const { return values_.contains(key); }

    const std::map<std::string, std::string> &values() const { return values_; }

    void require(const std::vector<std::string> &keys, const std::string &stage) const {
        for (const auto &k : keys)
            if (!has(k))
                throw ConfigError("stage '" + stage + "' requires config key '" + k + "'");
    }

    std::string get_string(const std::string &key, const std::string &fallback = {}) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    /// Relative paths resolve against the config file's directory.
    std::filesystem::path resolve(const std::filesystem::path &p) const {
        return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
    }

    std::filesystem::path get_path(const std::string &key) const {
        const std::string v = get_string(key);
        if (v.empty())
            throw ConfigError("config key '" + key + "' is empty");
        return resolve(v);
    }

    std::vector<std::filesystem::path> get_path_list(const std::string &key) const {
        std::vector<std::filesystem::path> out;
        for (const auto &s : get_list(key))
            out.push_back(resolve(s));
        return out;
    }

    double get_double(const std::string &key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    std::optional<double> get_optional_double(const std::string &key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            return std::nullopt;
        return to_double(key, it->second);
    }

    std::uint64_t get_uint(const std::string &key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_uint(key, it->second);
    }

    bool get_bool(const std::string &key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        const std::string &v = it->second;
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
    }

    std::vector<std::string> get_list(const std::string &key,
                                      std::vector<std::string> fallback = {}) const {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        std::vector<std::string> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ','))
            for (std::istringstream words(item); words >> item;)
                out.push_back(item);
        if (out.empty())
            throw ConfigError("config key '" + key + "' is an empty list");
        return out;
    }

    std::vector<double> get_double_list(const std::string &key,
                                        std::vector<double> fallback) const {
        if (!has(key))
            return fallback;
        std::vector<double> out;
        for (const auto &s : get_list(key))
            out.push_back(to_double(key, s));
        return out;
    }

    std::vector<std::size_t> get_uint_list(const std::string &key,
                                           std::vector<std::size_t> fallback) const {
        if (!has(key))
            return fallback;
        std::vector<std::size_t> out;
        for (const auto &s : get_list(key))
            out.push_back(static_cast<std::size_t>(to_uint(key, s)));
        return out;
    }

  private:
    static std::string trim(const std::string &s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            return {};
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    static double to_double(const std::string &key, const std::string &v) {
        char *end = nullptr;
        errno = 0;
        const double d = std::strtod(v.c_str(), &end);
        if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(d))
            throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
        return d;
    }

    static std::uint64_t to_uint(const std::string &key, const std::string &v) {
        char *end = nullptr;
        errno = 0;
        const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
        if (v.empty() || v[0] == '-' || *end != '\0' || errno != 0)
            throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" +
                              v + "'");
        return u;
    }

    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

} // namespace stsad
