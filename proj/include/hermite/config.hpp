#ifndef HERMITE_CONFIG_HPP
#define HERMITE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hermite/common.hpp"

namespace hermite::cfg {

/// Flat `key = value` run configuration. Precedence: command-line overrides >
/// HERMITE_<KEY> environment variables > config file > built-in defaults.
/// Every key that a run reads lands in the resolved dump, defaults included;
/// keys nobody reads are rejected up front.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_text(const std::string& text);

    /// Overlay `key=value` pairs given on the command line.
    void set(const std::string& key, const std::string& value);

    /// Apply HERMITE_<UPPER_KEY> environment overrides for the allowed keys.
    void apply_env_overrides(const std::set<std::string>& allowed);

    /// Reject any raw key not in the allowed set.
    void require_known(const std::set<std::string>& allowed) const;

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<std::size_t> get_size_list(const std::string& key, const std::string& fallback);
    std::vector<double> get_double_list(const std::string& key, const std::string& fallback);
    std::vector<std::uint64_t> get_u64_list(const std::string& key, const std::string& fallback);

    /// Required variants (no default makes sense).
    std::string need_string(const std::string& key);

    /// Read without recording into the resolved dump (used for the output
    /// location, which is not part of the run's identity).
    std::string peek_string(const std::string& key, const std::string& fallback) const;

    /// `key = value` lines, sorted, for the resolved dump.
    std::string resolved_text() const;

private:
    std::string raw_or_default(const std::string& key, const std::string& fallback);

    std::map<std::string, std::string> raw_;
    mutable std::map<std::string, std::string> resolved_;
};

} // namespace hermite::cfg

#endif
