#include "hermite/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hermite/common.hpp"

namespace hermite::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
    return parts;
}

} // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        config.raw_[key] = value;
    }
    return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

void RunConfig::set(const std::string& key, const std::string& value) { raw_[key] = value; }

void RunConfig::apply_env_overrides(const std::set<std::string>& allowed) {
    for (const auto& key : allowed) {
        std::string env_name = "HERMITE_";
        for (char c : key) env_name += static_cast<char>(std::toupper(c));
        if (const char* v = std::getenv(env_name.c_str())) raw_[key] = v;
    }
}

void RunConfig::require_known(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : raw_)
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + key + "'");
}

bool RunConfig::has(const std::string& key) const { return raw_.count(key) > 0; }

std::string RunConfig::raw_or_default(const std::string& key, const std::string& fallback) {
    auto it = raw_.find(key);
    const std::string value = it == raw_.end() ? fallback : it->second;
    resolved_[key] = value;
    return value;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) {
    return raw_or_default(key, fallback);
}

std::string RunConfig::peek_string(const std::string& key, const std::string& fallback) const {
    auto it = raw_.find(key);
    return it == raw_.end() ? fallback : it->second;
}

std::string RunConfig::need_string(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) throw ConfigError("missing required config key '" + key + "'");
    resolved_[key] = it->second;
    return it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) {
    const std::string v = raw_or_default(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const double parsed = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as real");
    }
}

int RunConfig::get_int(const std::string& key, int fallback) {
    const std::string v = raw_or_default(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const long parsed = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(parsed);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as integer");
    }
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) {
    const std::string v = raw_or_default(key, std::to_string(fallback));
    try {
        std::size_t pos = 0;
        const unsigned long long parsed = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as u64");
    }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) {
    const std::string v = raw_or_default(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as boolean");
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key,
                                                  const std::string& fallback) {
    const std::string v = raw_or_default(key, fallback);
    std::vector<std::size_t> out;
    for (const auto& part : split_list(v)) {
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(part)));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad list element '" + part + "'");
        }
    }
    return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key,
                                               const std::string& fallback) {
    const std::string v = raw_or_default(key, fallback);
    std::vector<double> out;
    for (const auto& part : split_list(v)) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad list element '" + part + "'");
        }
    }
    return out;
}

std::vector<std::uint64_t> RunConfig::get_u64_list(const std::string& key,
                                                   const std::string& fallback) {
    const std::string v = raw_or_default(key, fallback);
    std::vector<std::uint64_t> out;
    for (const auto& part : split_list(v)) {
        try {
            out.push_back(std::stoull(part));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad list element '" + part + "'");
        }
    }
    return out;
}

std::string RunConfig::resolved_text() const {
    std::string out;
    for (const auto& [key, value] : resolved_) out += key + " = " + value + "\n";
    return out;
}

} // namespace hermite::cfg
