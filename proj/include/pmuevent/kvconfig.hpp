#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"

namespace pmuevent {

// Minimal key-value config format: `key = value` lines, `#` comments,
// optional `[section]` headers that prefix following keys as `section.key`.
// Values stay strings; typed getters convert on demand.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse_text(const std::string& text, const std::string& origin = "<string>") {
        KvConfig cfg;
        std::istringstream is(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[' && s.back() == ']') {
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KvConfig parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open config file: " + path);
        std::ostringstream os;
        os << is.rdbuf();
        return parse_text(os.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return to_double(it->second, key);
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        long v = 0;
        auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
        if (ec != std::errc() || p != it->second.data() + it->second.size())
            throw ConfigError("key '" + key + "': not an integer: " + it->second);
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("key '" + key + "': not a boolean: " + it->second);
    }

    // Comma-separated integer list, e.g. layer widths.
    std::vector<std::size_t> get_size_list(const std::string& key, std::vector<std::size_t> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::size_t> out;
        std::istringstream is(it->second);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = strip(tok);
            if (tok.empty()) continue;
            long v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || v <= 0)
                throw ConfigError("key '" + key + "': bad list entry: " + tok);
            out.push_back(static_cast<std::size_t>(v));
        }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::istringstream is(it->second);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = strip(tok);
            if (tok.empty()) continue;
            out.push_back(to_double(tok, key));
        }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Rejects keys outside the allowed set; unknown keys are usually typos.
    void require_known_keys(const std::set<std::string>& allowed) const {
        for (const auto& [key, _] : values_)
            if (!allowed.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string strip(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double to_double(const std::string& s, const std::string& key) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw ConfigError("key '" + key + "': not a number: " + s);
        return v;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace pmuevent
