#pragma once

// Flat scenario files: one `dotted.key = value` per line, `#` starts a
// comment. Lists are comma separated. Keys are unique.

#include "cangle/errors.hpp"
#include "cangle/types.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace cangle::cli {

[[noreturn]] inline void config_error(const std::string& what) { throw GeometryError(ErrorCode::ConfigError, what); }

inline std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(t.c_str(), &end);
    return errno == 0 && end == t.c_str() + t.size() && std::isfinite(out);
}

class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static Config parse(const std::string& text, const std::string& source = "<string>") {
        Config c;
        c.source_ = source;
        std::istringstream is(text);
        std::string raw;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string::npos) {
                config_error(source + ":" + std::to_string(line) + ": expected 'key = value', got '" + body + "'");
            }
            const std::string key = trim(body.substr(0, eq));
            if (!valid_key(key)) config_error(source + ":" + std::to_string(line) + ": malformed key '" + key + "'");
            if (c.entries_.count(key)) {
                config_error(source + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
            }
            c.entries_[key] = {trim(body.substr(eq + 1)), line};
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) config_error("cannot read config '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    const std::string& source() const { return source_; }
    const std::map<std::string, Entry>& entries() const { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) {
        if (!valid_key(key)) config_error("malformed key '" + key + "'");
        entries_[key] = {value, 0};
    }

    std::string str(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) config_error("missing key '" + key + "'");
        return it->second.value;
    }

    std::string str(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }

    double number(const std::string& key) const {
        double x = 0.0;
        if (!parse_double(str(key), x)) bad(key, "a number");
        return x;
    }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const std::string v = str(key);
        int x = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "an integer");
        return x;
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = str(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        bad(key, "true or false");
    }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        const std::string v = str(key);
        if (trim(v).empty()) return out;
        for (const auto& item : split(v, ',')) {
            double x = 0.0;
            if (!parse_double(item, x)) bad(key, "a comma-separated list of numbers");
            out.push_back(x);
        }
        return out;
    }

    std::vector<std::string> words(const std::string& key) const {
        std::vector<std::string> out;
        if (!has(key)) return out;
        for (auto& item : split(str(key), ',')) {
            if (item.empty()) bad(key, "a comma-separated list of names");
            out.push_back(item);
        }
        return out;
    }

    template <int N>
    Vec<N> vec(const std::string& key, const Vec<N>& fallback) const {
        if (!has(key)) return fallback;
        const auto xs = numbers(key);
        if (xs.size() != static_cast<std::size_t>(N)) bad(key, std::to_string(N) + " numbers");
        Vec<N> out;
        for (int k = 0; k < N; ++k) out[k] = xs[k];
        return out;
    }

    [[noreturn]] void bad(const std::string& key, const std::string& expected) const {
        const auto it = entries_.find(key);
        std::string where = source_;
        if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
        config_error(where + ": key '" + key + "': expected " + expected + ", got '" +
                     (it == entries_.end() ? std::string() : it->second.value) + "'");
    }

private:
    static bool valid_key(const std::string& key) {
        if (key.empty() || key.front() == '.' || key.back() == '.') return false;
        for (char c : key) {
            const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
            if (!ok) return false;
        }
        return key.find("..") == std::string::npos;
    }

    std::string source_;
    std::map<std::string, Entry> entries_;
};

}  // namespace cangle::cli
