#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace pdlab::config {

/// Malformed or unknown configuration entry. `line` is 0 for command-line
/// overrides.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& key, const std::string& what)
        : std::runtime_error(format(source, line, key, what)), line_(line), key_(key) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& source, int line, const std::string& key, const std::string& what) {
        std::string s = source;
        if (line > 0) s += ":" + std::to_string(line);
        if (!key.empty()) s += ": key '" + key + "'";
        return s + ": " + what;
    }

    int line_;
    std::string key_;
};

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Parses a plain number, or a multiple of pi written as "pi", "-pi",
/// "pi/2", "0.5*pi", "3*pi/4". Throws std::invalid_argument.
[[nodiscard]] inline double parse_number(std::string_view text) {
    const std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty value");
    const auto pi_at = s.find("pi");
    if (pi_at == std::string::npos) {
        double v = 0.0;
        const auto* end = s.data() + s.size();
        auto [p, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc() || p != end || !std::isfinite(v)) throw std::invalid_argument("not a number: " + s);
        return v;
    }
    std::string pre = trim(std::string_view(s).substr(0, pi_at));
    std::string post = trim(std::string_view(s).substr(pi_at + 2));
    double factor = 1.0;
    if (pre == "-") factor = -1.0;
    else if (!pre.empty()) {
        if (pre.back() != '*') throw std::invalid_argument("bad multiple of pi: " + s);
        factor = parse_number(std::string_view(pre).substr(0, pre.size() - 1));
    }
    double divisor = 1.0;
    if (!post.empty()) {
        if (post.front() != '/') throw std::invalid_argument("bad multiple of pi: " + s);
        divisor = parse_number(std::string_view(post).substr(1));
        if (divisor == 0.0) throw std::invalid_argument("division by zero: " + s);
    }
    return factor * std::numbers::pi / divisor;
}

/// Comma-separated values, each either a number or a range "a:b:step"
/// (inclusive of b up to rounding).
[[nodiscard]] inline std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::invalid_argument("empty list item");
        const auto c1 = item.find(':');
        if (c1 == std::string::npos) {
            out.push_back(parse_number(item));
            continue;
        }
        const auto c2 = item.find(':', c1 + 1);
        if (c2 == std::string::npos) throw std::invalid_argument("range needs a:b:step");
        const double a = parse_number(item.substr(0, c1));
        const double b = parse_number(item.substr(c1 + 1, c2 - c1 - 1));
        const double st = parse_number(item.substr(c2 + 1));
        if (!(st > 0.0) || b < a) throw std::invalid_argument("range needs a <= b and step > 0");
        const long count = static_cast<long>(std::floor((b - a) / st + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * st);
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

/// Spin magnitude l given as "1", "1.5" or "3/2"; returns 2l.
[[nodiscard]] inline int parse_twice_l(std::string_view text) {
    const std::string s = trim(text);
    double v = 0.0;
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        if (trim(s.substr(slash + 1)) != "2") throw std::invalid_argument("l must be a multiple of 1/2");
        v = parse_number(s.substr(0, slash)) / 2.0;
    } else {
        v = parse_number(s);
    }
    const double t = 2.0 * v;
    if (t < 1.0 || t != std::nearbyint(t) || t > 1000.0) throw std::invalid_argument("l must be a positive multiple of 1/2");
    return static_cast<int>(t);
}

/// key = value entries with '#' comments. Every key must be consumed or
/// declared by the caller; `reject_unknown` turns leftovers into errors.
class Config {
public:
    struct Entry {
        std::string value;
        int line;
    };

    Config() = default;
    explicit Config(std::string source) : source_(std::move(source)) {}

    [[nodiscard]] static Config parse(std::istream& in, const std::string& source) {
        Config c(source);
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
            const std::string text = trim(raw);
            if (text.empty()) continue;
            c.add(text, line);
        }
        return c;
    }

    [[nodiscard]] static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, 0, "", "cannot open config file");
        return parse(in, path);
    }

    /// Adds "key=value"; `line` 0 marks an override, which may replace an
    /// earlier entry. Duplicate keys inside a file are errors.
    void add(const std::string& text, int line) {
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(source_, line, "", "expected key=value, got '" + text + "'");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw ConfigError(source_, line, "", "empty key");
        if (!std::all_of(key.begin(), key.end(), [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }))
            throw ConfigError(source_, line, key, "invalid key name");
        if (line > 0 && entries_.count(key)) throw ConfigError(source_, line, key, "duplicate key");
        entries_[key] = {value, line};
    }

    [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }
    [[nodiscard]] const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    [[nodiscard]] std::string str(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    [[nodiscard]] std::string str(const std::string& key) const { return at(key).value; }

    [[nodiscard]] double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    [[nodiscard]] double number(const std::string& key) const {
        return convert(key, [](const std::string& v) { return parse_number(v); });
    }

    [[nodiscard]] long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }
    [[nodiscard]] long integer(const std::string& key) const {
        return convert(key, [](const std::string& v) {
            long out = 0;
            const auto* end = v.data() + v.size();
            auto [p, ec] = std::from_chars(v.data(), end, out);
            if (ec != std::errc() || p != end) throw std::invalid_argument("not an integer: " + v);
            return out;
        });
    }

    [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        return convert(key, [](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw std::invalid_argument("not a boolean: " + v);
        });
    }

    [[nodiscard]] std::vector<double> list(const std::string& key) const {
        return convert(key, [](const std::string& v) { return parse_list(v); });
    }
    [[nodiscard]] std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
        return has(key) ? list(key) : fallback;
    }

    [[nodiscard]] int twice_l(const std::string& key) const {
        return convert(key, [](const std::string& v) { return parse_twice_l(v); });
    }

    /// Spin list such as "1, 3/2, 2" or "1:2.5:0.5"; returns 2l values.
    [[nodiscard]] std::vector<int> twice_l_list(const std::string& key) const {
        return convert(key, [](const std::string& v) {
            std::vector<int> out;
            if (v.find(':') != std::string::npos) {
                for (double x : parse_list(v)) out.push_back(parse_twice_l(std::to_string(x)));
                return out;
            }
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_twice_l(item));
            if (out.empty()) throw std::invalid_argument("empty list");
            return out;
        });
    }

    /// Throws ConfigError for the first key not in `allowed`.
    void reject_unknown(const std::set<std::string>& allowed) const {
        for (const auto& [key, e] : entries_)
            if (!allowed.count(key)) throw ConfigError(source_, e.line, key, "unknown key");
    }

    [[nodiscard]] ConfigError error(const std::string& key, const std::string& what) const {
        auto it = entries_.find(key);
        return ConfigError(source_, it == entries_.end() ? 0 : it->second.line, key, what);
    }

private:
    [[nodiscard]] const Entry& at(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError(source_, 0, key, "missing required key");
        return it->second;
    }

    template <class F>
    std::invoke_result_t<F&, const std::string&> convert(const std::string& key, F&& f) const {
        const Entry& e = at(key);
        try {
            return f(e.value);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(source_, e.line, key, ex.what());
        }
    }

    std::string source_ = "<config>";
    std::map<std::string, Entry> entries_;
};

}  // namespace pdlab::config
