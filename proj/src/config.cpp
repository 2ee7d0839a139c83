#include "cesis/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cesis/error.hpp"

namespace cesis {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_string(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.find(key) != entries_.end();
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto v = find(key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    double x = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError(key + ": not a number: '" + *v + "'");
    return x;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    long x = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError(key + ": not an integer: '" + *v + "'");
    return static_cast<int>(x);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    char* end = nullptr;
    unsigned long long x = std::strtoull(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
        throw ConfigError(key + ": not an unsigned integer: '" + *v + "'");
    return static_cast<std::uint64_t>(x);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(key + ": not a boolean: '" + *v + "'");
}

std::string KeyValueConfig::require_string(const std::string& key) const {
    auto v = find(key);
    if (!v) throw ConfigError("missing required config key: " + key);
    return *v;
}

double KeyValueConfig::require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required config key: " + key);
    return get_double(key, 0.0);
}

int KeyValueConfig::require_int(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required config key: " + key);
    return get_int(key, 0);
}

}  // namespace cesis
