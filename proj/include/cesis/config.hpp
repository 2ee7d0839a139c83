#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace cesis {

// Flat key-value configuration: one `dotted.key = value` pair per line,
// '#' starts a comment, blank lines ignored. Later assignments override
// earlier ones, which lets CLI flags overlay a file.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::string require_string(const std::string& key) const;
    double require_double(const std::string& key) const;
    int require_int(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::optional<std::string> find(const std::string& key) const;

    std::map<std::string, std::string> entries_;
};

}  // namespace cesis
