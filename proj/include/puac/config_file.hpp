#pragma once
// Plain-text configuration files: `key = value` lines grouped under
// `[table]` headers, `#` comments. Values are numbers, booleans, quoted
// strings, or flat arrays of numbers. Keys are addressed as "table.key".

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace puac {

class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_array(const std::string& key) const;
    std::vector<double> get_array(const std::string& key,
                                  const std::vector<double>& fallback) const;

    void set(const std::string& key, const std::string& raw_value);

    // Canonical "key = value" dump, keys sorted; used for manifests and for
    // the run-directory hash.
    std::string canonical() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_; // raw value text per flat key
};

std::uint64_t fnv1a64(const std::string& text);

} // namespace puac
