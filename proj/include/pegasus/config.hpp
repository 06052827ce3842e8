#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pegasus::cfg {

// Flat `key = value` file. '#' starts a comment, blank lines are skipped,
// dotted keys act as sections (manifold.ae.lr). Duplicate keys are rejected.
// Reads are tracked so a caller can reject configs with unrecognized keys.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    // Comma-separated list, items trimmed, empty items dropped. {} if absent.
    std::vector<std::string> get_list(const std::string& key) const;

    // Keys present but never read through any getter.
    std::vector<std::string> unused_keys() const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

private:
    const std::string* find(const std::string& key) const;

    std::vector<std::pair<std::string, std::string>> entries_;  // file order
    std::map<std::string, std::size_t> index_;
    mutable std::set<std::string> used_;
    std::string origin_;
};

}  // namespace pegasus::cfg
