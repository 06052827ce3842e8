#include "pegasus/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "pegasus/errors.hpp"
#include "pegasus/text.hpp"

namespace pegasus::cfg {

namespace {

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                        c == '-';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config out;
    out.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = [&] { return origin + ":" + std::to_string(lineno); };
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;

        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw InvalidConfig(where() + ": expected 'key = value'");
        const std::string key(trim(view.substr(0, eq)));
        const std::string value(trim(view.substr(eq + 1)));
        if (!valid_key(key))
            throw InvalidConfig(where() + ": bad key '" + key + "'");
        if (out.index_.count(key))
            throw InvalidConfig(where() + ": duplicate key '" + key + "'");
        out.index_[key] = out.entries_.size();
        out.entries_.emplace_back(key, value);
    }
    return out;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

const std::string* Config::find(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    used_.insert(key);
    return &entries_[it->second].second;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

std::string Config::require_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v || v->empty())
        throw InvalidConfig(origin_ + ": missing required key '" + key + "'");
    return *v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const std::string* v = find(key);
    return v ? parse_int(*v, key.c_str()) : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    return v ? parse_double(*v, key.c_str()) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw InvalidConfig(key + ": bad boolean '" + *v + "'");
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    const long long parsed = parse_int(*v, key.c_str());
    if (parsed < 0) throw InvalidConfig(key + ": must be >= 0, got '" + *v + "'");
    return static_cast<std::uint64_t>(parsed);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    const std::string* v = find(key);
    std::vector<std::string> out;
    if (!v) return out;
    for (std::string_view item : split(*v, ',')) {
        item = trim(item);
        if (!item.empty()) out.emplace_back(item);
    }
    return out;
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : entries_) {
        if (!used_.count(key)) out.push_back(key);
    }
    return out;
}

}  // namespace pegasus::cfg
