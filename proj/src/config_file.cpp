#include "bmv/config_file.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bmv {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw std::runtime_error("config error: " + origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(origin, line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail(origin, line, "empty section name");
            cfg.sections_[section];
            continue;
        }
        if (section.empty()) fail(origin, line, "key before any [section] header");
        auto sp = s.find_first_of(" \t");
        std::string key = sp == std::string::npos ? s : s.substr(0, sp);
        std::string value = sp == std::string::npos ? "" : trim(s.substr(sp));
        auto& sec = cfg.sections_[section];
        auto it = sec.find(key);
        if (it != sec.end())
            fail(origin, line,
                 "duplicate key '" + key + "' (first defined at line " +
                     std::to_string(it->second.line) + ")");
        sec.emplace(key, Entry{value, line, false});
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config error: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

bool ConfigFile::has_section(const std::string& section) const {
    return sections_.count(section) != 0;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) != 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key))
        throw std::runtime_error("config error: " + origin_ + ": missing required key '" + section +
                                 "." + key + "'");
    const Entry& e = it->second.at(key);
    e.consumed = true;
    resolved_[section + "." + key] = e.value;
    return e.value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    if (has(section, key)) return get(section, key);
    resolved_[section + "." + key] = fallback;
    return fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        fail(origin_, sections_.at(section).at(key).line,
             "key '" + section + "." + key + "' expects a number, got '" + v + "'");
    }
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    if (has(section, key)) return get_double(section, key);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", fallback);
    resolved_[section + "." + key] = buf;
    return fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        std::size_t pos = 0;
        long long n = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return n;
    } catch (const std::exception&) {
        fail(origin_, sections_.at(section).at(key).line,
             "key '" + section + "." + key + "' expects an integer, got '" + v + "'");
    }
}

std::int64_t ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t fallback) const {
    if (has(section, key)) return get_int(section, key);
    resolved_[section + "." + key] = std::to_string(fallback);
    return fallback;
}

void ConfigFile::finish() const {
    for (const auto& [section, keys] : sections_)
        for (const auto& [key, entry] : keys)
            if (!entry.consumed)
                fail(origin_, entry.line, "unknown key '" + section + "." + key + "'");
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["tool_version"] = tool_version;
    j["master_seed"] = master_seed;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : resolved_config) j["config"][k] = v;
    j["input_digests"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : input_digests) j["input_digests"][k] = v;
    j["output_paths"] = output_paths;
    return j.dump(2);
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config error: cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bmv
