#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bmv {

/// Line-oriented key-value file with [section] headers and '#' comments.
/// Every diagnostic carries the offending line number; unknown keys are
/// errors (checked through the consume-then-finish pattern below).
class ConfigFile {
  public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    /// Required key: throws a line-annotated error when missing.
    const std::string& get(const std::string& section, const std::string& key) const;
    /// Optional key with default; the default is recorded as resolved.
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int_or(const std::string& section, const std::string& key,
                            std::int64_t fallback) const;

    /// Errors on any key never consumed by a get* call.
    void finish() const;

    /// Every key the reader resolved, defaults included, as
    /// "section.key" -> value. Feeds the run manifest.
    const std::map<std::string, std::string>& resolved() const { return resolved_; }

    const std::string& origin() const { return origin_; }

  private:
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    mutable std::map<std::string, std::string> resolved_;
};

/// Emitted alongside every CLI result; re-running the same manifest
/// reproduces the outputs bitwise.
struct RunManifest {
    std::string subcommand;
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::map<std::string, std::string> resolved_config;
    std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
    std::vector<std::string> output_paths;

    std::string to_json() const;
};

/// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::string& path);

}  // namespace bmv
