#pragma once

#include <map>
#include <string>

namespace mfs {

// Flat `key = value` file with optional [section] headers; keys outside a
// section are stored bare, inside as "section.key". '#' starts a comment.
class Config {
  public:
    Config() = default;
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    // Deterministic key-sorted rendering (used in report headers).
    std::string dump() const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace mfs
