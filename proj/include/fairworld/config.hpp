#pragma once

#include <algorithm>
#include <filesystem>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "fairworld/error.hpp"

namespace fairworld {

// Typed access to one JSON object; every error is a ConfigError naming the
// field path, e.g. "study.tuning.budget: has the wrong type".
class ConfigFields {
 public:
  ConfigFields(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void read(const char* key, T& out) const {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key) + ": has the wrong type");
    }
  }

  template <class T>
  T require(const char* key) const {
    if (!has(key)) throw ConfigError(field(key) + ": required");
    T out{};
    read(key, out);
    return out;
  }

  ConfigFields sub(const char* key) const { return ConfigFields(j_.at(key), field(key)); }
  const nlohmann::json& raw(const char* key) const { return j_.at(key); }
  std::string field(const char* key) const { return path_ + "." + key; }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& item : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return item.key() == a; })) {
        throw ConfigError(path_ + "." + item.key() + ": unknown field");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

// Parses a JSON file; unreadable or malformed input is a ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fairworld
