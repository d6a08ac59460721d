#pragma once

#include <map>
#include <string>

#include "lio/manifold.hpp"

namespace lio {

// Flat `key = value` configuration. Unknown keys are kept (callers may layer
// their own); lookups with a default never throw.
class Config {
 public:
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const;

  void save(const std::string& path) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace lio
