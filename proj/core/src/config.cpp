#include "lio/config.hpp"

#include <fstream>
#include <sstream>

#include "lio/errors.hpp"

namespace lio {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Config parse_stream(std::istream& is, const std::string& origin) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": expected `key = value`";
      throw FormatError(os.str());
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open config file: " + path);
  return parse_stream(f, path);
}

Config Config::from_string(const std::string& text) {
  std::istringstream is(text);
  return parse_stream(is, "<string>");
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw FormatError("config key `" + key + "` is not a number: " +
                      it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw FormatError("config key `" + key + "` is not an integer: " +
                      it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw FormatError("config key `" + key + "` is not a boolean: " + v);
}

Vec3 Config::get_vec3(const std::string& key, const Vec3& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::istringstream is(it->second);
  Vec3 v;
  char comma;
  if (it->second.find(',') != std::string::npos) {
    if (!(is >> v.x() >> comma >> v.y() >> comma >> v.z())) {
      throw FormatError("config key `" + key + "` is not a 3-vector");
    }
  } else if (!(is >> v.x() >> v.y() >> v.z())) {
    throw FormatError("config key `" + key + "` is not a 3-vector");
  }
  return v;
}

void Config::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw FormatError("cannot write config file: " + path);
  for (const auto& [k, v] : kv_) f << k << " = " << v << "\n";
}

}  // namespace lio
