#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace geosched::app {

/// Invalid, unknown or unparsable configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "section.key" -> value store. Every key must be one of the known
/// keys; the defaults table defines them.
class Config {
 public:
  static Config defaults();
  static const std::vector<std::string>& preset_names();

  void apply_preset(const std::string& name);
  /// Merges an INI file ([section] / key = value). Unknown keys are rejected.
  void merge_ini(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<long> integer_list(const std::string& key) const;

  /// Resolved configuration as INI text, sections and keys sorted.
  std::string to_ini() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace geosched::app
