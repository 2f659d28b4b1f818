#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace dglmc {

/// Flat key/value experiment configuration.
///
/// File format: one `key = value` pair per line; blank lines and lines
/// starting with '#' are ignored. Keys are dotted lowercase identifiers.
/// Parsing preserves order and serialize() reproduces the pairs losslessly,
/// so parse(serialize(c)) == c.
class ExperimentConfig {
 public:
  static ExperimentConfig parse_string(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of reals; "inf" is accepted.
  std::vector<double> get_double_list(const std::string& key) const;

  /// Inserts or overwrites, preserving first-seen order.
  void set(const std::string& key, const std::string& value);

  /// Throws std::invalid_argument naming every key not in `known`.
  void require_known_keys(const std::set<std::string>& known) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  bool operator==(const ExperimentConfig& other) const {
    return entries_ == other.entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  const std::string* find(const std::string& key) const;
};

}  // namespace dglmc
