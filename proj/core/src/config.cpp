#include "dglmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dglmc/csv.hpp"

namespace dglmc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("value for '" + key + "' is not a number: '" +
                                value + "'");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    std::ostringstream msg;
    if (eq == std::string::npos) {
      msg << "line " << line_no << " is not a 'key = value' pair: " << line;
      throw std::invalid_argument(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) {
      msg << "invalid key '" << key << "' on line " << line_no;
      throw std::invalid_argument(msg.str());
    }
    if (config.find(key) != nullptr) {
      msg << "duplicate key '" << key << "' on line " << line_no;
      throw std::invalid_argument(msg.str());
    }
    config.entries_.emplace_back(key, value);
  }
  return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  return parse_string(read_text_file(path));
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [key, value] : entries_) out << key << " = " << value << "\n";
  return out.str();
}

const std::string* ExperimentConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool ExperimentConfig::has(const std::string& key) const {
  return find(key) != nullptr;
}

std::string ExperimentConfig::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr)
    throw std::invalid_argument("missing config key '" + key + "'");
  return *v;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  const std::string* v = find(key);
  return v == nullptr ? fallback : *v;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double ExperimentConfig::get_double(const std::string& key,
                                    double fallback) const {
  const std::string* v = find(key);
  return v == nullptr ? fallback : parse_double(key, *v);
}

long ExperimentConfig::get_long(const std::string& key) const {
  const std::string v = trim(get_string(key));
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("value for '" + key +
                                "' is not an integer: '" + v + "'");
  }
}

long ExperimentConfig::get_long(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key,
                                        std::uint64_t fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  const std::string s = trim(*v);
  try {
    std::size_t used = 0;
    const unsigned long long out = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("value for '" + key +
                                "' is not an unsigned integer: '" + s + "'");
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  const std::string s = trim(*v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("value for '" + key +
                              "' is not a boolean: '" + s + "'");
}

std::vector<double> ExperimentConfig::get_double_list(
    const std::string& key) const {
  const std::string raw = get_string(key);
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const std::size_t comma = raw.find(',', start);
    const std::string piece =
        comma == std::string::npos ? raw.substr(start)
                                   : raw.substr(start, comma - start);
    const std::string v = trim(piece);
    if (!v.empty()) out.push_back(parse_double(key, v));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty())
    throw std::invalid_argument("config key '" + key + "' has an empty list");
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw std::invalid_argument("invalid key '" + key + "'");
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void ExperimentConfig::require_known_keys(
    const std::set<std::string>& known) const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (known.count(key) == 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw std::invalid_argument("unknown config keys: " + unknown);
}

}  // namespace dglmc
