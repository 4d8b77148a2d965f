#pragma once

#include <charconv>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tailex {

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// "family:k1=v1,k2=v2" split into a family name and numeric key/values.
struct ParsedSpec {
  std::string family;
  std::map<std::string, double> values;

  double get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ParseError("missing key '" + key + "' for " + family);
    return it->second;
  }
  double get_or(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  void allow_only(const std::set<std::string>& keys) const {
    for (const auto& [k, v] : values)
      if (!keys.count(k)) throw ParseError("unknown key '" + k + "' for " + family);
  }
};

inline double parse_number(std::string_view text, const std::string& key) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("bad value for key '" + key + "': '" + s + "'");
  }
  if (used != s.size()) throw ParseError("bad value for key '" + key + "': '" + s + "'");
  return v;
}

inline ParsedSpec parse_spec(std::string_view text) {
  ParsedSpec out;
  const auto colon = text.find(':');
  out.family = std::string(text.substr(0, colon));
  if (out.family.empty()) throw ParseError("empty family name in '" + std::string(text) + "'");
  if (colon == std::string_view::npos) return out;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ParseError("expected key=value, got '" + std::string(item) + "'");
    std::string key(item.substr(0, eq));
    if (out.values.count(key)) throw ParseError("duplicate key '" + key + "'");
    out.values[key] = parse_number(item.substr(eq + 1), key);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

}  // namespace tailex
