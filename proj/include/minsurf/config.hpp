#pragma once

#include <map>
#include <string>

#include "minsurf/common.hpp"

namespace minsurf {

// Line-oriented configuration: `[section]` headers, `key = value` entries,
// `#` or `;` starts a comment, blank lines ignored. Keys before any header
// land in the "" section. Values keep internal spaces ("curve = circle r=1"
// stores "circle r=1").
struct Config {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_num(const std::string& section, const std::string& key,
                 double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  // Missing key -> DomainError naming section.key.
  std::string require(const std::string& section, const std::string& key) const;
};

// Throws DomainError with the 1-based line number on malformed input
// (header without ']', entry without '=', duplicate key in one section).
Config parse_config_text(const std::string& text, const std::string& origin = "config");

Config load_config(const std::string& path);

}  // namespace minsurf
