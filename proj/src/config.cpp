#include "minsurf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace minsurf {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Cuts a trailing comment. '#' and ';' only open a comment at the start or
// after whitespace, so values like "file a#b.txt" survive.
std::string uncomment(const std::string& s) {
  for (size_t i = 0; i < s.size(); ++i) {
    if ((s[i] == '#' || s[i] == ';') && (i == 0 || s[i - 1] == ' ' || s[i - 1] == '\t'))
      return s.substr(0, i);
  }
  return s;
}

}  // namespace

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto s = sections.find(section);
  if (s == sections.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

std::string Config::require(const std::string& section, const std::string& key) const {
  if (!has(section, key))
    throw DomainError("config: missing required key [" + section + "] " + key);
  return sections.at(section).at(key);
}

double Config::get_num(const std::string& section, const std::string& key,
                       double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = sections.at(section).at(key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw DomainError("config: [" + section + "] " + key + " = '" + v +
                      "' is not a number");
  return x;
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
  double x = get_num(section, key, fallback);
  int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw DomainError("config: [" + section + "] " + key + " must be an integer");
  return i;
}

Config parse_config_text(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& why) -> void {
    throw DomainError(origin + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(uncomment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("section header without closing ']'");
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      cfg.sections[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    auto [it, fresh] = cfg.sections[section].emplace(key, value);
    (void)it;
    if (!fresh) fail("duplicate key '" + key + "' in section [" + section + "]");
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace minsurf
