#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nssl/harness.hpp"

namespace nssl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) return false;
  return true;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed key '" + key + "'");
    if (key.find('.') == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": key '" + key +
                        "' lacks a section");
    if (c.entries_.count(key))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                        "' (first on line " + std::to_string(c.entries_[key].line) + ")");
    c.entries_[key] = {value, lineno};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

int Config::line(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void Config::fail(const std::string& key, const std::string& what) const {
  const int l = line(key);
  throw ConfigError(source_ + (l > 0 ? ":" + std::to_string(l) : "") + ": " + key + ": " + what);
}

const Config::Entry& Config::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string Config::str(const std::string& key) const { return get(key).value; }

std::string Config::str(const std::string& key, const std::string& def) const {
  return has(key) ? str(key) : def;
}

double Config::num(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(get(key).value, v)) fail(key, "expected a number, got '" + get(key).value + "'");
  return v;
}

double Config::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

long Config::integer(const std::string& key, long def) const {
  if (!has(key)) return def;
  const std::string& s = get(key).value;
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
  return v;
}

bool Config::flag(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string& s = get(key).value;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> Config::nums(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& w : split(get(key).value)) {
    double v = 0.0;
    if (!parse_double(w, v)) fail(key, "expected a number list, got '" + w + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::words(const std::string& key) const { return split(get(key).value); }

void Config::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it != entries_.end())
    it->second.value = value;
  else
    entries_[key] = {value, 0};
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, e] : entries_) out += k + " = " + e.value + "\n";
  return out;
}

}  // namespace nssl
