#include "swimopt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace swimopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config root;
  std::vector<Config*> stack{&root};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "}") {
      if (stack.size() == 1) fail("unmatched '}'");
      stack.pop_back();
      continue;
    }
    if (line.back() == '{') {
      const std::string name = trim(line.substr(0, line.size() - 1));
      if (!valid_name(name)) fail("bad block name '" + name + "'");
      stack.push_back(&stack.back()->add_block(name));
      continue;
    }
    // single-line block: name { key = value; key = value }
    if (const auto open = line.find('{'); open != std::string::npos && line.back() == '}') {
      const std::string name = trim(line.substr(0, open));
      if (!valid_name(name)) fail("bad block name '" + name + "'");
      Config& b = stack.back()->add_block(name);
      std::stringstream body(line.substr(open + 1, line.size() - open - 2));
      std::string item;
      while (std::getline(body, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail("expected key = value in '" + item + "'");
        const std::string key = trim(item.substr(0, eq));
        if (!valid_name(key)) fail("bad key '" + key + "'");
        b.set(key, trim(item.substr(eq + 1)));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', 'name {' or '}'");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) fail("bad key '" + key + "'");
    stack.back()->set(key, trim(line.substr(eq + 1)));
  }
  if (stack.size() != 1) throw ConfigError(source + ": unterminated block");
  return root;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in, "<string>");
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

const Config* Config::resolve(const std::string& path, std::string& leaf) const {
  const auto parts = split_path(path);
  const Config* node = this;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = node->block(parts[i]);
    if (!node) return nullptr;
  }
  leaf = parts.back();
  return node;
}

std::optional<std::string> Config::find(const std::string& path) const {
  std::string leaf;
  const Config* node = resolve(path, leaf);
  if (!node) return std::nullopt;
  for (const auto& [k, v] : node->values_)
    if (k == leaf) return v;
  return std::nullopt;
}

bool Config::has(const std::string& path) const { return find(path).has_value(); }

std::string Config::get_string(const std::string& path, const std::string& fallback) const {
  return find(path).value_or(fallback);
}

double Config::get_double(const std::string& path, double fallback) const {
  const auto v = find(path);
  if (!v) return fallback;
  std::istringstream in(*v);
  double x = 0;
  std::string rest;
  if (!(in >> x) || (in >> rest)) throw ConfigError("'" + path + "' is not a number: '" + *v + "'");
  return x;
}

long long Config::get_int(const std::string& path, long long fallback) const {
  const auto v = find(path);
  if (!v) return fallback;
  std::istringstream in(*v);
  long long x = 0;
  std::string rest;
  if (!(in >> x) || (in >> rest)) throw ConfigError("'" + path + "' is not an integer: '" + *v + "'");
  return x;
}

bool Config::get_bool(const std::string& path, bool fallback) const {
  const auto v = find(path);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("'" + path + "' is not a boolean: '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& path) const {
  const auto v = find(path);
  if (!v) return {};
  std::istringstream in(*v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ConfigError("'" + path + "' has a non-numeric entry '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

void Config::set(const std::string& path, const std::string& value) {
  const auto parts = split_path(path);
  Config* node = this;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    Config* next = const_cast<Config*>(node->block(parts[i]));
    node = next ? next : &node->add_block(parts[i]);
  }
  for (auto& [k, v] : node->values_)
    if (k == parts.back()) {
      v = value;
      return;
    }
  node->values_.emplace_back(parts.back(), value);
}

Config& Config::add_block(const std::string& name) {
  blocks_.emplace_back(name, std::make_shared<Config>());
  return *blocks_.back().second;
}

void Config::replace_blocks(const std::string& name, const Config& block) {
  std::erase_if(blocks_, [&](const auto& b) { return b.first == name; });
  blocks_.emplace_back(name, std::make_shared<Config>(block));
}

const Config* Config::block(const std::string& name) const {
  for (const auto& [n, b] : blocks_)
    if (n == name) return b.get();
  return nullptr;
}

std::vector<const Config*> Config::blocks(const std::string& name) const {
  std::vector<const Config*> out;
  for (const auto& [n, b] : blocks_)
    if (n == name) out.push_back(b.get());
  return out;
}

std::vector<std::string> Config::apply_env(const std::string& prefix) {
  std::vector<std::pair<std::string, std::string>> found;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::string path;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (key[i] == '_' && i + 1 < key.size() && key[i + 1] == '_') {
        path += '.';
        ++i;
      } else {
        path += static_cast<char>(std::tolower(static_cast<unsigned char>(key[i])));
      }
    }
    found.emplace_back(path, entry.substr(eq + 1));
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> applied;
  for (const auto& [path, value] : found) {
    set(path, value);
    applied.push_back(path);
  }
  return applied;
}

std::string Config::dump(int indent) const {
  std::ostringstream os;
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [k, v] : values_) os << pad << k << " = " << v << '\n';
  for (const auto& [n, b] : blocks_) os << pad << n << " {\n" << b->dump(indent + 2) << pad << "}\n";
  return os.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace swimopt
