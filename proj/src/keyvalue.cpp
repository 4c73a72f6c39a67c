#include "lorentz/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lorentz/error.hpp"

namespace lorentz {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

std::size_t skip_space(const std::string& s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

std::string rtrim(std::string s) {
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

std::vector<std::pair<std::string, int>> split_items(const KvEntry& e, char sep) {
  std::vector<std::pair<std::string, int>> out;
  std::size_t i = 0;
  const std::string& v = e.value;
  while (i <= v.size()) {
    std::size_t j = v.find(sep, i);
    if (j == std::string::npos) j = v.size();
    std::size_t a = skip_space(v, i);
    std::string item = rtrim(v.substr(a, j - a));
    if (item.empty()) throw ParseError("empty list item", e.line, e.column + int(a));
    out.push_back({item, e.column + int(a)});
    i = j + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& text, int line, int column) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw ParseError("invalid number '" + text + "'", line, column);
  return v;
}

}  // namespace

const KvEntry* KvSection::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

const KvEntry& KvSection::require(const std::string& key) const {
  if (const KvEntry* e = find(key)) return *e;
  std::string where = name.empty() ? "top level" : "[" + name + "] at line " + std::to_string(line);
  throw MissingRequiredError("missing required key '" + key + "' in " + where);
}

void KvSection::check_keys(const std::set<std::string>& allowed) const {
  for (const auto& e : entries)
    if (!allowed.count(e.key))
      throw UnknownKeyError(std::to_string(e.line) + ": unknown key '" + e.key + "'" +
                            (name.empty() ? "" : " in [" + name + "]"));
}

std::vector<const KvSection*> KvDocument::all(const std::string& name) const {
  std::vector<const KvSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

const KvSection* KvDocument::first(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

void KvDocument::check_sections(const std::set<std::string>& allowed) const {
  for (std::size_t i = 1; i < sections.size(); ++i)
    if (!allowed.count(sections[i].name))
      throw UnknownKeyError(std::to_string(sections[i].line) + ": unknown section [" +
                            sections[i].name + "]");
}

KvDocument parse_kv(const std::string& text, const std::set<std::string>& repeatable) {
  KvDocument doc;
  doc.sections.push_back({"", 0, {}});
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t hash = raw.find('#');
    std::string s = rtrim(hash == std::string::npos ? raw : raw.substr(0, hash));
    std::size_t i = skip_space(s, 0);
    if (i == s.size()) continue;
    if (s[i] == '[') {
      std::size_t close = s.find(']', i);
      if (close == std::string::npos) throw ParseError("missing ']'", line, int(i) + 1);
      if (skip_space(s, close + 1) != s.size())
        throw ParseError("text after section header", line, int(close) + 2);
      std::size_t a = skip_space(s, i + 1);
      std::string name = rtrim(s.substr(a, close - a));
      if (name.empty()) throw ParseError("empty section name", line, int(i) + 1);
      for (std::size_t k = 0; k < name.size(); ++k)
        if (!is_key_char(name[k])) throw ParseError("bad section name", line, int(a + k) + 1);
      if (seen.count(name) && !repeatable.count(name))
        throw ParseError("duplicate section [" + name + "]", line, int(i) + 1);
      seen.insert(name);
      doc.sections.push_back({name, line, {}});
      continue;
    }
    std::size_t k = i;
    while (k < s.size() && is_key_char(s[k])) ++k;
    if (k == i) throw ParseError("expected key", line, int(i) + 1);
    std::string key = s.substr(i, k - i);
    std::size_t eq = skip_space(s, k);
    if (eq >= s.size() || s[eq] != '=') throw ParseError("expected '='", line, int(eq) + 1);
    std::size_t v = skip_space(s, eq + 1);
    if (v == s.size()) throw ParseError("missing value", line, int(v) + 1);
    KvSection& sec = doc.sections.back();
    if (sec.find(key)) throw ParseError("duplicate key '" + key + "'", line, int(i) + 1);
    sec.entries.push_back({key, s.substr(v), line, int(v) + 1});
  }
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

KvDocument parse_kv_file(const std::string& path, const std::set<std::string>& repeatable) {
  return parse_kv(read_text_file(path), repeatable);
}

std::string serialize_kv(const KvDocument& doc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& sec : doc.sections) {
    if (!sec.name.empty()) {
      if (!first) out << '\n';
      out << '[' << sec.name << "]\n";
    }
    for (const auto& e : sec.entries) out << e.key << " = " << e.value << '\n';
    first = false;
  }
  return out.str();
}

std::int64_t kv_int(const KvEntry& e) { return parse_number<std::int64_t>(e.value, e.line, e.column); }

double kv_double(const KvEntry& e) { return parse_number<double>(e.value, e.line, e.column); }

std::vector<std::int64_t> kv_int_list(const KvEntry& e) {
  std::vector<std::int64_t> out;
  std::string v = e.value;
  for (char& c : v)
    if (c == ',') c = ' ';
  std::size_t i = 0;
  while ((i = skip_space(v, i)) < v.size()) {
    std::size_t j = i;
    while (j < v.size() && !is_space(v[j])) ++j;
    out.push_back(parse_number<std::int64_t>(v.substr(i, j - i), e.line, e.column + int(i)));
    i = j;
  }
  if (out.empty()) throw ParseError("empty list", e.line, e.column);
  return out;
}

std::vector<Cell> kv_cell_list(const KvEntry& e) {
  std::vector<Cell> out;
  for (const auto& [item, col] : split_items(e, ',')) {
    std::istringstream in(item);
    std::string a, b, extra;
    in >> a >> b;
    if (a.empty() || b.empty() || (in >> extra))
      throw ParseError("expected two integers in '" + item + "'", e.line, col);
    out.push_back({parse_number<std::int64_t>(a, e.line, col),
                   parse_number<std::int64_t>(b, e.line, col)});
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace lorentz
