#include "keyed_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string_view>
#include <utility>

#include "fanlab/errors.hpp"
#include "fanlab/matrix_io.hpp"

namespace fanlab::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string hyphenated(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

std::vector<std::string> split_list(const std::string& key,
                                    const std::string& text) {
  std::vector<std::string> items;
  std::string_view rest = trim(text);
  if (rest.empty()) return items;
  while (true) {
    std::size_t comma = rest.find(',');
    std::string_view item = trim(rest.substr(0, comma));
    if (item.empty()) {
      throw InvalidParameterError("config key '" + key +
                                  "': empty item in list '" + text + "'");
    }
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return items;
}

double parse_number(const std::string& key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidParameterError("config key '" + key + "': cannot parse '" +
                                std::string(text) + "' as a number");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidParameterError("config key '" + key + "': cannot parse '" +
                                std::string(text) +
                                "' as a non-negative integer");
  }
  return value;
}

bool parse_bool(const std::string& key, std::string_view text) {
  std::string low(trim(text));
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (low == "true" || low == "1" || low == "yes" || low == "on") return true;
  if (low == "false" || low == "0" || low == "no" || low == "off") {
    return false;
  }
  throw InvalidParameterError("config key '" + key + "': cannot parse '" +
                              std::string(text) + "' as a boolean");
}

}  // namespace

void KeyedConfig::declare(CLI::App* cmd, const std::string& key,
                          const std::string& default_value,
                          const std::string& help, bool is_flag) {
  entries_.push_back(Entry{key, default_value, {}, false, is_flag, nullptr});
  Entry& e = entries_.back();
  by_key_[key] = &e;

  const std::string dashed = hyphenated(key);
  std::string names = "--" + dashed;
  if (dashed != key) names += ",--" + key;
  if (is_flag) {
    names += ",!--no-" + dashed;
    e.opt = cmd->add_flag(names, e.flag_bool, help);
  } else {
    e.opt = cmd->add_option(names, e.flag_text, help);
  }
  if (!default_value.empty()) e.opt->default_str(default_value);
}

void KeyedConfig::resolve(const std::filesystem::path& config_file) {
  if (!config_file.empty()) {
    const std::string source = config_file.string();
    const std::string text = read_text_file(config_file);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      const std::string_view raw(
          text.data() + pos,
          (eol == std::string::npos ? text.size() : eol) - pos);
      pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
      ++line_no;

      const std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ParseError(source + ":" + std::to_string(line_no) +
                             ": expected key=value",
                         line_no);
      }
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) {
        throw ParseError(source + ":" + std::to_string(line_no) +
                             ": empty key",
                         line_no);
      }
      auto it = by_key_.find(key);
      if (it == by_key_.end()) {
        throw InvalidParameterError(source + ":" + std::to_string(line_no) +
                                    ": unknown config key '" + key + "'");
      }
      it->second->value = value;
    }
  }
  for (Entry& e : entries_) {
    if (e.opt != nullptr && e.opt->count() > 0) {
      e.value = e.is_flag ? (e.flag_bool ? "true" : "false") : e.flag_text;
    }
  }
}

const KeyedConfig::Entry& KeyedConfig::at(const std::string& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    throw Error("internal: config key '" + key + "' was never declared");
  }
  return *it->second;
}

const std::string& KeyedConfig::str(const std::string& key) const {
  return at(key).value;
}

double KeyedConfig::num(const std::string& key) const {
  return parse_number(key, at(key).value);
}

std::uint64_t KeyedConfig::uint(const std::string& key) const {
  return parse_unsigned(key, at(key).value);
}

std::size_t KeyedConfig::size(const std::string& key) const {
  return static_cast<std::size_t>(uint(key));
}

bool KeyedConfig::flag(const std::string& key) const {
  return parse_bool(key, at(key).value);
}

std::vector<double> KeyedConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(key, at(key).value)) {
    out.push_back(parse_number(key, item));
  }
  return out;
}

std::vector<std::uint64_t> KeyedConfig::uint_list(
    const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(key, at(key).value)) {
    out.push_back(parse_unsigned(key, item));
  }
  return out;
}

std::vector<std::string> KeyedConfig::str_list(const std::string& key) const {
  return split_list(key, at(key).value);
}

void KeyedConfig::write_snapshot(const std::filesystem::path& path,
                                 const std::string& command) const {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(entries_.size());
  for (const Entry& e : entries_) pairs.emplace_back(e.key, e.value);
  write_key_value_file(path, pairs,
                       command + " resolved configuration (re-run with: "
                                 "fanlab " +
                           command + " --config <this file>)");
}

}  // namespace fanlab::cli
