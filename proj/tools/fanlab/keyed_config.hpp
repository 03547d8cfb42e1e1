#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fanlab::cli {

// One command's configuration surface: a fixed set of keys, each settable in
// a key=value config file (--config) and through an identically named flag.
// Precedence is flags over file over built-in defaults; unknown file keys are
// hard errors so typos cannot silently fall back to defaults. The resolved
// state round-trips through write_snapshot: re-running the command with
// `--config <snapshot>` reproduces the run byte for byte.
class KeyedConfig {
 public:
  // Declares `key` and registers a matching option on `cmd`. Keys containing
  // underscores also accept the hyphenated flag spelling. Boolean keys
  // (is_flag) become --name / --no-name toggles taking no value.
  void declare(CLI::App* cmd, const std::string& key,
               const std::string& default_value, const std::string& help,
               bool is_flag = false);

  // Overlays file values (when config_file is nonempty), then flag values.
  // Call exactly once, after CLI11 has parsed the command line.
  void resolve(const std::filesystem::path& config_file);

  const std::string& str(const std::string& key) const;
  double num(const std::string& key) const;
  std::uint64_t uint(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  bool flag(const std::string& key) const;
  // Comma-separated lists; empty string means an empty list.
  std::vector<double> num_list(const std::string& key) const;
  std::vector<std::uint64_t> uint_list(const std::string& key) const;
  std::vector<std::string> str_list(const std::string& key) const;

  void write_snapshot(const std::filesystem::path& path,
                      const std::string& command) const;

 private:
  struct Entry {
    std::string key;
    std::string value;      // resolved: default, then file, then flag
    std::string flag_text;  // CLI11 write target for value options
    bool flag_bool = false;  // CLI11 write target for boolean toggles
    bool is_flag = false;
    CLI::Option* opt = nullptr;
  };

  const Entry& at(const std::string& key) const;

  std::deque<Entry> entries_;  // deque: declare() must not move bound targets
  std::map<std::string, Entry*> by_key_;
};

}  // namespace fanlab::cli
