// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented `key = value` configuration files. '#' starts a comment,
// blank lines are ignored, values may be comma-separated lists.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cfe {

class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text,
                                   const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  // Typed getters throw ConfigError naming the key (and file) on bad input.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // Keys in file order, for echoing a resolved config back out.
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  const std::string& origin() const { return origin_; }

  // Raw file bytes as read (empty when parsed from a string); used to echo a
  // config verbatim into an output directory.
  const std::string& raw_text() const { return raw_text_; }

 private:
  std::string origin_;
  std::string raw_text_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace cfe
