#pragma once

// Flat key-value configuration files: one `key = value` per line, `#` starts
// a comment, blank lines ignored. Values keep internal whitespace; keys and
// values are trimmed. Later assignments to the same key override earlier
// ones, mirroring how command-line flags override the file.

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsmatch {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

// Parse from a stream; `origin` names the source in error messages.
ConfigMap parse_config(std::istream& in, const std::string& origin = "config");

ConfigMap parse_config_file(const std::string& path);

// Splits a comma-separated list value into trimmed, non-empty items.
std::vector<std::string> split_list(const std::string& value);

}  // namespace wsmatch
