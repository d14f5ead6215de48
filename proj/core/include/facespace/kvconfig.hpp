#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace facespace {

/// Flat `key = value` document. Lines starting with '#' and blank lines are
/// ignored; keys are unique; whitespace around keys and values is trimmed.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<string>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Serializes in key order, one `key=value` per line.
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Throws InvalidConfig naming the first key not in `allowed`.
void reject_unknown_keys(const KeyValues& kv, const std::set<std::string>& allowed,
                         const std::string& origin);

double parse_double(const std::string& value, const std::string& key);
std::uint64_t parse_u64(const std::string& value, const std::string& key);
std::vector<double> parse_double_list(const std::string& value, const std::string& key);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);
std::string format_double_list(const std::vector<double>& values);

}  // namespace facespace
