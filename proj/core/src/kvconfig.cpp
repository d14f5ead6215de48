#include "facespace/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "facespace/error.hpp"

namespace facespace {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto key = trim(std::string_view(content).substr(0, eq));
    auto value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::InvalidConfig, origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!kv.emplace(key, std::move(value)).second) {
      throw Error(ErrorCode::InvalidConfig, origin + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path.string());
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << format_key_values(kv);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void reject_unknown_keys(const KeyValues& kv, const std::set<std::string>& allowed,
                         const std::string& origin) {
  for (const auto& [key, value] : kv) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::InvalidConfig, origin + ": unknown key '" + key + "'");
    }
  }
}

double parse_double(const std::string& value, const std::string& key) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "': not a number: '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidConfig,
                "'" + key + "': not a non-negative integer: '" + value + "'");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) throw Error(ErrorCode::InvalidConfig, "'" + key + "': empty list element");
    out.push_back(parse_double(t, key));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "'" + key + "': empty list");
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace facespace
