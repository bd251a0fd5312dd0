#pragma once

// Minimal RFC-4180 style reader/writer. Fields may be quoted with '"' and
// quotes inside quoted fields are doubled. Embedded newlines are not
// supported; every record lives on one physical line.

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "newsbias/error.hpp"

namespace newsbias::csv {

inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      field_was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw InputError("unterminated quoted field at line " + std::to_string(line_no));
  }
  fields.push_back(std::move(cur));
  return fields;
}

// Reads a header line plus data rows. Blank lines are skipped; a trailing
// '\r' is stripped so CRLF files parse.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false on an empty stream.
  bool read_header(const std::vector<std::string>& expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      header_ = split_line(line, line_no_);
      if (header_ != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
          if (i) want += ',';
          want += expected[i];
        }
        throw InputError("bad header at line " + std::to_string(line_no_) + ": expected '" +
                         want + "', got '" + line + "'");
      }
      return true;
    }
    return false;
  }

  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      auto fields = split_line(line, line_no_);
      if (fields.size() != header_.size()) {
        throw InputError("malformed row at line " + std::to_string(line_no_) + ": expected " +
                         std::to_string(header_.size()) + " fields, got " +
                         std::to_string(fields.size()));
      }
      return fields;
    }
    return std::nullopt;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

// Shortest representation that round-trips; output is byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Int>
Int parse_int(std::string_view s, std::size_t line_no, std::string_view field) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InputError("malformed field '" + std::string(field) + "' value '" + std::string(s) +
                     "' at line " + std::to_string(line_no));
  }
  return value;
}

inline double parse_double(std::string_view s, std::size_t line_no, std::string_view field) {
  double value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InputError("malformed field '" + std::string(field) + "' value '" + std::string(s) +
                     "' at line " + std::to_string(line_no));
  }
  return value;
}

}  // namespace newsbias::csv
