#pragma once

// Minimal RFC 4180 reading and writing, shared by the emitter and validator.

#include <string>
#include <string_view>
#include <vector>

namespace ltlfgen::csv {

inline std::string field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += field(cells[i]);
  }
  return out + '\n';
}

/// Splits a whole document into rows; returns false on an unterminated quote.
inline bool parse(std::string_view text, std::vector<std::vector<std::string>>& rows) {
  rows.clear();
  std::vector<std::string> cur;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      cur.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        cur.push_back(std::move(cell));
        rows.push_back(std::move(cur));
      }
      cur.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (quoted) return false;
  if (any || !cell.empty()) {
    cur.push_back(std::move(cell));
    rows.push_back(std::move(cur));
  }
  return true;
}

}  // namespace ltlfgen::csv
