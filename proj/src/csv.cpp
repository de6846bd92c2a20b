#include "csv.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "gae/error.hpp"

namespace gae::detail {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(std::string_view text, std::size_t line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  const auto skip_blank = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
  };
  while (true) {
    skip_blank();
    std::string field;
    if (i < text.size() && text[i] == '"') {
      ++i;
      while (true) {
        if (i >= text.size()) {
          throw DataError(fmt::format("line {}: unterminated quoted field", line));
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
      skip_blank();
      if (i < text.size() && text[i] != ',') {
        throw DataError(fmt::format("line {}: text after a closing quote", line));
      }
    } else {
      const std::size_t stop = std::min(text.find(',', i), text.size());
      field = std::string(text.substr(i, stop - i));
      if (field.find('"') != std::string::npos) {
        throw DataError(fmt::format("line {}: quote inside an unquoted field", line));
      }
      i = stop;
    }
    fields.emplace_back(trim(field));
    if (i >= text.size()) {
      break;
    }
    ++i;  // comma
  }
  return fields;
}

}  // namespace gae::detail
