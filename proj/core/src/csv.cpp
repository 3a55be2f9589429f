#include "mrenet/csv.hpp"

#include <charconv>
#include <cmath>

#include "mrenet/error.hpp"

namespace mrenet::csv {

namespace {
std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}
}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    const auto piece = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.emplace_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Reader::Reader(std::istream& in, std::span<const std::string_view> expected_header)
    : in_(in), columns_(expected_header.size()) {
  std::string header;
  if (!std::getline(in_, header)) throw ParseError(1, "missing header row");
  line_ = 1;
  // tolerate a UTF-8 byte order mark
  if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
  const auto fields = split(header);
  bool ok = fields.size() == expected_header.size();
  for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == expected_header[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (i) want += ',';
      want += expected_header[i];
    }
    throw ParseError(1, "unexpected header, want '" + want + "'");
  }
}

std::optional<std::vector<std::string>> Reader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (trim(raw).empty()) continue;
    auto fields = split(raw);
    if (fields.size() != columns_) {
      throw ParseError(line_, "expected " + std::to_string(columns_) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    return fields;
  }
  return std::nullopt;
}

double Reader::number(const std::string& field, std::string_view column) const {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line_, "column '" + std::string(column) + "': not a finite number: '" + field + "'");
  }
  return value;
}

long Reader::integer(const std::string& field, std::string_view column) const {
  long value = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(line_, "column '" + std::string(column) + "': not an integer: '" + field + "'");
  }
  return value;
}

}  // namespace mrenet::csv
