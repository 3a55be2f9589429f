#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mrenet::csv {

/// Line-oriented reader for the simple comma-separated files used here
/// (no quoting). Checks the header and tracks 1-based line numbers.
class Reader {
 public:
  Reader(std::istream& in, std::span<const std::string_view> expected_header);

  /// Next non-blank data row, or nullopt at end of stream.
  std::optional<std::vector<std::string>> next();

  std::size_t line() const noexcept { return line_; }

  /// Parse helpers; throw ParseError at the current line.
  double number(const std::string& field, std::string_view column) const;
  long integer(const std::string& field, std::string_view column) const;

 private:
  std::istream& in_;
  std::size_t columns_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace mrenet::csv
