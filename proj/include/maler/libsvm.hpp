#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maler {

/// A malformed LIBSVM line; line() is 1-based.
class LibsvmParseError : public std::runtime_error {
 public:
  LibsvmParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LibsvmRow {
  int label = 1;  // -1 or +1
  std::vector<std::pair<int, double>> features;  // 1-based index, ascending
};

struct LibsvmDataset {
  std::vector<LibsvmRow> rows;
  int max_index = 0;
};

/// Parses `<label> <index>:<value> ...` lines. Labels +1/1 map to +1, -1 and 0
/// map to -1. Blank lines and '#' comments are skipped. Throws
/// LibsvmParseError on a non-numeric field, a non-positive or duplicate index,
/// or an unsupported label; std::runtime_error if the file cannot be read.
LibsvmDataset parse_libsvm(const std::string& path);
LibsvmDataset parse_libsvm_text(const std::string& text);

/// Canonical text: labels as +1/-1, indices ascending, values in %.17g.
std::string serialize_libsvm(const LibsvmDataset& data);

}  // namespace maler
