#include "maler/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace maler {

LibsvmParseError::LibsvmParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

void parse_line(std::string_view line, std::size_t lineno, LibsvmDataset& data) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  const auto tokens = split_ws(line);
  if (tokens.empty()) return;

  LibsvmRow row;
  double label = 0.0;
  if (!parse_double(tokens[0], label))
    throw LibsvmParseError(lineno, "non-numeric label '" + std::string(tokens[0]) + "'");
  if (label == 1.0) {
    row.label = 1;
  } else if (label == -1.0 || label == 0.0) {
    row.label = -1;
  } else {
    throw LibsvmParseError(lineno, "label must be -1, 0 or +1, got '" + std::string(tokens[0]) + "'");
  }

  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const auto tok = tokens[k];
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos)
      throw LibsvmParseError(lineno, "expected index:value, got '" + std::string(tok) + "'");
    int index = 0;
    double value = 0.0;
    if (!parse_int(tok.substr(0, colon), index) || index < 1)
      throw LibsvmParseError(lineno, "bad feature index in '" + std::string(tok) + "'");
    if (!parse_double(tok.substr(colon + 1), value))
      throw LibsvmParseError(lineno, "non-numeric feature value in '" + std::string(tok) + "'");
    row.features.emplace_back(index, value);
  }
  std::sort(row.features.begin(), row.features.end());
  for (std::size_t k = 1; k < row.features.size(); ++k) {
    if (row.features[k].first == row.features[k - 1].first)
      throw LibsvmParseError(lineno, "duplicate index " + std::to_string(row.features[k].first));
  }
  if (!row.features.empty()) data.max_index = std::max(data.max_index, row.features.back().first);
  data.rows.push_back(std::move(row));
}

LibsvmDataset parse_stream(std::istream& in) {
  LibsvmDataset data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) parse_line(line, ++lineno, data);
  if (in.bad()) throw std::runtime_error("libsvm: read error");
  return data;
}

}  // namespace

LibsvmDataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("libsvm: cannot open '" + path + "'");
  return parse_stream(in);
}

LibsvmDataset parse_libsvm_text(const std::string& text) {
  std::istringstream in(text);
  return parse_stream(in);
}

std::string serialize_libsvm(const LibsvmDataset& data) {
  std::string out;
  char buf[64];
  for (const auto& row : data.rows) {
    out += row.label > 0 ? "+1" : "-1";
    for (const auto& [index, value] : row.features) {
      std::snprintf(buf, sizeof buf, " %d:%.17g", index, value);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace maler
