#include "mcsort/dataset_csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mcsort/error.hpp"

namespace mcsort {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& text, std::size_t row, std::size_t col) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorCode::invalid_input,
         fmt::format("row {}, column {}: '{}' is not a number", row, col, text));
  }
  return value;
}

}  // namespace

int Dataset::max_label() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end());
}

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!trim(line).empty()) lines.push_back(line);
  }
  require(!lines.empty(), "empty CSV");
  auto header = split_fields(lines[0]);
  require(header.size() >= 2 && header[0] == "id",
          "header must start with 'id' followed by at least one criterion");
  const bool has_label = header.back() == "label";
  const std::size_t m = header.size() - 1 - (has_label ? 1 : 0);
  require(m >= 1, "header names no criteria");
  require(lines.size() >= 2, "CSV has a header but no data rows");

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_fields(lines[r]);
    if (fields.size() != header.size()) {
      fail(ErrorCode::invalid_input, fmt::format("row {}: expected {} fields, found {}", r + 1,
                                                 header.size(), fields.size()));
    }
    require(!fields[0].empty(), fmt::format("row {}, column 1: empty id", r + 1));
    ids.push_back(fields[0]);
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) row[j] = parse_real(fields[j + 1], r + 1, j + 2);
    rows.push_back(std::move(row));
    if (has_label) {
      const double v = parse_real(fields.back(), r + 1, header.size());
      if (v != static_cast<int>(v) || v < 1) {
        fail(ErrorCode::invalid_input,
             fmt::format("row {}, column {}: label must be a positive integer", r + 1,
                         header.size()));
      }
      labels.push_back(static_cast<int>(v));
    }
  }
  std::vector<std::string> names(header.begin() + 1, header.begin() + 1 + static_cast<long>(m));
  Dataset ds{DecisionMatrix(std::move(ids), std::move(names), std::move(rows)), std::nullopt};
  if (has_label) ds.labels = std::move(labels);
  return ds;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::not_found, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_csv(buffer.str());
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  const auto& mx = dataset.matrix;
  out << "id";
  for (const auto& name : mx.criterion_names()) out << ',' << name;
  if (dataset.labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < mx.alternatives(); ++i) {
    out << mx.id(i);
    for (double v : mx.row(i)) out << ',' << fmt::format("{}", v);
    if (dataset.labels) out << ',' << (*dataset.labels)[i];
    out << '\n';
  }
}

std::string format_dataset_csv(const Dataset& dataset) {
  std::ostringstream out;
  write_dataset_csv(dataset, out);
  return out.str();
}

}  // namespace mcsort
