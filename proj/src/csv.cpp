#include "robustglm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "robustglm/errors.hpp"

namespace robustglm {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_number(const std::string& field, std::size_t line, const std::string& column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw InputError("line " + std::to_string(line) + ": column '" + column +
                     "' is not a finite number: '" + field + "'");
  }
  return value;
}

}  // namespace

LabeledDataset read_csv(std::istream& in, const std::string& response, bool intercept) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw InputError("CSV input is empty");

  Index response_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw InputError("header column " + std::to_string(j + 1) + " is empty");
    for (std::size_t k = 0; k < j; ++k) {
      if (header[k] == header[j]) throw InputError("duplicate column '" + header[j] + "'");
    }
    if (header[j] == response) response_col = static_cast<Index>(j);
  }
  if (response_col < 0) throw InputError("response column '" + response + "' not found");

  LabeledDataset out;
  if (intercept) out.names.push_back("(Intercept)");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<Index>(j) != response_col) out.names.push_back(header[j]);
  }

  std::vector<double> cells;
  std::vector<Count> ys;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    if (intercept) cells.push_back(1.0);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const double v = parse_number(fields[j], lineno, header[j]);
      if (static_cast<Index>(j) != response_col) {
        cells.push_back(v);
        continue;
      }
      if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
        throw InputError("line " + std::to_string(lineno) + ": response '" + fields[j] +
                         "' is not a nonnegative integer");
      }
      ys.push_back(static_cast<Count>(v));
    }
  }
  if (ys.empty()) throw InputError("CSV input has no data rows");
  if (out.names.empty()) throw InputError("no covariate columns");

  const auto n = static_cast<Index>(ys.size());
  const auto p = static_cast<Index>(out.names.size());
  out.data.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(cells.data(), n, p);
  out.data.y = Eigen::Map<const CountVector>(ys.data(), n);
  out.data.validate();
  return out;
}

LabeledDataset read_csv_file(const std::string& path, const std::string& response,
                             bool intercept) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in, response, intercept);
}

}  // namespace robustglm
