#include "ldptail/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "ldptail/error.hpp"

namespace ldptail {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& value) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(value);
}

}  // namespace

IngestResult parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  IngestResult out;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto name : split(line)) out.sample.column_names.emplace_back(name);
    have_header = true;
  }
  if (!have_header) throw DataError(source + ": missing header row");
  const std::size_t m = out.sample.column_names.size();

  std::vector<double> data;
  std::vector<double> row(m);
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::string problem;
    if (cells.size() != m) {
      problem = std::to_string(cells.size()) + " cells, expected " + std::to_string(m);
    } else {
      for (std::size_t j = 0; j < m && problem.empty(); ++j) {
        if (!parse_number(cells[j], row[j])) {
          problem = "column '" + out.sample.column_names[j] + "' value '" +
                    std::string(cells[j]) + "' is not a finite number";
        }
      }
    }
    if (!problem.empty()) {
      ++out.rows_dropped;
      out.diagnostics.push_back(source + ":" + std::to_string(line_no) + ": " + problem);
      continue;
    }
    data.insert(data.end(), row.begin(), row.end());
    ++n;
  }
  if (n == 0) throw DataError(source + ": no usable rows");
  out.sample.rows = PointMatrix(n, m, std::move(data));
  return out;
}

IngestResult ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, path);
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorKind::kInternal, "format_double failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Sample& sample) {
  for (std::size_t j = 0; j < sample.m(); ++j) {
    if (j) out << ',';
    out << (j < sample.column_names.size() ? sample.column_names[j] : "x" + std::to_string(j + 1));
  }
  out << '\n';
  for (std::size_t i = 0; i < sample.n(); ++i) {
    for (std::size_t j = 0; j < sample.m(); ++j) {
      if (j) out << ',';
      out << format_double(sample.rows(i, j));
    }
    out << '\n';
  }
}

}  // namespace ldptail
