#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldptail/transform.hpp"

namespace ldptail {

struct IngestResult {
  Sample sample;
  std::size_t rows_dropped = 0;
  std::vector<std::string> diagnostics;  // one line per dropped row
};

// Comma-separated text with a header row. Rows with a missing, non-numeric or
// non-finite cell, or with the wrong number of cells, are dropped and reported.
// Throws DataError when the file cannot be read, has no header, or has no
// usable row left.
IngestResult ingest_csv(const std::string& path);
IngestResult parse_csv(std::istream& in, const std::string& source = "<stream>");

// Shortest text that reads back to the same double (at most 17 significant digits).
std::string format_double(double value);

// Header row of column names, then one line per observation.
void write_csv(std::ostream& out, const Sample& sample);

}  // namespace ldptail
