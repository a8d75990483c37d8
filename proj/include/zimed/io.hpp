#pragma once

#include <string>
#include <vector>

#include "zimed/data.hpp"
#include "zimed/error.hpp"

namespace zimed {

struct ColumnMap {
  std::string y = "y";
  std::string m = "m";
  std::string x = "x";
  std::vector<std::string> z;
};

// A requested column is absent from the header.
class MissingColumnError : public IngestionError {
 public:
  explicit MissingColumnError(const std::string& column)
      : IngestionError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

// Comma-separated, header row required. Empty cells and NA are missing
// values; any error names the 1-based file line (header = line 1).
Dataset ingest_csv(const std::string& path, const ColumnMap& columns = {});
Dataset parse_csv(const std::string& text, const ColumnMap& columns = {});

// Writes y, m, x, z1.. columns, round-trip precision.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace zimed
