#include "zimed/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace zimed {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV line; double quotes group commas, "" is a literal quote.
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string where(int line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

double parse_cell(const std::string& cell, int line, const std::string& column) {
  if (cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan") {
    throw IngestionError(where(line, column) + ": missing value");
  }
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw IngestionError(where(line, column) + ": not a number ('" + cell + "')");
  }
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text_in, const ColumnMap& cols) {
  std::string text = text_in;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw IngestionError("empty file: header row required");

  auto index_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumnError(name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t iy = index_of(cols.y);
  const std::size_t im = index_of(cols.m);
  const std::size_t ix = index_of(cols.x);
  std::vector<std::size_t> iz;
  for (const auto& z : cols.z) iz.push_back(index_of(z));

  std::vector<Record> recs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw IngestionError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()));
    }
    Record r;
    r.y = parse_cell(cells[iy], lineno, cols.y);
    r.m_star = parse_cell(cells[im], lineno, cols.m);
    r.x = parse_cell(cells[ix], lineno, cols.x);
    for (std::size_t j = 0; j < iz.size(); ++j) r.z.push_back(parse_cell(cells[iz[j]], lineno, cols.z[j]));
    if (r.m_star < 0.0) throw IngestionError("line " + std::to_string(lineno) + ": mediator negative");
    recs.push_back(std::move(r));
  }
  if (recs.empty()) throw IngestionError("dataset is empty: no data rows after the header");
  return Dataset(std::move(recs));
}

Dataset ingest_csv(const std::string& path, const ColumnMap& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open input file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), cols);
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << "y,m,x";
  for (std::size_t j = 0; j < data.n_confounders(); ++j) out << ",z" << j + 1;
  out << '\n' << std::setprecision(17);
  for (const Record& r : data.records()) {
    out << r.y << ',' << r.m_star << ',' << r.x;
    for (double z : r.z) out << ',' << z;
    out << '\n';
  }
}

}  // namespace zimed
