#include "geosched/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace geosched::csv {

std::string format_number(double value) { return fmt::format("{}", value); }

void write(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  if (!table.header.empty()) out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_number(row[i]);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size() && numeric; ++i) numeric = parse_double(cells[i], row[i]);
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        table.header = std::move(cells);
        continue;
      }
      throw std::runtime_error(fmt::format("{}:{}: non-numeric row", path.string(), line_no));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_column(const std::filesystem::path& path, const std::string& name,
                  const std::vector<double>& values) {
  Table t;
  t.header = {name};
  t.rows.reserve(values.size());
  for (double v : values) t.rows.push_back({v});
  write(path, t);
}

std::vector<double> read_column(const std::filesystem::path& path) {
  auto t = read(path);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    if (r.size() != 1) throw std::runtime_error(path.string() + ": expected one column");
    out.push_back(r[0]);
  }
  return out;
}

}  // namespace geosched::csv
