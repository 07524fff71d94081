#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace geosched::csv {

/// Shortest round-trip decimal form of a double. Used for every numeric
/// field written by the toolkit so that outputs are byte-reproducible.
std::string format_number(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write(const std::filesystem::path& path, const Table& table);

/// Reads a numeric CSV. A first row that does not parse as numbers is taken as
/// the header. Throws std::runtime_error on malformed rows.
Table read(const std::filesystem::path& path);

/// Single-column convenience wrappers.
void write_column(const std::filesystem::path& path, const std::string& name,
                  const std::vector<double>& values);
std::vector<double> read_column(const std::filesystem::path& path);

}  // namespace geosched::csv
