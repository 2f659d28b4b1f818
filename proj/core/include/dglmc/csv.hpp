#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dglmc {

/// Shortest representation that round-trips a double exactly (printf %.17g).
std::string format_g17(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Writes comma-separated cells with a header line, '\n' line endings and no
/// quoting (cells must not contain commas or newlines).
void write_csv(const std::string& path, const CsvTable& table);

/// Reads a CSV written by write_csv. Throws on ragged rows.
CsvTable read_csv(const std::string& path);

/// Parses a full-numeric table body into a matrix.
Eigen::MatrixXd csv_to_matrix(const CsvTable& table);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace dglmc
