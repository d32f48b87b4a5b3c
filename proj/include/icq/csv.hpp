#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace icq {

/// Formats a double with enough digits to round-trip (diff-stable output).
std::string csv_number(double v);

// Append-style writer, flushed after every row so interrupted runs leave a
// valid file behind.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);

  private:
    std::ofstream out_;
    std::size_t width_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    double number(std::size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace icq
