#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ado::cli {

/// 17 significant digits, so reruns compare byte for byte.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(const std::vector<std::string>& cells) {
    rows_.push_back(cells);
    return *this;
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    append(out, header_);
    for (const auto& r : rows_) append(out, r);
    return out;
  }

 private:
  static void append(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Reads "h,value" rows. A first line that does not parse as numbers is
/// taken as a header.
inline bool parse_two_column_csv(const std::string& text, std::vector<double>& a, std::vector<double>& b,
                                 std::string& error) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    bool ok = comma != std::string::npos;
    double x = 0.0, y = 0.0;
    if (ok) {
      try {
        std::size_t used = 0;
        x = std::stod(line.substr(0, comma), &used);
        y = std::stod(line.substr(comma + 1), &used);
      } catch (...) {
        ok = false;
      }
    }
    if (!ok) {
      if (line_no == 1 && a.empty()) continue;
      error = "line " + std::to_string(line_no) + ": expected two numbers";
      return false;
    }
    a.push_back(x);
    b.push_back(y);
  }
  return true;
}

}  // namespace ado::cli
