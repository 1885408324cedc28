#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risres::io {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IniEntry {
  std::string value;
  int line = 0;
};

// Minimal INI-style document: [section] headers, key = value pairs, blank
// lines, and full-line comments starting with '#' or ';'. Values are kept
// verbatim (trimmed); duplicate keys within a section are an error.
class Ini {
 public:
  using SectionMap = std::map<std::string, std::map<std::string, IniEntry>>;

  // `origin` names the source in error messages (file name or "<string>").
  static Ini parse(const std::string& text, std::string origin);
  static Ini parse_file(const std::string& path);

  [[nodiscard]] const IniEntry* find(const std::string& section,
                                     const std::string& key) const;
  [[nodiscard]] const SectionMap& sections() const { return sections_; }
  [[nodiscard]] const std::string& origin() const { return origin_; }

 private:
  SectionMap sections_;
  std::string origin_;
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Comma-separated items, each trimmed of surrounding whitespace.
std::vector<std::string> split_list(const std::string& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), y in [0, 1]
};

// Deterministic standalone SVG line chart with a fixed [0, 1] y-axis.
// The x-axis is log-scaled when log_x is set and every x is positive.
std::string render_line_chart_svg(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label, bool log_x,
                                  const std::vector<ChartSeries>& series);

}  // namespace risres::io
