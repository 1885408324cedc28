#include "risres/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace risres::io {
namespace {

std::string trim(const std::string& s) {
  const auto* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail_at(const std::string& origin, int line,
                          const std::string& message) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + message);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return {buf.data()};
}

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%g", v);
  return {buf.data()};
}

}  // namespace

Ini Ini::parse(const std::string& text, std::string origin) {
  Ini ini;
  ini.origin_ = std::move(origin);
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        fail_at(ini.origin_, line_no, "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        fail_at(ini.origin_, line_no, "empty section name");
      }
      ini.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at(ini.origin_, line_no, "expected 'key = value': '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail_at(ini.origin_, line_no, "empty key");
    }
    if (section.empty()) {
      fail_at(ini.origin_, line_no,
              "key '" + key + "' appears before any [section]");
    }
    auto [it, inserted] =
        ini.sections_[section].emplace(key, IniEntry{value, line_no});
    if (!inserted) {
      fail_at(ini.origin_, line_no,
              "duplicate key '" + key + "' in [" + section + "] (first on line " +
                  std::to_string(it->second.line) + ")");
    }
  }
  return ini;
}

Ini Ini::parse_file(const std::string& path) {
  return parse(read_text_file(path), path);
}

const IniEntry* Ini::find(const std::string& section,
                          const std::string& key) const {
  const auto sec = sections_.find(section);
  if (sec == sections_.end()) return nullptr;
  const auto entry = sec->second.find(key);
  if (entry == sec->second.end()) return nullptr;
  return &entry->second;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), result.ptr};
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto end = (comma == std::string::npos) ? value.size() : comma;
    items.push_back(trim(value.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "' for reading");
  }
  std::ostringstream out;
  out << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw ParseError("failed while reading '" + path + "'");
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw ParseError("cannot create directory '" + p.parent_path().string() +
                       "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ParseError("cannot open '" + path + "' for writing");
  }
  out << content;
  out.flush();
  if (!out.good()) {
    throw ParseError("failed while writing '" + path + "'");
  }
}

std::string render_line_chart_svg(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label, bool log_x,
                                  const std::vector<ChartSeries>& series) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 700.0;
  constexpr double kTop = 50.0;
  constexpr double kBottom = 420.0;
  static const std::array<const char*, 8> kPalette = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
      "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::vector<double> xs;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const bool use_log =
      log_x && !xs.empty() && std::all_of(xs.begin(), xs.end(), [](double x) {
        return x > 0.0;
      });
  const auto fwd = [use_log](double x) { return use_log ? std::log10(x) : x; };
  double x_min = xs.empty() ? 0.0 : fwd(xs.front());
  double x_max = xs.empty() ? 1.0 : fwd(xs.back());
  if (x_max - x_min < 1e-12) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  const auto px = [&](double x) {
    return kLeft + (fwd(x) - x_min) / (x_max - x_min) * (kRight - kLeft);
  };
  const auto py = [&](double y) {
    const double c = std::clamp(y, 0.0, 1.0);
    return kBottom - c * (kBottom - kTop);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << coord((kLeft + kRight) / 2) << "\" y=\"28\" "
      << "text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">"
      << xml_escape(title) << (use_log ? " (log x)" : " (linear x)")
      << "</text>\n";

  // Axes and y gridlines.
  for (int i = 0; i <= 5; ++i) {
    const double y = 0.2 * i;
    const std::string yy = coord(py(y));
    svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << yy << "\" x2=\""
        << coord(kRight) << "\" y2=\"" << yy
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(py(y) + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">"
        << tick_label(y) << "</text>\n";
  }
  std::vector<double> ticks = xs;
  if (ticks.size() > 12) {
    std::vector<double> pruned;
    for (std::size_t i = 0; i < ticks.size(); i += (ticks.size() + 11) / 12) {
      pruned.push_back(ticks[i]);
    }
    if (pruned.back() != ticks.back()) pruned.push_back(ticks.back());
    ticks = pruned;
  }
  for (double x : ticks) {
    const std::string xx = coord(px(x));
    svg << "<line x1=\"" << xx << "\" y1=\"" << coord(kBottom) << "\" x2=\""
        << xx << "\" y2=\"" << coord(kBottom + 6)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << xx << "\" y=\"" << coord(kBottom + 22)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"12\">"
        << tick_label(x) << "</text>\n";
  }
  svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kTop)
      << "\" x2=\"" << coord(kLeft) << "\" y2=\"" << coord(kBottom)
      << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kBottom)
      << "\" x2=\"" << coord(kRight) << "\" y2=\"" << coord(kBottom)
      << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg << "<text x=\"" << coord((kLeft + kRight) / 2) << "\" y=\""
      << coord(kBottom + 44)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"14\">"
      << xml_escape(x_label) << "</text>\n";
  svg << "<text x=\"24\" y=\"" << coord((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\""
      << " transform=\"rotate(-90 24 " << coord((kTop + kBottom) / 2) << ")\">"
      << xml_escape(y_label) << "</text>\n";

  // Series polylines and markers.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPalette.size()];
    auto points = series[s].points;
    std::sort(points.begin(), points.end());
    std::ostringstream poly;
    for (const auto& [x, y] : points) {
      poly << coord(px(x)) << "," << coord(py(y)) << " ";
    }
    svg << "<polyline points=\"" << poly.str() << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n";
    for (const auto& [x, y] : points) {
      svg << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }

  // Legend.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPalette.size()];
    const double y = kTop + 10 + 18.0 * static_cast<double>(s);
    svg << "<rect x=\"" << coord(kRight - 180) << "\" y=\"" << coord(y - 9)
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << coord(kRight - 162) << "\" y=\"" << coord(y + 2)
        << "\" font-family=\"monospace\" font-size=\"12\">"
        << xml_escape(series[s].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace risres::io
