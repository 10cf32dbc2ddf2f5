#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace vexrisk {

/// Deterministic decimal rendering used everywhere a number reaches an
/// output stream; %.12g keeps reports byte-stable across runs.
inline std::string format_number(double x) {
  if (x == 0.0) return "0";  // fold negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

/// A command report: echoed configuration, a table of tagged results and
/// optional witness lines. The structured rendering is line-oriented
/// key = value text with stable ordering and no timing information, so two
/// runs with the same inputs and seed are byte-identical; the text
/// rendering is for humans and includes the wall clock.
class Report {
public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  void config(const std::string& key, const std::string& value) {
    config_.emplace_back(key, value);
  }
  void config(const std::string& key, double value) { config(key, format_number(value)); }

  void row(const std::string& quantity, double value, const std::string& method,
           const std::string& tolerance) {
    rows_.push_back({quantity, format_number(value), method, tolerance});
  }
  void row_text(const std::string& quantity, const std::string& value, const std::string& method,
                const std::string& tolerance) {
    rows_.push_back({quantity, value, method, tolerance});
  }

  void witness(const std::string& line) { witnesses_.push_back(line); }

  void wall_ms(double ms) { wall_ms_ = ms; }

  std::string structured() const {
    std::ostringstream out;
    out << "command = " << command_ << "\n";
    for (const auto& [k, v] : config_) out << "config." << k << " = " << v << "\n";
    for (const auto& r : rows_) {
      out << "result." << r.quantity << " = " << r.value << "\n";
      out << "result." << r.quantity << ".method = " << r.method << "\n";
      out << "result." << r.quantity << ".tolerance = " << r.tolerance << "\n";
    }
    for (std::size_t i = 0; i < witnesses_.size(); ++i)
      out << "witness[" << i << "] = " << witnesses_[i] << "\n";
    return out.str();
  }

  std::string text() const {
    std::ostringstream out;
    out << "== " << command_ << " ==\n";
    for (const auto& [k, v] : config_) out << "  " << k << ": " << v << "\n";
    for (const auto& r : rows_)
      out << "  " << r.quantity << " = " << r.value << "   [" << r.method
          << ", tol " << r.tolerance << "]\n";
    for (const auto& w : witnesses_) out << "  witness: " << w << "\n";
    out << "  elapsed: " << format_number(wall_ms_) << " ms\n";
    return out.str();
  }

private:
  struct Row {
    std::string quantity, value, method, tolerance;
  };

  std::string command_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<Row> rows_;
  std::vector<std::string> witnesses_;
  double wall_ms_ = 0.0;
};

}  // namespace vexrisk
