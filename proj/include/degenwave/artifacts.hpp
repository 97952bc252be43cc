#pragma once

#include <string>
#include <vector>

#include "degenwave/error.hpp"
#include "json.hpp"

namespace degenwave::artifacts {

using nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

constexpr const char* kVersion = "1.0.0";

/// 17 significant digits, scientific ("%.16e"), so that CSV diffs are bit-stable.
std::string format_double(double v);

/// Writes a header line and rows of numbers or strings. Numbers go through format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(const std::vector<json>& cells);
  std::string str() const { return text_; }
  void save(const std::string& path) const;

 private:
  std::size_t width_;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

/// UTC, ISO 8601 with a Z suffix.
std::string utc_timestamp();

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Panel {
  std::string title, x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

/// Side-by-side panels in one SVG document. Non-finite or (on log axes)
/// non-positive points are dropped.
std::string render_svg(const std::vector<Panel>& panels);

/// Manifest bookkeeping for one output directory. Paths are stored relative to it.
class Manifest {
 public:
  Manifest(std::string dir, json config_echo);
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }
  void add_file(const std::string& relative_path);
  /// Hashes every listed file and writes manifest.json (not listed in itself).
  void write();

 private:
  std::string dir_;
  json config_;
  json extra_ = json::object();
  std::vector<std::string> files_;
  std::string started_;
};

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Every listed file exists and its hash and size match.
ManifestCheck verify_manifest(const std::string& dir);

}  // namespace degenwave::artifacts
