#include "degenwave/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace degenwave::artifacts {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const json& c) {
  if (c.is_number_integer()) return std::to_string(c.get<long long>());
  if (c.is_number()) return format_double(c.get<double>());
  if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
  if (c.is_null()) return "";
  if (c.is_string()) return quote_if_needed(c.get<std::string>());
  return quote_if_needed(c.dump());
}

std::vector<std::string> split_csv_line(const std::string& line) {
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
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += quote_if_needed(header[i]);
  }
  text_ += '\n';
}

CsvWriter& CsvWriter::row(const std::vector<json>& cells) {
  if (cells.size() != width_) throw IoError("csv row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cell_text(cells[i]);
  }
  text_ += '\n';
  return *this;
}

void CsvWriter::save(const std::string& path) const { write_text(path, text_); }

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw IoError("csv has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (static_cast<std::size_t>(c) >= r.size()) throw IoError("short csv row");
    try {
      out.push_back(std::stod(r[c]));
    } catch (const std::exception&) {
      throw IoError("non-numeric value '" + r[c] + "' in column '" + name + "'");
    }
  }
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::istringstream in(read_bytes(path));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv '" + path + "'");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_bytes(path)); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- SVG ----------------------------------------------------------------

namespace {

constexpr double kPanelW = 480, kPanelH = 360;
constexpr double kLeft = 70, kRight = 20, kTop = 36, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string tick_label(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8.0)));
      for (int e = static_cast<int>(std::ceil(lo)); e <= std::floor(hi); e += step) out.push_back(std::pow(10.0, e));
    } else {
      const double raw = (hi - lo) / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) out.push_back(v);
    }
    return out;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const Panel& p, bool x) {
  Axis a;
  a.log = x ? p.log_x : p.log_y;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], p.log_x) || !usable(s.y[i], p.log_y)) continue;
      const double v = a.map(x ? s.x[i] : s.y[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

void render_panel(std::ostringstream& os, const Panel& p, double x0) {
  const Axis ax = make_axis(p, true), ay = make_axis(p, false);
  const double pw = kPanelW - kLeft - kRight, ph = kPanelH - kTop - kBottom;
  const double left = x0 + kLeft, top = kTop;
  auto px = [&](double v) { return left + ax.frac(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.frac(v)) * ph; };

  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << esc(p.title) << "</text>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(kPanelH - 10)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << esc(p.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(x0 + 16) << "," << num(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << esc(p.y_label) << "</text>\n";
  for (double t : ax.ticks()) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
       << num(top + ph + 5) << "\" stroke=\"#333\"/><text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
       << num(py(t)) << "\" stroke=\"#333\"/><text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 3)
       << "\" text-anchor=\"end\" font-size=\"10\">" << tick_label(t) << "</text>\n";
  }
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], p.log_x) || !usable(s.y[i], p.log_y)) continue;
      os << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(left + pw - 6) << "\" y=\"" << num(top + 16 + 14 * k) << "\" text-anchor=\"end\""
       << " font-size=\"11\" fill=\"" << color << "\">" << esc(s.label) << "</text>\n";
  }
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels) {
  std::ostringstream os;
  const double width = kPanelW * std::max<std::size_t>(1, panels.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(kPanelH)
     << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) render_panel(os, panels[i], kPanelW * i);
  os << "</svg>\n";
  return os.str();
}

// ---- manifest -----------------------------------------------------------

Manifest::Manifest(std::string dir, json config_echo)
    : dir_(std::move(dir)), config_(std::move(config_echo)), started_(utc_timestamp()) {}

void Manifest::add_file(const std::string& relative_path) {
  if (std::find(files_.begin(), files_.end(), relative_path) == files_.end()) files_.push_back(relative_path);
}

void Manifest::write() {
  json doc;
  doc["tool"] = "degenwave";
  doc["versions"] = {{"degenwave", kVersion}, {"specfun", kVersion}, {"fracdiff", kVersion},
                     {"model", kVersion},     {"discretize", kVersion}, {"timestep", kVersion},
                     {"spectrum", kVersion},  {"decay", kVersion},      {"cli", kVersion}};
  doc["config"] = config_;
  doc["timestamps"] = {{"started", started_}, {"finished", utc_timestamp()}};
  for (const auto& [k, v] : extra_.items()) doc[k] = v;
  json files = json::array();
  for (const auto& f : files_) {
    const std::string full = (fs::path(dir_) / f).string();
    files.push_back({{"path", f}, {"bytes", fs::file_size(full)}, {"sha256", sha256_file(full)}});
  }
  doc["files"] = files;
  write_text((fs::path(dir_) / "manifest.json").string(), doc.dump(2) + "\n");
}

ManifestCheck verify_manifest(const std::string& dir) {
  ManifestCheck r;
  json doc;
  try {
    doc = json::parse(read_bytes((fs::path(dir) / "manifest.json").string()));
  } catch (const std::exception& e) {
    r.ok = false;
    r.problems.push_back(std::string("manifest unreadable: ") + e.what());
    return r;
  }
  for (const auto& f : doc.value("files", json::array())) {
    const std::string rel = f.value("path", "");
    const fs::path full = fs::path(dir) / rel;
    if (!fs::exists(full)) {
      r.ok = false;
      r.problems.push_back("missing: " + rel);
      continue;
    }
    if (sha256_file(full.string()) != f.value("sha256", "") || fs::file_size(full) != f.value("bytes", 0ull)) {
      r.ok = false;
      r.problems.push_back("hash mismatch: " + rel);
    }
  }
  return r;
}

}  // namespace degenwave::artifacts
