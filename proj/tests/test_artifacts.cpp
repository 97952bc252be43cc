#include <algorithm>
#include <filesystem>
#include <fstream>

#include "degenwave/artifacts.hpp"
#include "doctest.h"

using namespace degenwave::artifacts;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("degenwave_artifacts_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("17 significant digits") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(format_double(-2.5) == "-2.5000000000000000e+00");
  CHECK(format_double(0.0) == "0.0000000000000000e+00");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 2.2250738585072014e-308}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv writer and reader") {
  CsvWriter w({"k", "value", "note"});
  w.row({3, 0.25, "plain"}).row({4, -1.0, "has, comma"});
  CHECK(w.str() == "k,value,note\n3,2.5000000000000000e-01,plain\n4,-1.0000000000000000e+00,\"has, comma\"\n");
  CHECK_THROWS_AS(w.row({1}), IoError);

  const auto dir = scratch("csv");
  w.save((dir / "t.csv").string());
  const auto t = read_csv((dir / "t.csv").string());
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][2] == "has, comma");
  CHECK(t.numbers("value") == std::vector<double>{0.25, -1.0});
  CHECK_THROWS_AS(t.numbers("missing"), IoError);
  CHECK_THROWS_AS(t.numbers("note"), IoError);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest lists and verifies every file") {
  const auto dir = scratch("manifest");
  write_text((dir / "a.csv").string(), "x\n1\n");
  write_text((dir / "sub" / "b.svg").string(), "<svg/>\n");
  Manifest m(dir.string(), {{"alpha_per_time2", 0.1}});
  m.add_file("a.csv");
  m.add_file("sub/b.svg");
  m.add_file("a.csv");
  m.set("quadrature_error", 1e-11);
  m.write();

  std::ifstream in(dir / "manifest.json");
  const auto doc = json::parse(in);
  CHECK(doc["files"].size() == 2);
  CHECK(doc["config"]["alpha_per_time2"] == 0.1);
  CHECK(doc["quadrature_error"] == 1e-11);
  CHECK(doc["timestamps"].contains("started"));
  CHECK(doc["versions"].contains("spectrum"));
  CHECK(verify_manifest(dir.string()).ok);

  write_text((dir / "a.csv").string(), "x\n2\n");
  auto check = verify_manifest(dir.string());
  CHECK_FALSE(check.ok);
  CHECK(check.problems.at(0).find("a.csv") != std::string::npos);

  fs::remove(dir / "sub" / "b.svg");
  CHECK(verify_manifest(dir.string()).problems.size() == 2);
}

TEST_CASE("svg panels") {
  Panel p{"energy", "t", "E", true, true, {{"E", {0.0, 1.0, 10.0, 100.0}, {1.0, 0.5, 0.1, -1.0}}}};
  Panel q{"trend", "k", "v", false, false, {{"a", {1, 2, 3}, {3, 2, 1}}, {"b", {1, 2}, {0, 0}}}};
  const auto svg = render_svg({p, q});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("width=\"960.00\"") != std::string::npos);
  // t = 0 and E < 0 are dropped on the log panel: two points remain
  const auto first = svg.find("<polyline");
  const auto pts = svg.substr(svg.find("points=\"", first) + 8);
  CHECK(std::count(pts.begin(), pts.begin() + pts.find('"'), ',') == 2);
  CHECK(svg.find("</svg>") != std::string::npos);
}
