#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace degenwave::cli {

// Exit codes
constexpr int kOk = 0;
constexpr int kFailure = 1;  // step failure, I/O, fit failure, failed sweep cells
constexpr int kViolation = 2;
constexpr int kParseError = 3;
constexpr int kCountMismatch = 4;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<int> n_cells;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<int> k_min;
  std::optional<int> k_max;
  std::string grid;
  std::string trace;  // fit: existing energy.csv instead of a fresh run
  bool svg = false;
};

int cmd_check(const Options& o, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err);
int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err);
int cmd_fit(const Options& o, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err);

/// Full command line entry point (parses argv with CLI11).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace degenwave::cli
