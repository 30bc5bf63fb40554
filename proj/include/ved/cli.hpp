#pragma once

// Command-line front end: subcommands ved, code-ved, min-list, simulate and
// sweep. Kept as a library so the test suite can drive it in-process.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ved/geometry.hpp"
#include "ved/listmin.hpp"
#include "ved/simulator.hpp"

namespace ved::cli {

using Settings = std::map<std::string, std::string>;

// `key = value` lines, `#` comments, surrounding whitespace trimmed.
Settings parse_config(std::istream& in);

// Keys accepted by each subcommand (config file keys use underscores, the
// matching flags use dashes).
const std::vector<std::string>& allowed_keys(std::string_view command);

// Validated settings for one run. Fields irrelevant to a command keep their
// defaults.
struct RunConfig {
  std::string command;
  std::string code = "rate=1/2 gens=5,7 mem=2";
  std::string vectors;
  std::string out;
  std::string svg;
  geometry::Strategy strategy = geometry::Strategy::kIterative;
  int list_size = 1;
  int max_list = 8;
  int max_weight = 8;
  int max_steps = 32;
  bool unmerged = false;
  std::int64_t window = 8;
  std::size_t node_cap = 10'000'000;
  double symbol_energy = 1.0;
  std::optional<double> target;
  sim::DecoderKind decoder = sim::DecoderKind::kViterbi;
  double ebno = 5.0;
  std::vector<double> ebno_grid;
  std::size_t trials = 10'000;
  std::uint64_t seed = 1;
  int info_len = 100;
  int workers = 1;
  std::optional<double> min_ved;
};

// Throws kInvalidConfig on unknown keys or values outside module
// preconditions.
RunConfig make_run_config(std::string_view command, const Settings& settings);

// "a:b:step", inclusive of b. Throws kInvalidConfig when empty.
std::vector<double> parse_grid(std::string_view text);

// Nine significant digits, enough to re-parse every emitted value exactly.
std::string format_number(double v);

std::string run_ved(const RunConfig& config, std::istream& vectors);
std::string run_code_ved(const RunConfig& config);
std::string run_min_list(const RunConfig& config);
std::string run_simulate(const RunConfig& config);

struct SweepOutput {
  std::string csv;
  std::string svg;
};
SweepOutput run_sweep(const RunConfig& config);

std::string listmin_csv_header();
std::string listmin_csv_row(const listmin::ListSpec& spec);
std::string sim_csv_header();
std::string sim_csv_row(const sim::SimResult& r);

// Self-contained log-scale plot of P_CE with 95% bars and the asymptote.
std::string render_svg(const std::vector<sim::SimResult>& results,
                       const std::string& title);

// Full command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace ved::cli
