#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kappa/distributions.hpp"

namespace kappa::cli {

/// Bad flags, bad config entries or violated preconditions. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subcommand { Kappa, Sample, BiasTable, SuperAdd, Converge, Mixture, Corr, ScalingFit, StochAlpha };
enum class OutputFormat { Table, Csv, Json };

struct CliConfig {
  Subcommand subcommand = Subcommand::Kappa;
  std::uint64_t seed = 0;
  std::optional<std::size_t> runs;
  std::vector<std::size_t> n;
  double q = 0.01;
  std::vector<double> alpha;
  double x_min = 1.0;
  std::vector<double> weights;
  std::string dist = "pareto";
  double mu = 0.0;
  double sigma = 1.0;
  std::optional<double> h;
  std::optional<double> mean;
  std::optional<double> delta;
  std::vector<std::size_t> parts;
  std::vector<std::string> points;  // "n:bias"
  std::optional<std::string> out;
  OutputFormat format = OutputFormat::Table;
  std::optional<unsigned> threads;
  bool wall_clock = false;
};

/// Raw `key -> values` settings, as read from a config file or the command line.
using Settings = std::map<std::string, std::vector<std::string>>;

/// Reads `key = value` lines; `#` starts a comment, lists are comma separated
/// and repeated keys append. Unknown keys and malformed values raise
/// UsageError naming the line number.
Settings read_config_settings(const std::filesystem::path& path);

/// Applies settings to `config`, validating each value against the domain of
/// the operation it feeds.
void apply_settings(CliConfig& config, const Settings& settings, const std::string& origin);

/// parse_config_file(path): defaults overlaid with the file's settings.
CliConfig parse_config_file(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. Results go to `out`
/// (or the --out path), diagnostics to `err`. Returns the process exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

DistributionSpec make_spec(const CliConfig& config);

}  // namespace kappa::cli
