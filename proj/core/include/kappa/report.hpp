#pragma once

// Serialization of experiment results to CSV and JSON.
//
// JSON layout (keys in this order):
//   kind          "bias_table" | "superadd" | "convergence" | "scaling_fit" |
//                 "correlation" | "mixture_bias"
//   tool_version  semantic version of the producing library
//   created_at    ISO-8601 UTC timestamp
//   config        the full input configuration, including master_seed
//   columns       column names, fixed per kind
//   rows          array of objects keyed by column; null marks a missing value
//
// CSV carries the same table: a header row, then one line per row, numbers
// with 6 significant digits, RFC 4180 quoting, '\n' line ends.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kappa/distributions.hpp"
#include "kappa/montecarlo.hpp"

namespace kappa {

enum class ReportKind { BiasTable, SuperAdd, Convergence, ScalingFit, Correlation, MixtureBias };

std::string_view to_string(ReportKind kind) noexcept;
std::optional<ReportKind> parse_report_kind(std::string_view name) noexcept;

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Cell>;
using ConfigEcho = nlohmann::ordered_json;

/// Column names of a report kind, in rendering order.
std::span<const std::string_view> report_columns(ReportKind kind) noexcept;

/// Version string compiled into the library.
std::string_view tool_version() noexcept;

class ExperimentReport {
 public:
  /// Throws DomainError if `rows` is empty, a row has the wrong width, or
  /// `config` is not a JSON object.
  ExperimentReport(ReportKind kind, ConfigEcho config, std::vector<Row> rows,
                   std::string created_at, std::string version = std::string(tool_version()));

  ReportKind kind() const noexcept { return kind_; }
  const ConfigEcho& config() const noexcept { return config_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  const std::string& created_at() const noexcept { return created_at_; }
  const std::string& version() const noexcept { return version_; }

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;

 private:
  ReportKind kind_;
  ConfigEcho config_;
  std::vector<Row> rows_;
  std::string created_at_;
  std::string version_;
};

std::string to_csv(const ExperimentReport& report);
std::string to_json(const ExperimentReport& report);

/// Inverse of to_json. Throws DomainError on malformed documents.
ExperimentReport report_from_json(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 reader for the CSV this module writes.
CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);

/// "<kind>-<master_seed>.<extension>"
std::string default_report_name(ReportKind kind, std::uint64_t master_seed, std::string_view extension);

/// UTC ISO-8601 rendering of a Unix time.
std::string format_utc(std::int64_t unix_seconds);

/// SOURCE_DATE_EPOCH when set, else the Unix epoch, so reports stay
/// byte-reproducible unless the caller asks for wall-clock time.
std::string reproducible_timestamp();

nlohmann::ordered_json spec_to_json(const DistributionSpec& spec);
DistributionSpec spec_from_json(const nlohmann::ordered_json& j);

// Builders for each report kind.
ExperimentReport bias_table_report(ConfigEcho config, std::span<const McSummary> rows,
                                   std::string created_at);
ExperimentReport superadd_report(ConfigEcho config, const SuperAddRecord& record, double q,
                                 std::string created_at);
ExperimentReport convergence_report(ConfigEcho config, const ConvergenceResult& result,
                                    std::size_t runs, std::string created_at);
ExperimentReport scaling_fit_report(ConfigEcho config, const ScalingFit& fit, std::string created_at);
ExperimentReport correlation_report(ConfigEcho config, const CorrRecord& record, std::string created_at);
ExperimentReport mixture_bias_report(ConfigEcho config, const MixtureBiasRecord& record,
                                     std::string created_at);

}  // namespace kappa
