#include "kappa/report.hpp"

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "kappa/error.hpp"

#ifndef KAPPA_LAB_VERSION
#define KAPPA_LAB_VERSION "0.0.0"
#endif

namespace kappa {

namespace {

using namespace std::string_view_literals;

constexpr std::array kBiasColumns{"n"sv, "runs"sv, "q"sv, "mean"sv, "median"sv, "std"sv,
                                  "population_kappa"sv, "bias"sv, "frozen_threshold"sv,
                                  "frozen_mean"sv, "frozen_bias"sv};
constexpr std::array kSuperAddColumns{"sizes"sv, "runs"sv, "q"sv, "identical_laws"sv,
                                      "e_kappa_full"sv, "weighted_avg_parts"sv, "gap"sv,
                                      "gap_std_error"sv, "z_score"sv};
constexpr std::array kConvergenceColumns{"n"sv, "runs"sv, "h"sv, "mean_kappa_h"sv, "std_error"sv,
                                         "population_kappa_h"sv};
constexpr std::array kScalingColumns{"n"sv, "bias"sv, "fitted_bias"sv, "c_hat"sv, "exponent_hat"sv,
                                     "r_squared"sv};
constexpr std::array kCorrelationColumns{"bucket"sv, "mean_sum"sv, "mean_kappa"sv, "pearson"sv,
                                         "spearman"sv, "pearson_z"sv, "spearman_z"sv, "degenerate"sv};
constexpr std::array kMixtureColumns{"n"sv, "runs"sv, "q"sv, "mc_mean"sv, "mc_median"sv, "mc_std"sv,
                                     "population_mixture_kappa"sv, "weighted_component_kappa"sv,
                                     "mean_alpha_kappa"sv};

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

Cell count(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }

std::string render_number(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

std::string render_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return render_number(v);
        } else {
          return v;
        }
      },
      cell);
}

void append_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

template <class Fields>
void append_line(std::string& out, const Fields& fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out.push_back(',');
    first = false;
    append_field(out, f);
  }
  out.push_back('\n');
}

nlohmann::ordered_json cell_to_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      cell);
}

Cell cell_from_json(const nlohmann::ordered_json& j) {
  if (j.is_null()) return Cell{};
  if (j.is_number_float()) return Cell{j.get<double>()};
  if (j.is_number_integer()) return Cell{j.get<std::int64_t>()};
  if (j.is_string()) return Cell{j.get<std::string>()};
  throw DomainError("report: unsupported cell type in JSON");
}

std::string join_sizes(std::span<const std::size_t> sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s.push_back(';');
    s += std::to_string(sizes[i]);
  }
  return s;
}

}  // namespace

std::string_view to_string(ReportKind kind) noexcept {
  switch (kind) {
    case ReportKind::BiasTable: return "bias_table";
    case ReportKind::SuperAdd: return "superadd";
    case ReportKind::Convergence: return "convergence";
    case ReportKind::ScalingFit: return "scaling_fit";
    case ReportKind::Correlation: return "correlation";
    case ReportKind::MixtureBias: return "mixture_bias";
  }
  return "unknown";
}

std::optional<ReportKind> parse_report_kind(std::string_view name) noexcept {
  for (auto kind : {ReportKind::BiasTable, ReportKind::SuperAdd, ReportKind::Convergence,
                    ReportKind::ScalingFit, ReportKind::Correlation, ReportKind::MixtureBias}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::span<const std::string_view> report_columns(ReportKind kind) noexcept {
  switch (kind) {
    case ReportKind::BiasTable: return kBiasColumns;
    case ReportKind::SuperAdd: return kSuperAddColumns;
    case ReportKind::Convergence: return kConvergenceColumns;
    case ReportKind::ScalingFit: return kScalingColumns;
    case ReportKind::Correlation: return kCorrelationColumns;
    case ReportKind::MixtureBias: return kMixtureColumns;
  }
  return {};
}

std::string_view tool_version() noexcept { return KAPPA_LAB_VERSION; }

ExperimentReport::ExperimentReport(ReportKind kind, ConfigEcho config, std::vector<Row> rows,
                                   std::string created_at, std::string version)
    : kind_(kind),
      config_(std::move(config)),
      rows_(std::move(rows)),
      created_at_(std::move(created_at)),
      version_(std::move(version)) {
  if (!config_.is_object()) throw DomainError("report: config echo must be a JSON object");
  if (rows_.empty()) throw DomainError("report: at least one row required");
  const std::size_t width = report_columns(kind_).size();
  for (const auto& row : rows_) {
    if (row.size() != width) {
      throw DomainError("report: row width " + std::to_string(row.size()) + " does not match " +
                        std::to_string(width) + " columns of " + std::string(to_string(kind_)));
    }
  }
}

std::string to_csv(const ExperimentReport& report) {
  std::string out;
  append_line(out, report_columns(report.kind()));
  std::vector<std::string> fields;
  for (const auto& row : report.rows()) {
    fields.clear();
    for (const auto& cell : row) fields.push_back(render_cell(cell));
    append_line(out, fields);
  }
  return out;
}

std::string to_json(const ExperimentReport& report) {
  nlohmann::ordered_json doc;
  doc["kind"] = std::string(to_string(report.kind()));
  doc["tool_version"] = report.version();
  doc["created_at"] = report.created_at();
  doc["config"] = report.config();
  const auto columns = report_columns(report.kind());
  auto& cols = doc["columns"] = nlohmann::ordered_json::array();
  for (auto c : columns) cols.push_back(std::string(c));
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows()) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < columns.size(); ++i) obj[std::string(columns[i])] = cell_to_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("report: invalid JSON: ") + e.what());
  }
  try {
    const auto kind = parse_report_kind(doc.at("kind").get<std::string>());
    if (!kind) throw DomainError("report: unknown kind");
    const auto columns = report_columns(*kind);
    std::vector<Row> rows;
    for (const auto& obj : doc.at("rows")) {
      Row row;
      for (auto c : columns) row.push_back(cell_from_json(obj.at(std::string(c))));
      rows.push_back(std::move(row));
    }
    return ExperimentReport(*kind, doc.at("config"), std::move(rows),
                            doc.at("created_at").get<std::string>(),
                            doc.at("tool_version").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("report: malformed document: ") + e.what());
  }
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool pending = false;  // a record has started on the current line
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        pending = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        pending = true;
        break;
      case '\r':
        break;
      case '\n':
        record.push_back(std::move(field));
        field.clear();
        lines.push_back(std::move(record));
        record.clear();
        pending = false;
        break;
      default:
        field.push_back(c);
        pending = true;
    }
  }
  if (quoted) throw DomainError("csv: unterminated quoted field");
  if (pending) {
    record.push_back(std::move(field));
    lines.push_back(std::move(record));
  }
  if (lines.empty()) throw DomainError("csv: missing header row");

  CsvTable table;
  table.header = std::move(lines.front());
  table.rows.assign(std::make_move_iterator(lines.begin() + 1), std::make_move_iterator(lines.end()));
  return table;
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  append_line(out, table.header);
  for (const auto& row : table.rows) append_line(out, row);
  return out;
}

std::string default_report_name(ReportKind kind, std::uint64_t master_seed, std::string_view extension) {
  std::string name(to_string(kind));
  for (char& c : name) {
    if (c == '_') c = '-';
  }
  return name + "-" + std::to_string(master_seed) + "." + std::string(extension);
}

std::string format_utc(std::int64_t unix_seconds) {
  const auto t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::string reproducible_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') return format_utc(v);
  }
  return format_utc(0);
}

nlohmann::ordered_json spec_to_json(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& p) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(p)>;
        nlohmann::ordered_json j;
        if constexpr (std::is_same_v<T, ParetoParams>) {
          j["law"] = "pareto";
          j["alpha"] = p.alpha;
          j["x_min"] = p.x_min;
        } else if constexpr (std::is_same_v<T, LognormalParams>) {
          j["law"] = "lognormal";
          j["mu"] = p.mu;
          j["sigma"] = p.sigma;
        } else {
          j["law"] = "mixture";
          j["weights"] = p.weights;
          auto& alphas = j["alphas"] = nlohmann::ordered_json::array();
          for (const auto& c : p.components) alphas.push_back(c.alpha);
        }
        return j;
      },
      spec);
}

DistributionSpec spec_from_json(const nlohmann::ordered_json& j) {
  try {
    const auto law = j.at("law").get<std::string>();
    if (law == "pareto") {
      ParetoParams p{j.at("alpha").get<double>(), j.at("x_min").get<double>()};
      validate(p);
      return p;
    }
    if (law == "lognormal") {
      LognormalParams p{j.at("mu").get<double>(), j.at("sigma").get<double>()};
      validate(p);
      return p;
    }
    if (law == "mixture") {
      const auto alphas = j.at("alphas").get<std::vector<double>>();
      return MixtureSpec::unit_mean(j.at("weights").get<std::vector<double>>(), alphas);
    }
    throw DomainError("spec: unknown law '" + law + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("spec: malformed JSON: ") + e.what());
  }
}

ExperimentReport bias_table_report(ConfigEcho config, std::span<const McSummary> rows,
                                   std::string created_at) {
  std::vector<Row> out;
  for (const auto& s : rows) {
    const Cell bias = s.population_kappa ? Cell{*s.population_kappa - s.mean} : Cell{};
    const Cell frozen_bias =
        s.population_kappa && s.frozen_mean ? Cell{*s.population_kappa - *s.frozen_mean} : Cell{};
    out.push_back({count(s.n), count(s.runs), s.q, s.mean, s.median, s.std, opt(s.population_kappa),
                   bias, opt(s.frozen_threshold), opt(s.frozen_mean), frozen_bias});
  }
  return ExperimentReport(ReportKind::BiasTable, std::move(config), std::move(out), std::move(created_at));
}

ExperimentReport superadd_report(ConfigEcho config, const SuperAddRecord& r, double q,
                                 std::string created_at) {
  std::vector<Row> out{{join_sizes(r.sizes), count(r.runs), q,
                        std::string(r.identical_laws ? "true" : "false"), r.e_kappa_full,
                        r.weighted_avg_parts, r.gap, r.gap_std_error, r.z_score}};
  return ExperimentReport(ReportKind::SuperAdd, std::move(config), std::move(out), std::move(created_at));
}

ExperimentReport convergence_report(ConfigEcho config, const ConvergenceResult& result,
                                    std::size_t runs, std::string created_at) {
  std::vector<Row> out;
  for (const auto& p : result.points) {
    out.push_back({count(p.n), count(runs), result.h, p.mean, p.std_error, opt(result.population_kappa_h)});
  }
  return ExperimentReport(ReportKind::Convergence, std::move(config), std::move(out),
                          std::move(created_at));
}

ExperimentReport scaling_fit_report(ConfigEcho config, const ScalingFit& fit, std::string created_at) {
  std::vector<Row> out;
  for (const auto& p : fit.points) {
    const double fitted = fit.c_hat * std::pow(p.n, -fit.exponent_hat);
    out.push_back({p.n, p.bias, fitted, fit.c_hat, fit.exponent_hat, fit.r_squared});
  }
  return ExperimentReport(ReportKind::ScalingFit, std::move(config), std::move(out),
                          std::move(created_at));
}

ExperimentReport correlation_report(ConfigEcho config, const CorrRecord& r, std::string created_at) {
  std::vector<Row> out;
  for (const auto& b : r.bucket_means) {
    out.push_back({count(b.bucket), b.mean_sum, b.mean_kappa, r.pearson, r.spearman, r.pearson_z,
                   r.spearman_z, std::string(r.degenerate ? "true" : "false")});
  }
  return ExperimentReport(ReportKind::Correlation, std::move(config), std::move(out),
                          std::move(created_at));
}

ExperimentReport mixture_bias_report(ConfigEcho config, const MixtureBiasRecord& r,
                                     std::string created_at) {
  std::vector<Row> out{{count(r.summary.n), count(r.summary.runs), r.summary.q, r.mc_mean,
                        r.summary.median, r.summary.std, r.population_mixture_kappa,
                        r.weighted_component_kappa, r.mean_alpha_kappa}};
  return ExperimentReport(ReportKind::MixtureBias, std::move(config), std::move(out),
                          std::move(created_at));
}

}  // namespace kappa
