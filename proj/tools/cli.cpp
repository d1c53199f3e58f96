#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kappa/error.hpp"
#include "kappa/estimators.hpp"
#include "kappa/montecarlo.hpp"
#include "kappa/report.hpp"

namespace kappa::cli {

namespace {

struct KeyInfo {
  const char* name;
  const char* help;
  bool list;
};

constexpr std::array kKeys{
    KeyInfo{"seed", "master seed (unsigned 64-bit, default 0)", false},
    KeyInfo{"runs", "Monte Carlo runs per configuration", false},
    KeyInfo{"n", "sample size; repeat or comma-separate for a grid", true},
    KeyInfo{"q", "top fraction in (0,1), default 0.01", false},
    KeyInfo{"alpha", "tail exponent(s) > 1", true},
    KeyInfo{"x-min", "Pareto lower bound / tail scale, default 1", false},
    KeyInfo{"weights", "mixture or stochastic-alpha weights", true},
    KeyInfo{"dist", "pareto | lognormal | mixture", false},
    KeyInfo{"mu", "lognormal log-location", false},
    KeyInfo{"sigma", "lognormal log-scale > 0", false},
    KeyInfo{"h", "frozen threshold for converge (default: population h(q))", false},
    KeyInfo{"mean", "population mean for the cut-point Pareto share (kappa)", false},
    KeyInfo{"delta", "two-point spread around a single alpha (stochalpha)", false},
    KeyInfo{"parts", "sub-sample sizes for superadd", true},
    KeyInfo{"point", "N:BIAS point for scaling-fit; repeatable", true},
    KeyInfo{"out", "output file, or directory for the default file name", false},
    KeyInfo{"format", "table | csv | json", false},
    KeyInfo{"threads", "worker threads, 0 = auto (env KAPPA_LAB_THREADS)", false},
    KeyInfo{"timestamp", "epoch (reproducible, default) | now", false},
};

struct SubcommandInfo {
  const char* name;
  Subcommand value;
  const char* help;
};

constexpr std::array kSubcommands{
    SubcommandInfo{"kappa", Subcommand::Kappa, "population top-q share of a Pareto law"},
    SubcommandInfo{"sample", Subcommand::Sample, "draw a sample"},
    SubcommandInfo{"bias-table", Subcommand::BiasTable, "Monte Carlo bias of the naive estimator over an n grid"},
    SubcommandInfo{"superadd", Subcommand::SuperAdd, "merged-sample estimate vs weighted part estimates"},
    SubcommandInfo{"converge", Subcommand::Converge, "frozen-threshold estimator over increasing n"},
    SubcommandInfo{"mixture", Subcommand::Mixture, "estimator bias under a Pareto mixture"},
    SubcommandInfo{"corr", Subcommand::Corr, "dependence between the estimate and the sample sum"},
    SubcommandInfo{"scaling-fit", Subcommand::ScalingFit, "log-log fit of bias against n"},
    SubcommandInfo{"stochalpha", Subcommand::StochAlpha, "share averaged over uncertain exponents"},
};

const KeyInfo* find_key(std::string_view name) {
  for (const auto& k : kKeys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw UsageError(origin + ": " + message);
}

double parse_double(const std::string& s, const std::string& origin, const char* key) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(origin, std::string(key) + " expects a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& origin, const char* key) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    fail(origin, std::string(key) + " expects an unsigned integer, got '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s, const std::string& origin, const char* key,
                        std::size_t minimum) {
  const auto v = parse_u64(s, origin, key);
  if (v < minimum) {
    fail(origin, std::string(key) + " must be >= " + std::to_string(minimum) + ", got " + s);
  }
  return static_cast<std::size_t>(v);
}

double parse_alpha(const std::string& s, const std::string& origin) {
  const double a = parse_double(s, origin, "alpha");
  if (!(a > 1.0)) fail(origin, "alpha must be > 1 (finite mean required), got " + s);
  return a;
}

double parse_positive(const std::string& s, const std::string& origin, const char* key) {
  const double v = parse_double(s, origin, key);
  if (!(v > 0.0)) fail(origin, std::string(key) + " must be > 0, got " + s);
  return v;
}

const std::string& single(const std::vector<std::string>& values, const std::string& origin,
                          const char* key) {
  if (values.size() != 1) fail(origin, std::string(key) + " takes exactly one value");
  return values.front();
}

void apply_one(CliConfig& c, const std::string& key, const std::vector<std::string>& values,
               const std::string& origin) {
  const char* k = key.c_str();
  if (values.empty()) fail(origin, key + " has no value");
  if (key == "seed") {
    c.seed = parse_u64(single(values, origin, k), origin, k);
  } else if (key == "runs") {
    c.runs = parse_count(single(values, origin, k), origin, k, 2);
  } else if (key == "n") {
    c.n.clear();
    for (const auto& v : values) c.n.push_back(parse_count(v, origin, k, 1));
  } else if (key == "q") {
    const double q = parse_double(single(values, origin, k), origin, k);
    if (!(q > 0.0 && q < 1.0)) fail(origin, "q must lie in (0,1), got " + values.front());
    c.q = q;
  } else if (key == "alpha") {
    c.alpha.clear();
    for (const auto& v : values) c.alpha.push_back(parse_alpha(v, origin));
  } else if (key == "x-min") {
    c.x_min = parse_positive(single(values, origin, k), origin, k);
  } else if (key == "weights") {
    c.weights.clear();
    for (const auto& v : values) {
      const double w = parse_double(v, origin, k);
      if (!(w >= 0.0)) fail(origin, "weights must be >= 0, got " + v);
      c.weights.push_back(w);
    }
  } else if (key == "dist") {
    const auto& d = single(values, origin, k);
    if (d != "pareto" && d != "lognormal" && d != "mixture") {
      fail(origin, "dist must be one of pareto, lognormal, mixture; got '" + d + "'");
    }
    c.dist = d;
  } else if (key == "mu") {
    c.mu = parse_double(single(values, origin, k), origin, k);
  } else if (key == "sigma") {
    c.sigma = parse_positive(single(values, origin, k), origin, k);
  } else if (key == "h") {
    c.h = parse_positive(single(values, origin, k), origin, k);
  } else if (key == "mean") {
    c.mean = parse_positive(single(values, origin, k), origin, k);
  } else if (key == "delta") {
    c.delta = parse_positive(single(values, origin, k), origin, k);
  } else if (key == "parts") {
    c.parts.clear();
    for (const auto& v : values) c.parts.push_back(parse_count(v, origin, k, 1));
  } else if (key == "point") {
    c.points.clear();
    for (const auto& v : values) {
      const auto colon = v.find(':');
      if (colon == std::string::npos) fail(origin, "point expects N:BIAS, got '" + v + "'");
      parse_positive(v.substr(0, colon), origin, "point n");
      parse_double(v.substr(colon + 1), origin, "point bias");
      c.points.push_back(v);
    }
  } else if (key == "out") {
    c.out = single(values, origin, k);
  } else if (key == "format") {
    const auto& f = single(values, origin, k);
    if (f == "table") {
      c.format = OutputFormat::Table;
    } else if (f == "csv") {
      c.format = OutputFormat::Csv;
    } else if (f == "json") {
      c.format = OutputFormat::Json;
    } else {
      fail(origin, "format must be one of table, csv, json; got '" + f + "'");
    }
  } else if (key == "threads") {
    const auto t = parse_u64(single(values, origin, k), origin, k);
    if (t > 4096) fail(origin, "threads must be <= 4096");
    c.threads = static_cast<unsigned>(t);
  } else if (key == "timestamp") {
    const auto& t = single(values, origin, k);
    if (t != "epoch" && t != "now") fail(origin, "timestamp must be 'epoch' or 'now'");
    c.wall_clock = t == "now";
  } else {
    fail(origin, "unknown key '" + key + "'");
  }
}

std::string fmt6(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6g", v);
  return buf.data();
}

std::string fmt17(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string_view subcommand_name(Subcommand s) {
  for (const auto& info : kSubcommands) {
    if (info.value == s) return info.name;
  }
  return "?";
}

std::size_t runs_or(const CliConfig& c, std::size_t fallback) { return c.runs.value_or(fallback); }

std::vector<std::size_t> sizes_or(const CliConfig& c, std::vector<std::size_t> fallback) {
  return c.n.empty() ? fallback : c.n;
}

std::size_t single_n(const CliConfig& c, std::size_t fallback) {
  if (c.n.size() > 1) throw UsageError(std::string(subcommand_name(c.subcommand)) + ": --n takes one value here");
  return c.n.empty() ? fallback : c.n.front();
}

std::vector<double> alphas_or(const CliConfig& c, std::vector<double> fallback) {
  return c.alpha.empty() ? fallback : c.alpha;
}

std::vector<double> weights_for(const CliConfig& c, std::size_t count) {
  if (c.weights.empty()) return std::vector<double>(count, 1.0 / static_cast<double>(count));
  if (c.weights.size() != count) {
    throw UsageError("--weights must give one weight per alpha (" + std::to_string(count) + ")");
  }
  const double total = std::accumulate(c.weights.begin(), c.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw UsageError("--weights must sum to 1");
  return c.weights;
}

McOptions mc_options(const CliConfig& c) { return McOptions{c.threads.value_or(0)}; }

ConfigEcho base_echo(const CliConfig& c) {
  ConfigEcho j;
  j["subcommand"] = std::string(subcommand_name(c.subcommand));
  j["master_seed"] = c.seed;
  j["q"] = c.q;
  return j;
}

std::string created_at(const CliConfig& c) {
  return c.wall_clock ? format_utc(static_cast<std::int64_t>(std::time(nullptr))) : reproducible_timestamp();
}

std::string render_table(const ExperimentReport& report) {
  const auto columns = report_columns(report.kind());
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) width[i] = columns[i].size();
  for (const auto& row : report.rows()) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string s = std::visit(
          [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              return "-";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              return std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
              return fmt6(v);
            } else {
              return v;
            }
          },
          row[i]);
      width[i] = std::max(width[i], s.size());
      line.push_back(std::move(s));
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream os;
  auto emit = [&](auto&& field, std::size_t i) {
    const std::string s(field);
    os << (i ? "  " : "") << std::string(width[i] - s.size(), ' ') << s;
  };
  for (std::size_t i = 0; i < columns.size(); ++i) emit(columns[i], i);
  os << '\n';
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) emit(line[i], i);
    os << '\n';
  }
  return os.str();
}

class Output {
 public:
  Output(const CliConfig& config, std::ostream& out) : config_(config), out_(out) {}

  void write(const std::string& text, std::optional<ReportKind> kind) {
    if (!config_.out) {
      out_ << text;
      return;
    }
    std::filesystem::path path(*config_.out);
    const bool as_dir = std::filesystem::is_directory(path) ||
                        (!config_.out->empty() && config_.out->back() == '/');
    if (as_dir) {
      const char* ext = config_.format == OutputFormat::Json ? "json"
                        : config_.format == OutputFormat::Csv ? "csv"
                                                              : "txt";
      const std::string name = kind ? default_report_name(*kind, config_.seed, ext)
                                    : std::string(subcommand_name(config_.subcommand)) + "-" +
                                          std::to_string(config_.seed) + "." + ext;
      std::filesystem::create_directories(path);
      path /= name;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open output file " + path.string());
    file << text;
    if (!file) throw std::runtime_error("failed writing " + path.string());
  }

  void report(const ExperimentReport& r) {
    switch (config_.format) {
      case OutputFormat::Table: write(render_table(r), r.kind()); break;
      case OutputFormat::Csv: write(to_csv(r), r.kind()); break;
      case OutputFormat::Json: write(to_json(r), r.kind()); break;
    }
  }

 private:
  const CliConfig& config_;
  std::ostream& out_;
};

void run_kappa(const CliConfig& c, Output& output) {
  const auto alphas = alphas_or(c, {1.1});
  std::vector<double> values;
  for (double a : alphas) {
    values.push_back(c.mean ? kappa_cut_pareto(a, c.x_min, *c.mean, c.q) : kappa_pareto(a, c.q));
  }
  std::ostringstream os;
  if (c.format == OutputFormat::Csv) {
    os << "alpha,q,kappa\n";
    for (std::size_t i = 0; i < alphas.size(); ++i) os << fmt6(alphas[i]) << ',' << fmt6(c.q) << ',' << fmt6(values[i]) << '\n';
  } else if (c.format == OutputFormat::Json) {
    nlohmann::ordered_json j;
    j["q"] = c.q;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < alphas.size(); ++i) rows.push_back({{"alpha", alphas[i]}, {"kappa", values[i]}});
    os << j.dump(2) << '\n';
  } else if (alphas.size() == 1) {
    os << fmt6(values.front()) << '\n';
  } else {
    for (std::size_t i = 0; i < alphas.size(); ++i) os << "alpha=" << fmt6(alphas[i]) << "  kappa=" << fmt6(values[i]) << '\n';
  }
  output.write(os.str(), std::nullopt);
}

void run_sample(const CliConfig& c, Output& output) {
  const auto spec = make_spec(c);
  const auto s = sample(spec, single_n(c, 10), c.seed);
  std::ostringstream os;
  if (c.format == OutputFormat::Json) {
    nlohmann::ordered_json j;
    j["spec"] = spec_to_json(spec);
    j["seed"] = c.seed;
    j["values"] = std::vector<double>(s.values().begin(), s.values().end());
    os << j.dump(2) << '\n';
  } else {
    if (c.format == OutputFormat::Csv) os << "value\n";
    for (double v : s.values()) os << fmt17(v) << '\n';
  }
  output.write(os.str(), std::nullopt);
}

void run_bias_table(const CliConfig& c, Output& output) {
  const auto spec = make_spec(c);
  const auto sizes = sizes_or(c, {1000, 10000});
  const auto runs = runs_or(c, 10000);
  std::vector<McSummary> rows;
  for (std::size_t n : sizes) rows.push_back(mc_kappa_bias(spec, c.q, n, runs, c.seed, mc_options(c)));
  auto echo = base_echo(c);
  echo["spec"] = spec_to_json(spec);
  echo["n"] = sizes;
  echo["runs"] = runs;
  output.report(bias_table_report(std::move(echo), rows, created_at(c)));
}

void run_superadd(const CliConfig& c, Output& output) {
  const auto parts = c.parts.empty() ? std::vector<std::size_t>{500, 500} : c.parts;
  const auto runs = runs_or(c, 10000);
  std::vector<DistributionSpec> specs;
  if (c.dist == "pareto" && c.alpha.size() > 1) {
    if (c.alpha.size() != parts.size()) throw UsageError("superadd: give one --alpha per part, or a single --alpha");
    for (double a : c.alpha) specs.emplace_back(ParetoParams{a, c.x_min});
  } else {
    specs.assign(parts.size(), make_spec(c));
  }
  const auto record = mc_superadditivity(specs, parts, c.q, runs, c.seed, mc_options(c));
  auto echo = base_echo(c);
  auto& laws = echo["specs"] = nlohmann::ordered_json::array();
  for (const auto& s : specs) laws.push_back(spec_to_json(s));
  echo["parts"] = parts;
  echo["runs"] = runs;
  output.report(superadd_report(std::move(echo), record, c.q, created_at(c)));
}

void run_converge(const CliConfig& c, Output& output) {
  const auto spec = make_spec(c);
  const double h = c.h.value_or(population_threshold(spec, c.q));
  const auto sizes = sizes_or(c, {1000, 10000, 100000});
  const auto runs = runs_or(c, 1000);
  const auto result = mc_monotone_convergence(spec, h, sizes, runs, c.seed, mc_options(c));
  auto echo = base_echo(c);
  echo["spec"] = spec_to_json(spec);
  echo["h"] = h;
  echo["n"] = sizes;
  echo["runs"] = runs;
  output.report(convergence_report(std::move(echo), result, runs, created_at(c)));
}

void run_mixture(const CliConfig& c, Output& output) {
  const auto alphas = alphas_or(c, {1.2, 1.8});
  const auto mix = MixtureSpec::unit_mean(weights_for(c, alphas.size()), alphas);
  const auto n = single_n(c, 1000);
  const auto runs = runs_or(c, 10000);
  const auto record = mc_mixture_bias(mix, c.q, n, runs, c.seed, mc_options(c));
  auto echo = base_echo(c);
  echo["spec"] = spec_to_json(mix);
  echo["n"] = n;
  echo["runs"] = runs;
  output.report(mixture_bias_report(std::move(echo), record, created_at(c)));
}

void run_corr(const CliConfig& c, Output& output) {
  const auto spec = make_spec(c);
  const auto n = single_n(c, 10000);
  const auto runs = runs_or(c, 10000);
  if (runs < 100) throw UsageError("corr: runs must be >= 100");
  const auto record = mc_kappa_sum_dependence(spec, c.q, n, runs, c.seed, mc_options(c));
  auto echo = base_echo(c);
  echo["spec"] = spec_to_json(spec);
  echo["n"] = n;
  echo["runs"] = runs;
  output.report(correlation_report(std::move(echo), record, created_at(c)));
}

void run_scaling_fit(const CliConfig& c, Output& output) {
  std::vector<ScalingPoint> points;
  auto echo = base_echo(c);
  if (!c.points.empty()) {
    for (const auto& p : c.points) {
      const auto colon = p.find(':');
      points.push_back({std::stod(p.substr(0, colon)), std::stod(p.substr(colon + 1))});
    }
    echo["points"] = c.points;
  } else {
    auto config = c;
    if (config.alpha.empty()) config.alpha = {1.1};
    const auto spec = make_spec(config);
    const auto sizes = sizes_or(c, {1000, 10000, 100000});
    const auto runs = runs_or(c, 2000);
    for (std::size_t n : sizes) {
      const auto s = mc_kappa_bias(spec, c.q, n, runs, c.seed, mc_options(c));
      points.push_back({static_cast<double>(n), *s.population_kappa - s.mean});
    }
    echo["spec"] = spec_to_json(spec);
    echo["n"] = sizes;
    echo["runs"] = runs;
  }
  output.report(scaling_fit_report(std::move(echo), fit_bias_scaling(points), created_at(c)));
}

void run_stochalpha(const CliConfig& c, Output& output) {
  auto alphas = alphas_or(c, {1.2, 1.8});
  if (c.delta) {
    if (alphas.size() != 1) throw UsageError("stochalpha: --delta needs exactly one --alpha");
    const double center = alphas.front();
    if (!(center - *c.delta > 1.0)) throw UsageError("stochalpha: alpha - delta must be > 1");
    alphas = {center - *c.delta, center + *c.delta};
  }
  const auto weights = weights_for(c, alphas.size());
  const auto averaged = stochastic_alpha_kappa(alphas, weights, c.q);
  const auto lowest = min_alpha_kappa(alphas, c.q);
  double mean_alpha = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) mean_alpha += weights[i] * alphas[i];
  const double at_mean = kappa_pareto(mean_alpha, c.q);

  std::ostringstream os;
  if (c.format == OutputFormat::Json) {
    nlohmann::ordered_json j;
    j["q"] = c.q;
    j["alphas"] = alphas;
    j["weights"] = weights;
    j["mean_alpha"] = mean_alpha;
    j["kappa_at_mean_alpha"] = at_mean;
    j["stochastic_alpha_kappa"] = averaged.value;
    j["min_alpha_kappa"] = lowest.value;
    j["rise"] = averaged.value - at_mean;
    os << j.dump(2) << '\n';
  } else if (c.format == OutputFormat::Csv) {
    os << "q,mean_alpha,kappa_at_mean_alpha,stochastic_alpha_kappa,min_alpha_kappa,rise\n"
       << fmt6(c.q) << ',' << fmt6(mean_alpha) << ',' << fmt6(at_mean) << ',' << fmt6(averaged.value)
       << ',' << fmt6(lowest.value) << ',' << fmt6(averaged.value - at_mean) << '\n';
  } else {
    os << "kappa at mean alpha " << fmt6(mean_alpha) << ": " << fmt6(at_mean) << '\n'
       << "stochastic alpha:            " << fmt6(averaged.value) << '\n'
       << "minimum alpha:               " << fmt6(lowest.value) << '\n'
       << "rise from exponent spread:   " << fmt6(averaged.value - at_mean) << '\n';
  }
  output.write(os.str(), std::nullopt);
}

}  // namespace

Settings read_config_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  Settings settings;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string origin = path.string() + ":" + std::to_string(number);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(origin, "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const KeyInfo* info = find_key(key);
    if (!info) fail(origin, "unknown key '" + key + "'");

    std::vector<std::string> values;
    std::stringstream list(body.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ',')) values.push_back(trim(item));
    if (values.empty() || std::any_of(values.begin(), values.end(), [](const auto& v) { return v.empty(); })) {
      fail(origin, "malformed value for '" + key + "'");
    }

    // Validate here so errors carry the line number.
    CliConfig scratch;
    apply_one(scratch, key, values, origin);

    auto& slot = settings[key];
    if (info->list) {
      slot.insert(slot.end(), values.begin(), values.end());
    } else {
      slot = values;
    }
  }
  return settings;
}

void apply_settings(CliConfig& config, const Settings& settings, const std::string& origin) {
  for (const auto& [key, values] : settings) {
    apply_one(config, key, values, origin.empty() ? "--" + key : origin + " " + key);
  }
}

CliConfig parse_config_file(const std::filesystem::path& path) {
  CliConfig config;
  apply_settings(config, read_config_settings(path), path.string());
  return config;
}

DistributionSpec make_spec(const CliConfig& c) {
  if (c.dist == "lognormal") return LognormalParams{c.mu, c.sigma};
  const auto alphas = alphas_or(c, {1.1});
  if (c.dist == "mixture") return MixtureSpec::unit_mean(weights_for(c, alphas.size()), alphas);
  if (alphas.size() != 1) throw UsageError("pareto: give a single --alpha");
  ParetoParams p{alphas.front(), c.x_min};
  validate(p);
  return p;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concentration (top-q share) estimation lab for heavy-tailed samples", "kappa_lab"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();

  Settings flags;
  for (const auto& key : kKeys) {
    auto* opt = app.add_option(std::string("--") + key.name, flags[key.name], key.help);
    opt->delimiter(',');
    if (!key.list) opt->expected(1);
  }
  std::string config_path;
  app.add_option("--config", config_path, "file of 'key = value' lines; flags take precedence");

  std::vector<std::pair<CLI::App*, Subcommand>> subs;
  for (const auto& s : kSubcommands) subs.emplace_back(app.add_subcommand(s.name, s.help), s.value);

  std::vector<const char*> argv;
  argv.push_back("kappa_lab");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "kappa_lab: " << e.what() << '\n';
    return 2;
  }

  try {
    CliConfig config;
    for (const auto& [sub, value] : subs) {
      if (sub->parsed()) config.subcommand = value;
    }
    if (!config_path.empty()) apply_settings(config, read_config_settings(config_path), config_path);

    Settings given;
    for (const auto& key : kKeys) {
      if (app.get_option(std::string("--") + key.name)->count() > 0) given[key.name] = flags[key.name];
    }
    apply_settings(config, given, "");

    if (!config.threads) {
      if (const char* env = std::getenv("KAPPA_LAB_THREADS")) {
        Settings from_env{{"threads", {env}}};
        apply_settings(config, from_env, "KAPPA_LAB_THREADS");
      }
    }

    Output output(config, out);
    switch (config.subcommand) {
      case Subcommand::Kappa: run_kappa(config, output); break;
      case Subcommand::Sample: run_sample(config, output); break;
      case Subcommand::BiasTable: run_bias_table(config, output); break;
      case Subcommand::SuperAdd: run_superadd(config, output); break;
      case Subcommand::Converge: run_converge(config, output); break;
      case Subcommand::Mixture: run_mixture(config, output); break;
      case Subcommand::Corr: run_corr(config, output); break;
      case Subcommand::ScalingFit: run_scaling_fit(config, output); break;
      case Subcommand::StochAlpha: run_stochalpha(config, output); break;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "kappa_lab: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "kappa_lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "kappa_lab: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace kappa::cli
