#pragma once

// Experiment configuration and structured reports (JSON and CSV).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oscbox/random.hpp"
#include "oscbox/singular.hpp"

namespace oscbox {

inline constexpr const char* kReportSchema = "oscbox.report/1";

inline constexpr const char* kExperiments[] = {"axioms", "norms",    "jn",      "equiv",           "oscbound",
                                               "boconst", "carleson", "wavelet", "martingale-exact"};

struct ExperimentConfig {
  std::string experiment = "axioms";
  int depth = 8;
  std::size_t n = 1024;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double r = 1.0;
  double alpha = 0.9;
  double beta = 0.75;
  Omega omega = Omega::log;
  FunctionFamily family = FunctionFamily::random_uniform;
  std::string eps = "signs";  // ones | signs | signs:<seed> | explicit:<file>
  std::string format = "json";
  std::string out;
  bool timing = false;

  void validate() const {
    if (std::find(std::begin(kExperiments), std::end(kExperiments), experiment) == std::end(kExperiments))
      throw std::invalid_argument("unknown experiment '" + experiment + "'");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (!(r >= 1.0)) throw std::invalid_argument("r must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (format != "json" && format != "csv") throw std::invalid_argument("format must be json or csv");
    if (n < 8 || !is_power_of_two(n)) throw std::invalid_argument("n must be a power of two >= 8");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment}, {"depth", c.depth},   {"n", c.n},
          {"trials", c.trials},         {"seed", c.seed},     {"r", c.r},
          {"alpha", c.alpha},           {"beta", c.beta},     {"omega", to_string(c.omega)},
          {"family", to_string(c.family)}, {"eps", c.eps}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.value("experiment", c.experiment);
  c.depth = j.value("depth", c.depth);
  c.n = j.value("n", c.n);
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.r = j.value("r", c.r);
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.omega = parse_omega(j.value("omega", std::string("log")));
  c.family = parse_family(j.value("family", std::string("random-uniform")));
  c.eps = j.value("eps", c.eps);
  return c;
}

/// One asserted inequality or identity.
struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // how value compares to threshold, e.g. "<="
  std::string note;
};

/// Measurements of one trial; metrics keep insertion order.
struct Record {
  std::string label;
  std::size_t trial = 0;
  std::vector<std::pair<std::string, double>> metrics;

  Record& add(std::string key, double v) {
    metrics.emplace_back(std::move(key), v);
    return *this;
  }
};

struct Summary {
  std::size_t count = 0;
  double max = 0.0;
  double p99 = 0.0;
  double median = 0.0;
};

/// Nearest-rank statistics of one sample.
inline Summary summarize(std::vector<double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
    return xs[std::min(xs.size() - 1, k == 0 ? 0 : k - 1)];
  };
  s.max = xs.back();
  s.p99 = rank(0.99);
  s.median = rank(0.5);
  return s;
}

struct Report {
  std::string experiment;
  ExperimentConfig config;
  std::vector<Record> records;
  std::vector<Check> checks;
  std::vector<nlohmann::json> witnesses;  // one per failing case, capped
  std::optional<double> wall_time_s;

  static constexpr std::size_t kMaxWitnesses = 8;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  Check& check(std::string name, bool ok, double value, double threshold, std::string relation,
               std::string note = {}) {
    checks.push_back({std::move(name), ok, value, threshold, std::move(relation), std::move(note)});
    return checks.back();
  }
  Check& check_le(std::string name, double value, double bound, std::string note = {}) {
    return check(std::move(name), value <= bound, value, bound, "<=", std::move(note));
  }
  Check& check_ge(std::string name, double value, double bound, std::string note = {}) {
    return check(std::move(name), value >= bound, value, bound, ">=", std::move(note));
  }
  Check& check_eq(std::string name, double value, double target, std::string note = {}) {
    return check(std::move(name), value == target, value, target, "==", std::move(note));
  }

  void add_witness(nlohmann::json w) {
    if (witnesses.size() < kMaxWitnesses) witnesses.push_back(std::move(w));
  }

  /// Per-(label, metric) statistics over the records.
  std::vector<std::pair<std::string, Summary>> summaries() const {
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (const Record& r : records) {
      for (const auto& [k, v] : r.metrics) {
        const std::string key = r.label.empty() ? k : r.label + "/" + k;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
          groups.emplace_back(key, std::vector<double>{});
          it = std::prev(groups.end());
        }
        it->second.push_back(v);
      }
    }
    std::vector<std::pair<std::string, Summary>> out;
    for (auto& [k, xs] : groups) out.emplace_back(k, summarize(std::move(xs)));
    return out;
  }
};

namespace detail {
/// JSON has no infinities; encode non-finite values as strings.
inline nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}
}  // namespace detail

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", detail::number(c.value)},
                      {"threshold", detail::number(c.threshold)},
                      {"relation", c.relation},
                      {"note", c.note}});
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [k, s] : r.summaries())
    summary[k] = {{"count", s.count},
                  {"max", detail::number(s.max)},
                  {"p99", detail::number(s.p99)},
                  {"median", detail::number(s.median)}};
  nlohmann::json records = nlohmann::json::array();
  for (const Record& rec : r.records) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : rec.metrics) m[k] = detail::number(v);
    records.push_back({{"label", rec.label}, {"trial", rec.trial}, {"metrics", std::move(m)}});
  }
  nlohmann::json j = {{"schema", kReportSchema},
                      {"experiment", r.experiment},
                      {"config", to_json(r.config)},
                      {"passed", r.passed()},
                      {"checks", std::move(checks)},
                      {"summary", std::move(summary)},
                      {"records", std::move(records)},
                      {"witnesses", r.witnesses}};
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
  return j;
}

namespace detail {
inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}
}  // namespace detail

/// Flat CSV: one row per check, per summary statistic and per record metric.
inline std::string to_csv(const Report& r) {
  std::ostringstream os;
  os << "section,name,label,trial,value,threshold,passed\n";
  for (const Check& c : r.checks)
    os << "check," << detail::csv_field(c.name) << ",," << ',' << detail::csv_number(c.value) << ','
       << detail::csv_number(c.threshold) << ',' << (c.passed ? "true" : "false") << '\n';
  for (const auto& [k, s] : r.summaries()) {
    os << "summary," << detail::csv_field(k + ".max") << ",,," << detail::csv_number(s.max) << ",,\n";
    os << "summary," << detail::csv_field(k + ".p99") << ",,," << detail::csv_number(s.p99) << ",,\n";
    os << "summary," << detail::csv_field(k + ".median") << ",,," << detail::csv_number(s.median) << ",,\n";
  }
  for (const Record& rec : r.records)
    for (const auto& [k, v] : rec.metrics)
      os << "record," << detail::csv_field(k) << ',' << detail::csv_field(rec.label) << ',' << rec.trial << ','
         << detail::csv_number(v) << ",,\n";
  return os.str();
}

/// Rows (lambda, fraction) of a John-Nirenberg profile.
inline std::string jn_profile_csv(std::span<const double> lambdas, std::span<const double> fractions) {
  std::ostringstream os;
  os << "lambda,fraction\n";
  for (std::size_t k = 0; k < lambdas.size() && k < fractions.size(); ++k)
    os << detail::csv_number(lambdas[k]) << ',' << detail::csv_number(fractions[k]) << '\n';
  return os.str();
}

}  // namespace oscbox
