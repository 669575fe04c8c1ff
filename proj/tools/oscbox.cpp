// oscbox: run one experiment (or replay a witness) and write its report.
//
// Exit status: 0 if every asserted check passed, 1 if some check failed,
// 2 on invalid arguments or runtime errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "oscbox/oscbox.hpp"

namespace {

int emit(const oscbox::Report& rep, const std::string& format, const std::string& out) {
  const std::string text = format == "csv" ? oscbox::to_csv(rep) : oscbox::to_json(rep).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "oscbox: cannot write " << out << "\n";
      return 2;
    }
    f << text;
  }
  for (const auto& c : rep.checks)
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.value << ' ' << c.relation << ' '
              << c.threshold << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic harmonic analysis experiments"};
  oscbox::ExperimentConfig cfg;
  std::string omega = "log", family = "random-uniform", replay_path;

  std::string experiments;
  for (const char* e : oscbox::kExperiments) experiments += std::string(experiments.empty() ? "" : ", ") + e;
  app.add_option("experiment", cfg.experiment, "One of: " + experiments);
  app.add_option("--depth", cfg.depth, "Dyadic tree depth")->capture_default_str();
  app.add_option("--n", cfg.n, "Circle grid size (power of two >= 8)")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Trials per configuration")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--r", cfg.r, "Averaging exponent r >= 1")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "Oscillation fraction in (0,1)")->capture_default_str();
  app.add_option("--beta", cfg.beta, "Oscillation fraction for operator bounds, in (0,1)")->capture_default_str();
  app.add_option("--omega", omega, "Modulus: one or log")->capture_default_str();
  app.add_option("--family", family, "random-uniform, random-signs, staircase or indicator")->capture_default_str();
  app.add_option("--eps", cfg.eps, "Transform multipliers: ones, signs, signs:<seed>, explicit:<file>")
      ->capture_default_str();
  app.add_option("--format", cfg.format, "csv or json")->capture_default_str();
  app.add_option("--out", cfg.out, "Output path (stdout if omitted)");
  app.add_option("--replay", replay_path, "Witness JSON to re-evaluate");
  app.add_flag("--timing", cfg.timing, "Include wall time in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg.omega = oscbox::parse_omega(omega);
    cfg.family = oscbox::parse_family(family);
    if (cfg.format != "json" && cfg.format != "csv") throw std::invalid_argument("format must be json or csv");
    if (!replay_path.empty()) {
      std::ifstream in(replay_path);
      if (!in) throw std::invalid_argument("cannot open witness " + replay_path);
      const auto w = nlohmann::json::parse(in);
      return emit(oscbox::replay(w), cfg.format, cfg.out);
    }
    return emit(oscbox::run_experiment(cfg), cfg.format, cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "oscbox: " << e.what() << "\n";
    return 2;
  }
}
