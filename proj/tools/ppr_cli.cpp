// Command-line front end: run one configuration, run a comparison suite, or
// run the built-in invariant checks.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ppr/experiment.hpp"
#include "ppr/log.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

ppr::Json load_config(const std::string& path) {
  if (path.empty()) return ppr::Json::object();
  std::ifstream in(path);
  if (!in) throw ppr::ConfigError("cannot open config file " + path);
  ppr::Json j = ppr::Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ppr::ConfigError("config file " + path + " is not valid JSON");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson phase retrieval solvers and benchmark runner"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::string preset;

  auto* run = app.add_subcommand("run", "Run one experiment configuration");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--seed", seeds, "Seed (overrides the config)")->expected(0, 1);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--override", overrides, "Dotted key=value override, repeatable");

  auto* suite = app.add_subcommand("suite", "Run a comparison preset over several seeds");
  suite->add_option("preset", preset, "fig5, fig6, fig8 or twf")->required();
  suite->add_option("--config", config_path, "JSON config merged into every run");
  suite->add_option("--seed", seeds, "Seeds (repeatable, default 0..9)");
  suite->add_option("--out", out_dir, "Output directory");
  suite->add_option("--override", overrides, "Dotted key=value override, repeatable");

  auto* check = app.add_subcommand("check", "Run invariant self-tests");

  CLI11_PARSE(app, argc, argv);
  ppr::log::set_level(verbose ? ppr::log::Level::Info : ppr::log::Level::Warn);

  try {
    if (check->parsed()) {
      bool ok = true;
      for (const auto& c : ppr::self_check()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? kOk : kNumericalFailure;
    }

    ppr::Json cfg = load_config(config_path);
    for (const auto& o : overrides) ppr::apply_override(cfg, o);

    if (run->parsed()) {
      if (!seeds.empty()) cfg["seed"] = seeds.front();
      const ppr::ExperimentResult res = ppr::run_experiment(cfg, out_dir);
      const auto& last = res.trace.records.back();
      std::cout << "status " << ppr::to_string(res.trace.status) << "  iterations " << last.k << "  cost "
                << last.cost << "  nrmse " << last.nrmse << "  psnr " << last.psnr << '\n';
      if (res.trace.status != ppr::RunStatus::Completed) {
        std::cerr << "numerical failure: " << res.trace.message << '\n';
        return kNumericalFailure;
      }
      return kOk;
    }

    if (seeds.empty())
      for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
    const ppr::SuiteResult res = ppr::run_suite(preset, seeds, cfg, out_dir);
    for (std::size_t i = 0; i < res.entries.size(); ++i) {
      const auto& med = res.medians[i];
      std::cout << res.entries[i].model << '/' << res.entries[i].label;
      if (!med.records.empty()) {
        std::cout << "  median final cost " << med.records.back().cost << "  nrmse " << med.records.back().nrmse;
      }
      std::cout << '\n';
    }
    if (res.failed_runs > 0) {
      std::cerr << res.failed_runs << " run(s) stopped early\n";
      return kNumericalFailure;
    }
    return kOk;
  } catch (const ppr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}
