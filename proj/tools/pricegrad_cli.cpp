// pricegrad CLI: run demand, subdifferential, rate-bound, saturation, and
// Lipschitz-likeness analyses described by a JSON config.

#include <cstdint>
#include <string>

#include "CLI11.hpp"

#include "pricegrad/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coderivative and subdifferential estimates for budget-constrained utility models"};

  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
  int verbosity = 0;

  app.add_option("config", config_path, "problem config (pricegrad-config/1 JSON)")->required();
  app.add_option("-o,--output-dir", output_dir, "directory for report and series files");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_flag("-q,--quiet", quiet, "suppress per-analysis summary lines");
  app.add_flag("-v,--verbose", verbosity, "print extra detail per analysis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  pricegrad::RunOptions opt;
  opt.config_path = config_path;
  opt.output_dir = output_dir;
  if (seed_opt->count() > 0) opt.seed_override = seed;
  opt.verbosity = quiet ? -1 : verbosity;
  return pricegrad::run(opt);
}
