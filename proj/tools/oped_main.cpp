// Command-line front-end. Subcommands: diagnose, evaluate, scaling, lemmas,
// geometry. Global flags: --spec, --seed, --out, --jobs (BG_JOBS as the
// environment fallback). Exit codes: 0 success, 1 invariant violation,
// 2 input error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oped/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Off-policy evaluation diagnostics for tabular MDPs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string spec_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--spec", spec_path, "Problem spec JSON path");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_path, "Output path (default stdout)");
  app.add_option("--jobs", jobs, "Worker thread count")->envname("BG_JOBS");

  CLI::App* diagnose = app.add_subcommand("diagnose", "Structural diagnostics report");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Fit one dataset and report");
  std::size_t eval_n = 1000;
  std::string estimator = "minimax";
  evaluate->add_option("--n", eval_n, "Dataset size");
  evaluate->add_option("--estimator", estimator, "minimax or fitted_q");

  CLI::App* scaling = app.add_subcommand("scaling", "Sweep (n, seed) grid to CSV");
  std::string sweep_path;
  scaling->add_option("--sweep", sweep_path, "Sweep config JSON path")->required();

  CLI::App* lemmas = app.add_subcommand("lemmas", "Exact lemma suite");
  int random_k = 0;
  lemmas->add_option("--random", random_k, "Number of random instances");

  CLI::App* geometry = app.add_subcommand("geometry", "Prescribed-angle constructions");
  std::vector<double> thetas;
  geometry->add_option("--theta", thetas, "Angles in degrees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (diagnose->parsed()) {
      if (spec_path.empty()) throw oped::validation_error("diagnose: --spec required");
      return oped::cli::cmd_diagnose(spec_path, out_path);
    }
    if (evaluate->parsed()) {
      if (spec_path.empty()) throw oped::validation_error("evaluate: --spec required");
      return oped::cli::cmd_evaluate(spec_path, eval_n, seed, estimator, out_path);
    }
    if (scaling->parsed()) {
      if (spec_path.empty()) throw oped::validation_error("scaling: --spec required");
      return oped::cli::cmd_scaling(spec_path, sweep_path, out_path, seed, jobs);
    }
    if (lemmas->parsed()) {
      if (spec_path.empty() && random_k == 0)
        throw oped::validation_error("lemmas: provide --spec or --random K");
      return oped::cli::cmd_lemmas(spec_path, random_k, seed, out_path);
    }
    if (geometry->parsed()) return oped::cli::cmd_geometry(thetas, out_path);
  } catch (const oped::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const oped::invariant_error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
