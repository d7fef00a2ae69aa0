#pragma once

// Subcommand implementations behind the command-line front-end. Each takes
// parsed arguments, performs one batch task, writes its report, and returns
// the process exit code: 0 success, 1 invariant violation, 2 input error
// (input errors are raised as validation_error and mapped by the caller).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "oped/common.hpp"
#include "oped/dataset.hpp"
#include "oped/diagnostics.hpp"
#include "oped/estimation.hpp"
#include "oped/geometry.hpp"
#include "oped/instances.hpp"
#include "oped/lemmas.hpp"
#include "oped/scaling.hpp"
#include "oped/spec_io.hpp"

namespace oped {
namespace cli {

inline void write_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw validation_error("cannot write '" + out_path + "'");
  out << text;
}

inline int cmd_diagnose(const std::string& spec_path,
                        const std::string& out_path) {
  ProblemSpec spec = io::load_spec(spec_path);
  DiagnosticsReport rep =
      diagnose(spec.cls, spec.mdp, spec.pi, spec.mu, spec.s0);
  write_text(io::report_to_json(rep).dump(2) + "\n", out_path);
  return 0;
}

inline int cmd_evaluate(const std::string& spec_path, std::size_t n,
                        std::uint64_t seed, const std::string& estimator,
                        const std::string& out_path) {
  if (estimator != "minimax" && estimator != "fitted_q")
    throw validation_error("estimator must be \"minimax\" or \"fitted_q\"");
  ProblemSpec spec = io::load_spec(spec_path);
  Dataset data = sample_dataset(spec.mdp, spec.mu, n, seed);
  FitResult fit;
  if (estimator == "fitted_q")
    fit = fitted_q(spec.cls, data, spec.pi, spec.mdp.discount);
  else
    fit = minimize_minimax(spec.cls, data, spec.pi, spec.mdp.discount);

  QFunction fstar = exact_q(spec.mdp, spec.pi);
  double pe = prediction_error(fit.estimate, fstar, spec.pi, spec.s0);

  io::json out;
  out["n"] = n;
  out["seed"] = seed;
  out["estimator"] = estimator;
  out["prediction_error"] = pe;
  out["abs_error"] = std::abs(pe);
  out["m_hat"] = fit.program_value;
  out["converged"] = fit.converged;
  out["iterations"] = fit.iterations;
  out["degenerate"] = fit.degenerate;
  if (spec.cls.is_finite()) {
    double beta_val = beta(spec.cls, spec.mdp, spec.pi, spec.mu);
    ExtReal conc =
        concentrability(spec.cls, spec.mdp, spec.pi, spec.mu, spec.s0);
    ExtReal ibe = ExtReal::finite(
        inherent_bellman_error(spec.cls, spec.mdp, spec.pi, spec.mu));
    out["bounds"] = io::bound_report_to_json(make_bound_report(
        spec.cls.as_finite().members.size(), 0.1, n, spec.mdp.discount,
        beta_val, conc, ibe));
  }
  write_text(out.dump(2) + "\n", out_path);
  return 0;
}

inline int cmd_scaling(const std::string& spec_path,
                       const std::string& sweep_path,
                       const std::string& out_override, std::uint64_t seed,
                       int jobs) {
  ProblemSpec spec = io::load_spec(spec_path);
  SweepConfig cfg = io::load_sweep(sweep_path);
  std::vector<ScalingRow> rows = run_scaling(spec, cfg, seed, jobs);
  std::string csv = scaling_csv(rows, seed, cfg.delta, cfg.estimator);
  std::string out_path = !out_override.empty() ? out_override : cfg.out;
  write_text(csv, out_path);
  return 0;
}

inline int cmd_lemmas(const std::string& spec_path, int random_k,
                      std::uint64_t seed, const std::string& out_path) {
  std::vector<LemmaResult> rows;
  std::vector<ProblemInstance> offenders;
  std::vector<int> offender_ids;

  if (!spec_path.empty()) {
    ProblemSpec sp = io::load_spec(spec_path);
    if (!sp.cls.is_finite())
      throw validation_error(
          "lemmas: the lemma suite enumerates members; use a finite-class "
          "spec or --random");
    ProblemInstance inst;
    inst.mdp = sp.mdp;
    inst.pi = sp.pi;
    inst.mu = sp.mu;
    inst.cls = sp.cls;
    inst.s0 = sp.s0;
    Rng rng(derive_seed(seed, 0));
    check_instance(inst, 0, rng, rows);
    bool bad = false;
    for (const LemmaResult& r : rows)
      if (!r.pass) bad = true;
    if (bad) {
      offenders.push_back(inst);
      offender_ids.push_back(0);
    }
  } else {
    if (random_k < 1)
      throw validation_error("lemmas: --random must be >= 1");
    for (int i = 0; i < random_k; ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      ProblemInstance inst = random_finite_instance(rng, i % 2 == 0);
      std::size_t before = rows.size();
      check_instance(inst, i, rng, rows);
      bool bad = false;
      for (std::size_t k = before; k < rows.size(); ++k)
        if (!rows[k].pass) bad = true;
      if (bad) {
        offenders.push_back(inst);
        offender_ids.push_back(i);
      }
    }
  }

  char buf[160];
  std::printf("%-24s %9s %14s  %s\n", "lemma", "instance", "margin", "status");
  for (const LemmaResult& r : rows) {
    std::string status;
    if (r.skipped)
      status = "skip (" + r.note + ")";
    else if (r.pass)
      status = "pass";
    else
      status = r.note.empty() ? std::string("FAIL") : "FAIL (" + r.note + ")";
    std::snprintf(buf, sizeof(buf), "%-24s %9d %14.6e  %s\n", r.lemma.c_str(),
                  r.instance, r.margin, status.c_str());
    std::fputs(buf, stdout);
  }
  int checked = 0, passed = 0, skipped = 0;
  for (const LemmaResult& r : rows) {
    if (r.skipped) {
      ++skipped;
      continue;
    }
    ++checked;
    if (r.pass) ++passed;
  }
  std::printf("%d checked, %d passed, %d skipped\n", checked, passed, skipped);

  if (!out_path.empty())
    write_text(io::lemma_rows_to_json(rows).dump(2) + "\n", out_path);

  // Serialize every offending instance so the failure can be replayed.
  for (std::size_t i = 0; i < offenders.size(); ++i) {
    ProblemSpec sp;
    sp.mdp = offenders[i].mdp;
    sp.pi = offenders[i].pi;
    sp.mu = offenders[i].mu;
    sp.cls = offenders[i].cls;
    sp.s0 = offenders[i].s0;
    std::string path =
        "lemma_violation_" + std::to_string(offender_ids[i]) + ".json";
    io::save_spec(sp, path);
    std::fprintf(stderr, "violating instance written to %s\n", path.c_str());
  }
  return offenders.empty() ? 0 : 1;
}

inline int cmd_geometry(const std::vector<double>& thetas,
                        const std::string& out_path) {
  std::vector<double> use =
      thetas.empty() ? std::vector<double>{0.0, 20.0, 45.0, 85.0} : thetas;
  std::vector<GeometryRow> rows = geometry_sweep(use);

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%8s %12s %10s %10s %12s %12s  %s\n", "theta",
                "mix", "beta", "sin", "conc", "opc", "status");
  os << buf;
  bool all_ok = true;
  for (const GeometryRow& r : rows) {
    double target = std::sin(r.theta_deg * M_PI / 180.0);
    std::snprintf(buf, sizeof(buf), "%8.2f %12.6g %10.6f %10.6f %12s %12s  %s\n",
                  r.theta_deg, r.mix, r.beta, target,
                  r.concentrability.to_string().c_str(),
                  r.opc.to_string().c_str(), r.ok ? "ok" : "FAIL");
    os << buf;
    all_ok = all_ok && r.ok;
  }

  // Bound comparison per angle at a small and a large sample size, with a
  // nominal 19-member cardinality: the tighter bound switches sides as beta
  // grows and as n grows.
  os << "\nbound comparison (card 19, delta 0.1):\n";
  for (const GeometryRow& r : rows) {
    ProblemInstance inst = geometry_instance(r.theta_deg);
    ExtReal ibe = ExtReal::finite(
        inherent_bellman_error(inst.cls, inst.mdp, inst.pi, inst.mu));
    for (std::size_t n : {std::size_t{100}, std::size_t{1000000}}) {
      BoundReport br = make_bound_report(19, 0.1, n, inst.mdp.discount, r.beta,
                                         r.concentrability, ibe);
      std::snprintf(buf, sizeof(buf),
                    "  theta=%-6.2f n=%-8zu new=%-12s classic=%-12s tighter=%s\n",
                    r.theta_deg, n, br.new_bound.to_string().c_str(),
                    br.classic_bound.to_string().c_str(), br.tighter.c_str());
      os << buf;
    }
  }
  write_text(os.str(), out_path);
  return all_ok ? 0 : 1;
}

}  // namespace cli
}  // namespace oped
