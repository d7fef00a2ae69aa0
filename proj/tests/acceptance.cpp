// Acceptance gate. Runs the eight release criteria end to end and prints one
// [PASS]/[FAIL] line per criterion with the measured quantities and the pinned
// tolerance. Exit code 0 only if every criterion passes.
//
// Criteria 3 and 8 spawn the real binary (path from OPED_CLI, default
// build/oped); everything else runs in process. Bundled specs are located
// through OPED_SPECS (default specs).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oped/diagnostics.hpp"
#include "oped/estimation.hpp"
#include "oped/geometry.hpp"
#include "oped/instances.hpp"
#include "oped/lemmas.hpp"
#include "oped/scaling.hpp"
#include "oped/spec_io.hpp"

using namespace oped;

namespace {

constexpr std::uint64_t kGateSeed = 20260821ull;

std::string cli_path() {
  const char* env = std::getenv("OPED_CLI");
  return env ? std::string(env) : std::string("build/oped");
}

std::string spec_dir() {
  const char* env = std::getenv("OPED_SPECS");
  return env ? std::string(env) : std::string("specs");
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = "'" + cli_path() + "' " + args + " 2>&1";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe))
    res.output.append(buf, got);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Outcome {
  bool pass = false;
  std::string text;
};

// Criterion 1: the exact lemma suite holds with margin >= -1e-9 on 100
// random instances, under 60 seconds.
Outcome criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<LemmaResult> rows = run_lemma_suite(kGateSeed, 100);
  int checked = 0, passed = 0, skipped = 0;
  double min_margin = 1e300;
  for (const LemmaResult& r : rows) {
    if (r.skipped) {
      ++skipped;
      continue;
    }
    ++checked;
    if (r.pass && r.margin >= -1e-9) ++passed;
    min_margin = std::min(min_margin, r.margin);
  }
  double dt = seconds_since(t0);
  Outcome out;
  out.pass = checked > 0 && passed == checked && dt < 60.0;
  out.text = fmt(
      "exact lemma suite: %d/%d rows pass (%d skipped), min margin=%.2e "
      "(tol -1e-9), %.1fs (limit 60s)",
      passed, checked, skipped, min_margin, dt);
  return out;
}

// Criterion 2: I(r) is nondecreasing and I(0)=0 under realizability on the
// suite instances; on 20 random realizable linear classes (d <= 4),
// max_r |I(r) - beta r| <= 1e-6 max(1, r). Under 30 seconds.
Outcome criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  int mono_bad = 0, zero_bad = 0;
  Rng rng(kGateSeed);
  for (int i = 0; i < 100; ++i) {
    ProblemInstance inst = random_finite_instance(rng, i % 2 == 0);
    std::vector<double> grid =
        default_r_grid(inst.cls, inst.mdp, inst.pi, inst.mu);
    std::vector<CurvePoint> curve =
        incompleteness_function(inst.cls, inst.mdp, inst.pi, inst.mu, grid);
    double prev = -1e300;
    for (const CurvePoint& cp : curve) {
      if (cp.empty) continue;
      if (cp.value < prev - 1e-9) ++mono_bad;
      prev = std::max(prev, cp.value);
    }
    if (inst.realizable_by_construction) {
      if (curve.front().empty || curve.front().value > 1e-9) ++zero_bad;
    }
  }

  double worst_excess = -1e300;
  int linear_empty = 0;
  Rng rng2(kGateSeed ^ 0x5eedull);
  for (int t = 0; t < 20; ++t) {
    ProblemInstance inst = random_linear_realizable_instance(rng2);
    double b = beta(inst.cls, inst.mdp, inst.pi, inst.mu);
    std::vector<double> grid =
        default_r_grid(inst.cls, inst.mdp, inst.pi, inst.mu);
    std::vector<CurvePoint> curve =
        incompleteness_function(inst.cls, inst.mdp, inst.pi, inst.mu, grid);
    for (const CurvePoint& cp : curve) {
      if (cp.empty) {
        ++linear_empty;
        continue;
      }
      double dev = std::fabs(cp.value - b * cp.r);
      worst_excess = std::max(worst_excess, dev - 1e-6 * std::max(1.0, cp.r));
    }
  }
  double dt = seconds_since(t0);
  Outcome out;
  out.pass = mono_bad == 0 && zero_bad == 0 && linear_empty == 0 &&
             worst_excess <= 0.0 && dt < 30.0;
  out.text = fmt(
      "incompleteness laws: monotonicity violations=%d, I(0) violations=%d "
      "on 100 instances; linear law worst excess=%.2e (<=0 means within "
      "1e-6 max(1,r)), empty points=%d, %.1fs (limit 30s)",
      mono_bad, zero_bad, worst_excess, linear_empty, dt);
  return out;
}

// Criterion 3: the geometry construction reproduces beta = 0.34, 0.70, 0.996
// at theta = 20, 45, 85 degrees within 0.02, beta <= 1e-9 at theta = 0, and
// the binary's geometry subcommand exits 0.
Outcome criterion3() {
  RunResult spawned = run_cli("geometry --theta 0 --theta 20 --theta 45 --theta 85");
  std::vector<GeometryRow> rows = geometry_sweep({0.0, 20.0, 45.0, 85.0});
  const double targets[4] = {0.0, 0.34, 0.70, 0.996};
  double worst = 0.0;
  bool ok = rows.size() == 4;
  if (ok) {
    ok = rows[0].beta <= 1e-9;
    for (int i = 1; i < 4; ++i) {
      double dev = std::fabs(rows[i].beta - targets[i]);
      worst = std::max(worst, dev);
      ok = ok && dev <= 0.02;
    }
  }
  Outcome out;
  out.pass = ok && spawned.exit_code == 0;
  out.text = fmt(
      "geometry: beta(0)=%.2e (tol 1e-9), beta(20)=%.4f, beta(45)=%.4f, "
      "beta(85)=%.4f vs 0.34/0.70/0.996, worst dev=%.4f (tol 0.02), "
      "binary exit=%d",
      rows.empty() ? -1.0 : rows[0].beta, rows.size() > 1 ? rows[1].beta : -1.0,
      rows.size() > 2 ? rows[2].beta : -1.0, rows.size() > 3 ? rows[3].beta : -1.0,
      worst, spawned.exit_code);
  return out;
}

// Criteria 4 and 5 share one sweep of the bundled beta=0.5 spec.
std::vector<ScalingRow> g_sweep_rows;
double g_sweep_seconds = 0.0;

// Criterion 4: median |E(fhat)| over 50 seeds at n in {1e2..1e5} has log-log
// slope in [-0.7, -0.3] with strictly decreasing medians, under 5 minutes.
Outcome criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  ProblemSpec spec = io::load_spec(spec_dir() + "/scaling_beta05.json");
  SweepConfig cfg = io::load_sweep(spec_dir() + "/sweep_scaling.json");
  g_sweep_rows = run_scaling(spec, cfg, 1ull, 1);
  g_sweep_seconds = seconds_since(t0);

  ScalingSummary sm = summarize_scaling(g_sweep_rows);
  bool decreasing = sm.median_abs_error.size() == 4;
  for (std::size_t i = 1; i < sm.median_abs_error.size(); ++i)
    decreasing = decreasing && sm.median_abs_error[i] < sm.median_abs_error[i - 1];
  bool slope_ok = sm.slope_defined && sm.loglog_slope >= -0.7 &&
                  sm.loglog_slope <= -0.3;

  std::string medians;
  for (std::size_t i = 0; i < sm.median_abs_error.size(); ++i)
    medians += fmt("%s%.3e", i ? "," : "", sm.median_abs_error[i]);

  Outcome out;
  out.pass = decreasing && slope_ok && g_sweep_seconds < 300.0;
  out.text = fmt(
      "estimator consistency: slope=%.3f (range [-0.7,-0.3]), medians=[%s] "
      "strictly decreasing=%s, %.1fs (limit 300s)",
      sm.slope_defined ? sm.loglog_slope : 0.0, medians.c_str(),
      decreasing ? "yes" : "no", g_sweep_seconds);
  return out;
}

// Criterion 5: smallest constant c with |E(fhat)| <= c * bound in >= 90% of
// seeds at every n; assert c <= 10.
Outcome criterion5() {
  Outcome out;
  if (g_sweep_rows.empty()) {
    out.text = "bound coverage: sweep unavailable (criterion 4 did not run)";
    return out;
  }
  std::vector<std::size_t> ns;
  for (const ScalingRow& r : g_sweep_rows)
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);

  double c_required = 0.0;
  bool rows_ok = true;
  for (std::size_t n : ns) {
    std::vector<double> ratios;
    for (const ScalingRow& r : g_sweep_rows) {
      if (r.n != n) continue;
      if (!r.error.empty()) rows_ok = false;
      if (r.new_bound.is_inf) {
        ratios.push_back(0.0);  // an infinite bound covers any error
      } else if (r.new_bound.value > 0.0) {
        ratios.push_back(r.abs_error / r.new_bound.value);
      } else {
        rows_ok = false;
      }
    }
    if (ratios.empty()) {
      rows_ok = false;
      continue;
    }
    std::sort(ratios.begin(), ratios.end());
    std::size_t need = (ratios.size() * 9 + 9) / 10;  // ceil(0.9 m)
    c_required = std::max(c_required, ratios[need - 1]);
  }
  out.pass = rows_ok && c_required <= 10.0;
  out.text = fmt(
      "bound coverage: smallest c with 90%% coverage at every n is %.3f "
      "(assert c <= 10, theorem constant 1 up to ≲)",
      c_required);
  return out;
}

// Criterion 6: across 50 converged fitted-Q runs on finite classes, the
// empirical minimax value of the fixed point matches the exhaustive
// minimizer's program value within 1e-6.
Outcome criterion6() {
  Rng rng(kGateSeed ^ 0xf17edull);
  int converged = 0, attempts = 0;
  double worst_gap = 0.0;
  while (converged < 50 && attempts < 600) {
    ++attempts;
    ProblemInstance inst = random_finite_instance(rng, attempts % 2 == 0);
    Dataset data = sample_dataset(inst.mdp, inst.mu, 400,
                                  derive_seed(kGateSeed, attempts));
    FitResult fq = fitted_q(inst.cls, data, inst.pi, inst.mdp.discount);
    if (!fq.converged) continue;
    ++converged;
    FitResult mm = minimize_minimax(inst.cls, data, inst.pi, inst.mdp.discount);
    double m_fq = empirical_minimax(fq.estimate, data, inst.cls, inst.pi,
                                    inst.mdp.discount);
    worst_gap = std::max(worst_gap, std::fabs(m_fq - mm.program_value));
  }
  Outcome out;
  out.pass = converged == 50 && worst_gap <= 1e-6;
  out.text = fmt(
      "fixed-point agreement: %d converged fitted-Q runs in %d attempts, "
      "worst |M(f_FQ) - M(fhat)|=%.2e (tol 1e-6)",
      converged, attempts, worst_gap);
  return out;
}

// Criterion 7: on the bundled beta=0.7 instance with I_F >= 0.2, the classic
// bound is tighter at n=1e2 and the incompleteness bound is tighter at n=1e6.
Outcome criterion7() {
  ProblemSpec spec = io::load_spec(spec_dir() + "/crossover_beta07.json");
  double b = beta(spec.cls, spec.mdp, spec.pi, spec.mu);
  ExtReal conc =
      concentrability(spec.cls, spec.mdp, spec.pi, spec.mu, spec.s0);
  double ibe = inherent_bellman_error(spec.cls, spec.mdp, spec.pi, spec.mu);
  std::size_t card = spec.cls.as_finite().members.size();

  BoundReport small = make_bound_report(card, 0.1, 100, spec.mdp.discount, b,
                                        conc, ExtReal::finite(ibe));
  BoundReport large = make_bound_report(card, 0.1, 1000000, spec.mdp.discount,
                                        b, conc, ExtReal::finite(ibe));
  bool pre = std::fabs(b - 0.7) <= 0.02 && ibe >= 0.2;
  bool flip = small.classic_bound < small.new_bound &&
              large.new_bound < large.classic_bound;
  Outcome out;
  out.pass = pre && flip;
  out.text = fmt(
      "crossover: beta=%.4f (target 0.70 +-0.02), I_F=%.3f (>=0.2), card=%zu; "
      "n=1e2 new=%s classic=%s, n=1e6 new=%s classic=%s",
      b, ibe, card, small.new_bound.to_string().c_str(),
      small.classic_bound.to_string().c_str(),
      large.new_bound.to_string().c_str(),
      large.classic_bound.to_string().c_str());
  return out;
}

// Criterion 8: the scaling subcommand is byte-deterministic across --jobs 1
// and --jobs 8.
Outcome criterion8() {
  std::string spec = spec_dir() + "/scaling_beta05.json";
  std::string sweep = spec_dir() + "/sweep_small.json";
  std::string out1 = "/tmp/oped_accept_jobs1.csv";
  std::string out8 = "/tmp/oped_accept_jobs8.csv";
  std::remove(out1.c_str());
  std::remove(out8.c_str());
  RunResult r1 = run_cli("scaling --spec '" + spec + "' --sweep '" + sweep +
                         "' --seed 5 --jobs 1 --out " + out1);
  RunResult r8 = run_cli("scaling --spec '" + spec + "' --sweep '" + sweep +
                         "' --seed 5 --jobs 8 --out " + out8);
  std::string c1 = slurp(out1);
  std::string c8 = slurp(out8);
  Outcome out;
  out.pass = r1.exit_code == 0 && r8.exit_code == 0 && !c1.empty() && c1 == c8;
  out.text = fmt(
      "determinism: jobs=1 exit=%d (%zu bytes), jobs=8 exit=%d (%zu bytes), "
      "byte-identical=%s",
      r1.exit_code, c1.size(), r8.exit_code, c8.size(),
      c1 == c8 && !c1.empty() ? "yes" : "NO");
  return out;
}

}  // namespace

int main() {
  Outcome (*criteria[8])() = {criterion1, criterion2, criterion3, criterion4,
                              criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int i = 0; i < 8; ++i) {
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.text = std::string("exception: ") + e.what();
    }
    all = all && out.pass;
    std::printf("[%s] criterion %d: %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                out.text.c_str());
    std::fflush(stdout);
  }
  std::printf("%s\n", all ? "acceptance: 8/8 criteria passed"
                          : "acceptance: FAILURES present");
  return all ? 0 : 1;
}
