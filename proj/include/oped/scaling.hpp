#pragma once

// The scaling sweep: a grid of (n, seed) cells, each sampling a dataset,
// fitting an estimator, and recording prediction error against the bounds.
//
// Cells are pure given (spec, master seed, cell index): per-cell streams
// come from derive_seed, results land in preassigned slots, and rows are
// sorted by (n, seed) before writing, so any worker count produces a
// byte-identical CSV. Per-cell failures are recorded in the error column
// and never abort the sweep.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oped/common.hpp"
#include "oped/dataset.hpp"
#include "oped/diagnostics.hpp"
#include "oped/estimation.hpp"
#include "oped/spec_io.hpp"

namespace oped {

struct ScalingRow {
  std::size_t n = 0;
  int seed = 0;  // seed index within the sweep; the stream is derived
  double abs_error = 0.0;
  double m_hat = 0.0;
  ExtReal new_bound;
  ExtReal classic_bound;
  bool converged = false;
  std::string error;  // empty on success
};

struct ScalingSummary {
  std::vector<std::size_t> n_values;
  std::vector<double> median_abs_error;  // per n
  std::vector<double> coverage;          // fraction with abs_error <= new_bound
  double loglog_slope = 0.0;
  bool slope_defined = false;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

inline std::string sanitize_csv(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Runs the full grid. Bounds need a finite cardinality; linear classes get
// the sentinel in both bound columns since the finite-class theorem does
// not apply to them.
inline std::vector<ScalingRow> run_scaling(const ProblemSpec& spec,
                                           const SweepConfig& cfg,
                                           std::uint64_t master_seed,
                                           int jobs = 1) {
  if (jobs < 1) jobs = 1;
  const std::size_t cells = cfg.n_values.size() * cfg.seeds;
  std::vector<ScalingRow> rows(cells);

  // Population constants shared by every cell.
  QFunction fstar = exact_q(spec.mdp, spec.pi);
  double beta_val = beta(spec.cls, spec.mdp, spec.pi, spec.mu);
  ExtReal conc =
      concentrability(spec.cls, spec.mdp, spec.pi, spec.mu, spec.s0);
  ExtReal ibe;
  try {
    ibe = ExtReal::finite(
        inherent_bellman_error(spec.cls, spec.mdp, spec.pi, spec.mu));
  } catch (const std::domain_error&) {
    ibe = ExtReal::inf();
  }
  const bool finite_class = spec.cls.is_finite();
  const std::size_t card_f =
      finite_class ? spec.cls.as_finite().members.size() : 1;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= cells) return;
      std::size_t in = c / cfg.seeds;
      int is = static_cast<int>(c % cfg.seeds);
      ScalingRow& row = rows[c];
      row.n = cfg.n_values[in];
      row.seed = is;
      try {
        std::uint64_t cell_seed = derive_seed(master_seed, c);
        Dataset data = sample_dataset(spec.mdp, spec.mu, row.n, cell_seed);
        FitResult fit;
        if (cfg.estimator == "fitted_q")
          fit = fitted_q(spec.cls, data, spec.pi, spec.mdp.discount);
        else
          fit = minimize_minimax(spec.cls, data, spec.pi, spec.mdp.discount);
        row.abs_error =
            std::abs(prediction_error(fit.estimate, fstar, spec.pi, spec.s0));
        row.m_hat = fit.program_value;
        row.converged = fit.converged;
        if (finite_class) {
          BoundReport br =
              make_bound_report(card_f, cfg.delta, row.n, spec.mdp.discount,
                                beta_val, conc, ibe);
          row.new_bound = br.new_bound;
          row.classic_bound = br.classic_bound;
        } else {
          row.new_bound = ExtReal::inf();
          row.classic_bound = ExtReal::inf();
        }
      } catch (const std::exception& e) {
        row.error = detail::sanitize_csv(e.what());
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(),
            [](const ScalingRow& a, const ScalingRow& b) {
              if (a.n != b.n) return a.n < b.n;
              return a.seed < b.seed;
            });
  return rows;
}

inline ScalingSummary summarize_scaling(const std::vector<ScalingRow>& rows) {
  ScalingSummary sm;
  for (const ScalingRow& r : rows)
    if (sm.n_values.empty() || sm.n_values.back() != r.n)
      sm.n_values.push_back(r.n);
  for (std::size_t n : sm.n_values) {
    std::vector<double> errs;
    int covered = 0, total = 0;
    for (const ScalingRow& r : rows) {
      if (r.n != n || !r.error.empty()) continue;
      errs.push_back(r.abs_error);
      ++total;
      if (!r.new_bound.finite_value() || r.abs_error <= r.new_bound.value)
        ++covered;
    }
    sm.median_abs_error.push_back(errs.empty() ? 0.0 : detail::median_of(errs));
    sm.coverage.push_back(total > 0 ? static_cast<double>(covered) / total : 0.0);
  }

  // Least-squares slope of log10(median) against log10(n), over the n with
  // positive medians.
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sm.n_values.size(); ++i)
    if (sm.median_abs_error[i] > 0.0) {
      xs.push_back(std::log10(static_cast<double>(sm.n_values[i])));
      ys.push_back(std::log10(sm.median_abs_error[i]));
    }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0.0) {
      sm.loglog_slope = sxy / sxx;
      sm.slope_defined = true;
    }
  }
  return sm;
}

// Fixed schema: n,seed,abs_error,m_hat,new_bound,classic_bound,converged,error
// then a comment summary block with per-n medians, coverage, and the slope.
inline std::string scaling_csv(const std::vector<ScalingRow>& rows,
                               std::uint64_t master_seed, double delta,
                               const std::string& estimator) {
  std::ostringstream os;
  os << "# master_seed=" << master_seed << " delta=" << detail::fmt17(delta)
     << " estimator=" << estimator << "\n";
  os << "n,seed,abs_error,m_hat,new_bound,classic_bound,converged,error\n";
  for (const ScalingRow& r : rows) {
    os << r.n << ',' << r.seed << ',' << detail::fmt17(r.abs_error) << ','
       << detail::fmt17(r.m_hat) << ','
       << (r.new_bound.finite_value() ? detail::fmt17(r.new_bound.value)
                                      : std::string("inf"))
       << ','
       << (r.classic_bound.finite_value() ? detail::fmt17(r.classic_bound.value)
                                          : std::string("inf"))
       << ',' << (r.converged ? 1 : 0) << ',' << r.error << "\n";
  }
  ScalingSummary sm = summarize_scaling(rows);
  for (std::size_t i = 0; i < sm.n_values.size(); ++i)
    os << "# summary n=" << sm.n_values[i]
       << " median_abs_error=" << detail::fmt17(sm.median_abs_error[i])
       << " coverage=" << detail::fmt17(sm.coverage[i]) << "\n";
  if (sm.slope_defined)
    os << "# loglog_slope=" << detail::fmt17(sm.loglog_slope) << "\n";
  return os.str();
}

}  // namespace oped
