#pragma once

// Empirical verification of the supporting lemmas on randomly generated
// instances. Every check is computed from exact laws (no sampling), so a
// violated margin is a real counterexample, not noise.
//
// Margin convention: inequalities report (rhs - lhs) / max(1, |rhs|),
// identities report -|lhs - rhs| / max(1, |rhs|). A check passes when its
// margin is >= -1e-9. Checks whose preconditions fail are skipped with a
// reason, never silently passed.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oped/common.hpp"
#include "oped/diagnostics.hpp"
#include "oped/instances.hpp"
#include "oped/mdp.hpp"
#include "oped/random.hpp"

namespace oped {

struct LemmaResult {
  std::string lemma;
  int instance = 0;
  double margin = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string note;
};

constexpr double kLemmaTol = -1e-9;

namespace detail {

inline double ineq_margin(double lhs, double rhs) {
  return (rhs - lhs) / std::max(1.0, std::abs(rhs));
}

inline double ident_margin(double lhs, double rhs) {
  return -std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

inline LemmaResult row(const std::string& name, int idx, double margin) {
  LemmaResult r;
  r.lemma = name;
  r.instance = idx;
  r.margin = margin;
  r.pass = margin >= kLemmaTol;
  return r;
}

inline LemmaResult skip_row(const std::string& name, int idx,
                            const std::string& why) {
  LemmaResult r;
  r.lemma = name;
  r.instance = idx;
  r.skipped = true;
  r.pass = true;
  r.note = why;
  return r;
}

// Exact E[c(g, f)] = E_mu E_R E_P (g(s,a) - r - gamma f(s',pi))^2, summed
// directly over the laws. Deliberately ignorant of the decomposition it is
// checked against.
inline double brute_expected_cost(const TabularMdp& mdp, const Policy& pi,
                                  const StateActionDistribution& mu,
                                  const QFunction& g, const QFunction& f) {
  double acc = 0.0;
  std::vector<double> nv(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) nv[s] = f.eval_policy(s, pi);
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) {
      double w = mu.probs[s][a];
      if (w == 0.0) continue;
      for (const RewardAtom& at : mdp.reward_law[s][a])
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          double p = at.prob * mdp.transition[s][a][s2];
          if (p == 0.0) continue;
          double c = g(s, a) - at.value - mdp.discount * nv[s2];
          acc += w * p * c * c;
        }
    }
  return acc;
}

}  // namespace detail

// Runs all lemma checks on one instance, appending rows.
inline void check_instance(const ProblemInstance& inst, int idx, Rng& rng,
                           std::vector<LemmaResult>& out) {
  const TabularMdp& mdp = inst.mdp;
  const Policy& pi = inst.pi;
  const StateActionDistribution& mu = inst.mu;
  const FunctionClass& cls = inst.cls;
  const FiniteClass& fc = cls.as_finite();
  const int K = static_cast<int>(fc.members.size());
  double gamma = mdp.discount;

  QFunction fstar = exact_q(mdp, pi);
  StateActionDistribution dpi = occupancy(mdp, pi, inst.s0);
  double beta_val = beta(cls, mdp, pi, mu);
  bool realizable = check_realizability(cls, mdp, pi, mu).is_realizable;

  const QFunction& f = fc.members[rand_int(rng, 0, K - 1)];
  const QFunction& g = fc.members[rand_int(rng, 0, K - 1)];

  // Cost expectation: E c(g,f) = ||g - Tf||_mu^2 + sigma^2(f).
  {
    double lhs = detail::brute_expected_cost(mdp, pi, mu, g, f);
    QFunction tf = bellman_backup(mdp, pi, f);
    double d = mu_dist(g, tf, mu);
    double rhs = d * d + sigma_sq(mdp, pi, mu, f);
    out.push_back(detail::row("cost-expectation", idx, detail::ident_margin(lhs, rhs)));
  }

  ProcessMoments pm = exact_process_moments(cls, mdp, pi, mu, f);

  // Modified cost: E[X] recovers the population minimax loss.
  {
    double m = population_minimax_loss(cls, mdp, pi, mu, f);
    out.push_back(detail::row("modified-cost", idx, detail::ident_margin(pm.px, m)));
  }

  // Weak simulation: |E(f)| <= ||f - Tf||_dpi / (1 - gamma).
  {
    double lhs = std::abs(prediction_error(f, fstar, pi, inst.s0));
    QFunction tf = bellman_backup(mdp, pi, f);
    double rhs = mu_dist(f, tf, dpi) / (1.0 - gamma);
    out.push_back(detail::row("weak-simulation", idx, detail::ineq_margin(lhs, rhs)));
  }

  // Beta effect: M(h) >= (1 - beta^2) ||h - Th||_mu^2 for every member.
  {
    double worst = std::numeric_limits<double>::infinity();
    for (const QFunction& h : fc.members) {
      double m = population_minimax_loss(cls, mdp, pi, mu, h);
      QFunction th = bellman_backup(mdp, pi, h);
      double be = mu_dist(h, th, mu);
      double rhs = (1.0 - beta_val * beta_val) * be * be;
      worst = std::min(worst, detail::ineq_margin(rhs, m));
    }
    out.push_back(detail::row("beta-effect", idx, worst));
  }

  // X variance: Var[X] <= 16 ||f - g_f||_mu^2 when members live in [0,1]
  // and rewards in [0,1].
  {
    QFunction gf = projected_backup(cls, mdp, pi, f, mu);
    double d = mu_dist(f, gf, mu);
    out.push_back(
        detail::row("x-variance", idx, detail::ineq_margin(pm.var_x, 16.0 * d * d)));
  }

  // Y variance: Var[Y] <= 16 (-E[Y]); stated under realizability, so
  // misspecified instances are skipped, not silently passed.
  {
    if (!realizable) {
      out.push_back(
          detail::skip_row("y-variance", idx, "class not realizable"));
    } else {
      ProcessMoments pg = exact_process_moments(cls, mdp, pi, mu, g);
      out.push_back(detail::row("y-variance", idx,
                                detail::ineq_margin(pg.var_y, 16.0 * (-pg.py))));
    }
  }

  // Off-policy cost cap: C* <= C / ((1-gamma)^2 (1-beta)), valid for beta < 1.
  {
    ExtReal cstar = opc(cls, mdp, pi, mu, inst.s0);
    ExtReal conc = concentrability(cls, mdp, pi, mu, inst.s0);
    if (beta_val >= 1.0 - 1e-9) {
      out.push_back(detail::skip_row("opc-bound", idx, "beta at one"));
    } else if (!conc.finite_value()) {
      out.push_back(detail::skip_row("opc-bound", idx, "cap infinite"));
    } else if (!cstar.finite_value()) {
      LemmaResult r = detail::row("opc-bound", idx, -1.0);
      r.note = "opc infinite below beta one";
      out.push_back(r);
    } else {
      double cap =
          conc.value / ((1.0 - gamma) * (1.0 - gamma) * (1.0 - beta_val));
      out.push_back(
          detail::row("opc-bound", idx, detail::ineq_margin(cstar.value, cap)));
    }
  }

  std::vector<double> grid = default_r_grid(cls, mdp, pi, mu);
  std::vector<CurvePoint> curve =
      incompleteness_function(cls, mdp, pi, mu, grid);

  // Curve monotone in r.
  {
    double worst = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    for (const CurvePoint& cp : curve) {
      if (cp.empty) continue;
      if (have_prev)
        worst = std::min(worst, (cp.value - prev) / std::max(1.0, prev));
      prev = cp.value;
      have_prev = true;
    }
    out.push_back(detail::row("curve-monotone", idx, worst));
  }

  // I(0) = 0 under realizability.
  {
    if (!realizable) {
      out.push_back(detail::skip_row("curve-zero-realizable", idx, "F(r) empty"));
    } else {
      double v0 = 0.0;
      for (const CurvePoint& cp : curve)
        if (cp.r == 0.0 && !cp.empty) v0 = cp.value;
      out.push_back(detail::row("curve-zero-realizable", idx, -v0));
    }
  }

  // Linear rate: I(r) <= beta r everywhere on the grid.
  {
    double worst = 0.0;
    for (const CurvePoint& cp : curve) {
      if (cp.empty) continue;
      worst = std::min(worst, detail::ineq_margin(cp.value, beta_val * cp.r));
    }
    out.push_back(detail::row("curve-linear-rate", idx, worst));
  }
}

// The full suite: n_instances random problems, alternating realizable and
// misspecified, each carrying its own derived stream.
inline std::vector<LemmaResult> run_lemma_suite(std::uint64_t seed,
                                                int n_instances) {
  if (n_instances < 1)
    throw validation_error("run_lemma_suite: need at least one instance");
  std::vector<LemmaResult> out;
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    ProblemInstance inst = random_finite_instance(rng, i % 2 == 0);
    check_instance(inst, i, rng, out);
  }
  return out;
}

inline bool all_pass(const std::vector<LemmaResult>& rows) {
  for (const LemmaResult& r : rows)
    if (!r.pass) return false;
  return true;
}

}  // namespace oped
