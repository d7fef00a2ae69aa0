#pragma once

// Reference implementations the test suite checks the library against.
// Everything here is recomputed from first principles with plain loops:
// no Eigen, no shared code paths with the headers under test. Slow and
// dumb on purpose; only run on desk-scale instances.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "oped/dataset.hpp"
#include "oped/function_class.hpp"
#include "oped/mdp.hpp"

namespace oracle {

using oped::Dataset;
using oped::FiniteClass;
using oped::LinearClass;
using oped::Policy;
using oped::QFunction;
using oped::StateActionDistribution;
using oped::TabularMdp;
using oped::Tuple;

// One exact application of the evaluation operator, written as the raw
// four-deep sum over actions, atoms, and successors.
inline QFunction naive_backup(const TabularMdp& mdp, const Policy& pi,
                              const QFunction& f) {
  const int S = mdp.n_states, A = mdp.n_actions;
  QFunction out = QFunction::zeros(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double v = 0.0;
      for (const auto& atom : mdp.reward_law[s][a]) v += atom.prob * atom.value;
      for (int s2 = 0; s2 < S; ++s2) {
        double inner = 0.0;
        for (int a2 = 0; a2 < A; ++a2)
          inner += pi.action_probs[s2][a2] * f(s2, a2);
        v += mdp.discount * mdp.transition[s][a][s2] * inner;
      }
      out.at(s, a) = v;
    }
  return out;
}

// Fixed point by plain value iteration from zero; the contraction rate
// gamma^iters bounds the error, so callers pick iters for their tolerance.
inline QFunction value_iteration(const TabularMdp& mdp, const Policy& pi,
                                 int iters) {
  QFunction q = QFunction::zeros(mdp.n_states, mdp.n_actions);
  for (int k = 0; k < iters; ++k) q = naive_backup(mdp, pi, q);
  return q;
}

// Discounted occupancy by truncated series: (1-gamma) sum_k gamma^k P^k
// over state marginals started at s0, then multiplied by the policy.
inline StateActionDistribution occupancy_series(const TabularMdp& mdp,
                                                const Policy& pi, int s0,
                                                int terms) {
  const int S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> cur(S, 0.0), acc(S, 0.0);
  cur[s0] = 1.0;
  double w = 1.0 - mdp.discount;
  for (int k = 0; k < terms; ++k) {
    for (int s = 0; s < S; ++s) acc[s] += w * cur[s];
    std::vector<double> nxt(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (cur[s] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        double pa = pi.action_probs[s][a];
        if (pa == 0.0) continue;
        for (int s2 = 0; s2 < S; ++s2)
          nxt[s2] += cur[s] * pa * mdp.transition[s][a][s2];
      }
    }
    cur = std::move(nxt);
    w *= mdp.discount;
  }
  StateActionDistribution d;
  d.probs.assign(S, std::vector<double>(A, 0.0));
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) d.probs[s][a] = acc[s] * pi.action_probs[s][a];
  return d;
}

inline double seminorm(const QFunction& f, const StateActionDistribution& mu) {
  double acc = 0.0;
  for (int s = 0; s < f.n_states(); ++s)
    for (int a = 0; a < f.n_actions(); ++a)
      acc += mu.probs[s][a] * f(s, a) * f(s, a);
  return std::sqrt(acc);
}

inline double dist(const QFunction& f, const QFunction& g,
                   const StateActionDistribution& mu) {
  double acc = 0.0;
  for (int s = 0; s < f.n_states(); ++s)
    for (int a = 0; a < f.n_actions(); ++a) {
      double x = f(s, a) - g(s, a);
      acc += mu.probs[s][a] * x * x;
    }
  return std::sqrt(acc);
}

inline double best_member_dist(const std::vector<QFunction>& members,
                               const QFunction& target,
                               const StateActionDistribution& mu) {
  double best = std::numeric_limits<double>::infinity();
  for (const QFunction& m : members) best = std::min(best, dist(m, target, mu));
  return best;
}

// Population minimax value for a finite class: ||f - Tf||^2 minus the best
// member approximation of Tf, clipped at zero.
inline double finite_minimax(const std::vector<QFunction>& members,
                             const TabularMdp& mdp, const Policy& pi,
                             const StateActionDistribution& mu,
                             const QFunction& f) {
  QFunction tf = naive_backup(mdp, pi, f);
  double be = dist(f, tf, mu);
  double d = best_member_dist(members, tf, mu);
  return be * be - d * d;
}

inline double finite_inherent_be(const std::vector<QFunction>& members,
                                 const TabularMdp& mdp, const Policy& pi,
                                 const StateActionDistribution& mu) {
  double worst = 0.0;
  for (const QFunction& f : members) {
    QFunction tf = naive_backup(mdp, pi, f);
    worst = std::max(worst, best_member_dist(members, tf, mu));
  }
  return worst;
}

// Incompleteness profile at radius r: worst best-approximation distance
// among members whose Bellman error is at most r. empty reports whether no
// member qualified.
inline double finite_incompleteness(const std::vector<QFunction>& members,
                                    const TabularMdp& mdp, const Policy& pi,
                                    const StateActionDistribution& mu, double r,
                                    double slack, bool& empty) {
  double worst = 0.0;
  empty = true;
  for (const QFunction& f : members) {
    QFunction tf = naive_backup(mdp, pi, f);
    if (dist(f, tf, mu) > r + slack) continue;
    empty = false;
    worst = std::max(worst, best_member_dist(members, tf, mu));
  }
  return worst;
}

inline double finite_beta(const std::vector<QFunction>& members,
                          const TabularMdp& mdp, const Policy& pi,
                          const StateActionDistribution& mu) {
  double max_be = 0.0;
  std::vector<double> bes, dists;
  for (const QFunction& f : members) {
    QFunction tf = naive_backup(mdp, pi, f);
    bes.push_back(dist(f, tf, mu));
    dists.push_back(best_member_dist(members, tf, mu));
    max_be = std::max(max_be, bes.back());
  }
  double tol = 1e-12 * std::max(1.0, max_be);
  double best = 0.0;
  for (std::size_t i = 0; i < bes.size(); ++i)
    if (bes[i] > tol) best = std::max(best, dists[i] / bes[i]);
  return std::min(1.0, best);
}

// Concentrability as the worst ratio of occupancy-weighted to mu-weighted
// Bellman residual norms over members. infinite reports a residual that mu
// cannot see but the occupancy can.
inline double finite_concentrability(const std::vector<QFunction>& members,
                                     const TabularMdp& mdp, const Policy& pi,
                                     const StateActionDistribution& mu,
                                     const StateActionDistribution& dpi,
                                     bool& infinite) {
  infinite = false;
  double max_num = 0.0;
  for (const QFunction& f : members) {
    QFunction tf = naive_backup(mdp, pi, f);
    max_num = std::max(max_num, dist(f, tf, dpi));
  }
  double tol = 1e-12 * std::max(1.0, max_num);
  double best = 0.0;
  for (const QFunction& f : members) {
    QFunction tf = naive_backup(mdp, pi, f);
    double num = dist(f, tf, dpi);
    double den = dist(f, tf, mu);
    if (den <= tol) {
      if (num > tol) infinite = true;
      continue;
    }
    best = std::max(best, (num * num) / (den * den));
  }
  return best;
}

// Off-policy cost coefficient: sup of squared prediction error over the
// population minimax value, with the zero-over-zero members excluded and
// the zero-denominator nonzero-numerator case reported as infinite.
inline double finite_opc(const std::vector<QFunction>& members,
                         const TabularMdp& mdp, const Policy& pi,
                         const StateActionDistribution& mu, int s0,
                         const QFunction& fstar, bool& infinite) {
  infinite = false;
  double tol_m = 1e-12;
  double tol_e = 1e-9 * std::max(1.0, fstar.max_abs());
  double best = 0.0;
  for (const QFunction& f : members) {
    double e = fstar.eval_policy(s0, pi) - f.eval_policy(s0, pi);
    double m = finite_minimax(members, mdp, pi, mu, f);
    if (m <= tol_m) {
      if (std::abs(e) > tol_e) infinite = true;
      continue;
    }
    best = std::max(best, e * e / m);
  }
  return best;
}

// Best achievable mu-distance from a rank<=2 linear span to a target, by
// dense grid search over the weight box [lo,hi]^dim.
inline double grid_project_dist(const LinearClass& lc, const QFunction& target,
                                const StateActionDistribution& mu, double lo,
                                double hi, double step) {
  const int S = lc.n_states, A = lc.n_actions;
  auto eval_dist = [&](double w0, double w1) {
    double acc = 0.0;
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        int sa = s * A + a;
        double v = lc.phi(sa, 0) * w0;
        if (lc.dim > 1) v += lc.phi(sa, 1) * w1;
        double x = v - target(s, a);
        acc += mu.probs[s][a] * x * x;
      }
    return std::sqrt(acc);
  };
  double best = std::numeric_limits<double>::infinity();
  if (lc.dim == 1) {
    for (double w0 = lo; w0 <= hi; w0 += step)
      best = std::min(best, eval_dist(w0, 0.0));
  } else {
    for (double w0 = lo; w0 <= hi; w0 += step)
      for (double w1 = lo; w1 <= hi; w1 += step)
        best = std::min(best, eval_dist(w0, w1));
  }
  return best;
}

// Empirical squared-TD loss by direct summation over tuples.
inline double raw_empirical_loss(const QFunction& g, const QFunction& f,
                                 const std::vector<Tuple>& tuples,
                                 const Policy& pi, double gamma) {
  double acc = 0.0;
  for (const Tuple& t : tuples) {
    double target = t.r + gamma * f.eval_policy(t.s_next, pi);
    double x = g(t.s, t.a) - target;
    acc += x * x;
  }
  return acc / static_cast<double>(tuples.size());
}

// Variance of the one-step TD target of f under mu: reward variance plus
// discounted next-value variance, both from the raw laws.
inline double sigma_sq_naive(const TabularMdp& mdp, const Policy& pi,
                             const StateActionDistribution& mu,
                             const QFunction& f) {
  const int S = mdp.n_states, A = mdp.n_actions;
  double acc = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double w = mu.probs[s][a];
      if (w == 0.0) continue;
      double er = 0.0, er2 = 0.0;
      for (const auto& atom : mdp.reward_law[s][a]) {
        er += atom.prob * atom.value;
        er2 += atom.prob * atom.value * atom.value;
      }
      double ev = 0.0, ev2 = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        double nv = 0.0;
        for (int a2 = 0; a2 < A; ++a2)
          nv += pi.action_probs[s2][a2] * f(s2, a2);
        ev += mdp.transition[s][a][s2] * nv;
        ev2 += mdp.transition[s][a][s2] * nv * nv;
      }
      double vr = std::max(0.0, er2 - er * er);
      double vv = std::max(0.0, ev2 - ev * ev);
      acc += w * (vr + mdp.discount * mdp.discount * vv);
    }
  return acc;
}

struct MomentPair {
  double mean = 0.0;
  double var = 0.0;
};

// First two moments of c(h1, f) - c(h2, f) where c(h, f) is the squared TD
// loss of h against the target r + gamma f(s', pi), over the product law
// (s,a) ~ mu, r ~ R(s,a), s' ~ P(s,a). Direct four-deep summation.
inline MomentPair loss_difference_moments(const TabularMdp& mdp, const Policy& pi,
                                          const StateActionDistribution& mu,
                                          const QFunction& h1, const QFunction& h2,
                                          const QFunction& f) {
  const int S = mdp.n_states, A = mdp.n_actions;
  double m1 = 0.0, m2 = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double w = mu.probs[s][a];
      if (w == 0.0) continue;
      for (const auto& atom : mdp.reward_law[s][a])
        for (int s2 = 0; s2 < S; ++s2) {
          double p = w * atom.prob * mdp.transition[s][a][s2];
          if (p == 0.0) continue;
          double nv = 0.0;
          for (int a2 = 0; a2 < A; ++a2)
            nv += pi.action_probs[s2][a2] * f(s2, a2);
          double target = atom.value + mdp.discount * nv;
          double c1 = h1(s, a) - target, c2 = h2(s, a) - target;
          double x = c1 * c1 - c2 * c2;
          m1 += p * x;
          m2 += p * x * x;
        }
    }
  return MomentPair{m1, std::max(0.0, m2 - m1 * m1)};
}

}  // namespace oracle
