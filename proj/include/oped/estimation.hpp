#pragma once

// Estimators driven by a fixed dataset: the empirical squared-TD loss, the
// empirical minimax objective and its minimizer, fitted-Q iteration, and
// the two deviation bounds a report chooses between.
//
// Everything runs off TdSuffStats, so cost scales with the state-action
// grid rather than the tuple count, and population-weighted datasets reuse
// the same code paths.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oped/common.hpp"
#include "oped/dataset.hpp"
#include "oped/function_class.hpp"
#include "oped/mdp.hpp"

namespace oped {

// L_hat(g, f) = (1/n) sum_i (g(s_i,a_i) - r_i - gamma f(s'_i, pi))^2.
inline double empirical_loss(const QFunction& g, const QFunction& f,
                             const Dataset& data, const Policy& pi, double gamma) {
  TdSuffStats st = TdSuffStats::from_dataset(data, g.n_states(), g.n_actions());
  return st.loss(g, policy_values(f, pi), gamma);
}

// M_hat(f) = L_hat(f, f) - min_g L_hat(g, f). Nonnegative up to roundoff
// whenever f belongs to the class.
inline double empirical_minimax(const QFunction& f, const Dataset& data,
                                const FunctionClass& cls, const Policy& pi,
                                double gamma) {
  TdSuffStats st = TdSuffStats::from_dataset(data, f.n_states(), f.n_actions());
  std::vector<double> nv = policy_values(f, pi);
  double own = st.loss(f, nv, gamma);
  QFunction ghat = empirical_projected_backup(cls, f, data, pi, gamma);
  double best = st.loss(ghat, nv, gamma);
  return std::max(0.0, own - best);
}

struct FitResult {
  QFunction estimate;
  double program_value = 0.0;  // M_hat at the estimate
  bool converged = false;      // meaningful for fitted_q only
  int iterations = 0;
  std::vector<double> history;              // per-iteration program values
  std::optional<int> member_index;          // finite classes
  std::optional<Eigen::VectorXd> weights;   // linear classes
  bool degenerate = false;  // linear minimizer set has dimension > 0
};

namespace detail {

// Aggregate matrices for the linear closed form:
//   n M_hat(w) = (M1 w - m0)' Gplus (M1 w - m0)
// with G = sum c phi phi', N = sum_{sa,s'} cnt phi psibar(s')',
// M1 = G - gamma N, m0 = sum (sum_r) phi, and psibar(s') the pi-averaged
// feature row at s'.
struct LinearMinimaxForm {
  Eigen::MatrixXd G, M1;
  Eigen::VectorXd m0;
  Eigen::MatrixXd K;  // whitener with K'K = Gplus
  double total = 0.0;

  double value(const Eigen::VectorXd& w) const {
    return std::max(0.0, (K * (M1 * w - m0)).squaredNorm() / total);
  }
};

inline LinearMinimaxForm linear_minimax_form(const LinearClass& lc,
                                             const TdSuffStats& st,
                                             const Policy& pi, double gamma) {
  const int S = st.n_states, A = st.n_actions, d = lc.dim;
  Eigen::MatrixXd psibar = Eigen::MatrixXd::Zero(S, d);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      psibar.row(s) += pi.action_probs[s][a] * lc.phi.row(sa_index(s, a, A));

  LinearMinimaxForm fm;
  fm.G = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(d, d);
  fm.m0 = Eigen::VectorXd::Zero(d);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      int sa = sa_index(s, a, A);
      double c = st.count[sa];
      if (c == 0.0) continue;
      Eigen::VectorXd ph = lc.phi.row(sa).transpose();
      fm.G += c * ph * ph.transpose();
      fm.m0 += st.sum_r[sa] * ph;
      for (const auto& [s2, cell] : st.succ[sa])
        N += cell.first * ph * psibar.row(s2);
    }
  fm.M1 = fm.G - gamma * N;
  fm.total = st.total;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fm.G);
  Eigen::VectorXd lam = es.eigenvalues();
  double lmax = lam.size() ? lam(lam.size() - 1) : 0.0;
  double cut = std::max(lmax, 0.0) * 1e-13;
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(lam.size());
  for (long i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) inv_sqrt(i) = 1.0 / std::sqrt(lam(i));
  fm.K = inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  return fm;
}

}  // namespace detail

// argmin_f M_hat(f). Finite classes scan members with lowest-index
// tie-breaking; linear classes minimize the closed-form PSD quadratic by
// least squares, returning the min-norm weight vector and flagging a
// positive-dimensional minimizer set.
inline FitResult minimize_minimax(const FunctionClass& cls, const Dataset& data,
                                  const Policy& pi, double gamma) {
  FitResult out;
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    TdSuffStats st = TdSuffStats::from_dataset(
        data, fc.members.front().n_states(), fc.members.front().n_actions());
    int best = 0;
    double best_m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fc.members.size(); ++i) {
      std::vector<double> nv = policy_values(fc.members[i], pi);
      double own = st.loss(fc.members[i], nv, gamma);
      double inner = std::numeric_limits<double>::infinity();
      for (const QFunction& g : fc.members)
        inner = std::min(inner, st.loss(g, nv, gamma));
      double m = std::max(0.0, own - inner);
      if (m < best_m) {
        best_m = m;
        best = static_cast<int>(i);
      }
    }
    out.estimate = fc.members[best];
    out.program_value = best_m;
    out.member_index = best;
  } else {
    const LinearClass& lc = cls.as_linear();
    TdSuffStats st = TdSuffStats::from_dataset(data, lc.n_states, lc.n_actions);
    detail::LinearMinimaxForm fm = detail::linear_minimax_form(lc, st, pi, gamma);
    Eigen::MatrixXd A = fm.K * fm.M1;
    Eigen::VectorXd b = fm.K * fm.m0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd w = cod.solve(b);
    out.estimate = lc.evaluate(w);
    out.program_value = fm.value(w);
    out.weights = w;
    out.degenerate = cod.rank() < lc.dim;
  }
  out.converged = true;
  out.iterations = 1;
  out.history = {out.program_value};
  return out;
}

struct FittedQOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  std::optional<int> start_member;               // finite classes
  std::optional<Eigen::VectorXd> start_weights;  // linear classes
};

// Fitted-Q iteration: f_{k+1} = argmin_g L_hat(g, f_k). Finite classes walk
// member indices and stop on a revisit (fixed point if immediate, a cycle
// otherwise); linear classes iterate weights until the sup-norm update drops
// below tol or the iterate blows up. Non-convergence is a result, not an
// error: converged = false with the history intact.
inline FitResult fitted_q(const FunctionClass& cls, const Dataset& data,
                          const Policy& pi, double gamma,
                          const FittedQOptions& opt = {}) {
  if (opt.max_iter < 1) throw validation_error("fitted_q: max_iter must be >= 1");
  if (!(opt.tol > 0.0)) throw validation_error("fitted_q: tol must be positive");
  FitResult out;
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    int cur;
    if (opt.start_member) {
      cur = *opt.start_member;
      if (cur < 0 || cur >= static_cast<int>(fc.members.size()))
        throw validation_error("fitted_q: start member out of range");
    } else {
      // Smallest sup norm, lowest index on ties: a deterministic cold start.
      cur = 0;
      double best = fc.members[0].max_abs();
      for (std::size_t i = 1; i < fc.members.size(); ++i)
        if (fc.members[i].max_abs() < best) {
          best = fc.members[i].max_abs();
          cur = static_cast<int>(i);
        }
    }
    TdSuffStats st = TdSuffStats::from_dataset(
        data, fc.members.front().n_states(), fc.members.front().n_actions());
    auto m_hat = [&](int i) {
      std::vector<double> nv = policy_values(fc.members[i], pi);
      double own = st.loss(fc.members[i], nv, gamma);
      double inner = std::numeric_limits<double>::infinity();
      for (const QFunction& g : fc.members)
        inner = std::min(inner, st.loss(g, nv, gamma));
      return std::max(0.0, own - inner);
    };
    std::set<int> seen;
    for (int k = 0; k < opt.max_iter; ++k) {
      seen.insert(cur);
      std::vector<double> nv = policy_values(fc.members[cur], pi);
      int nxt = 0;
      double best_l = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < fc.members.size(); ++i) {
        double l = st.loss(fc.members[i], nv, gamma);
        if (l < best_l) {
          best_l = l;
          nxt = static_cast<int>(i);
        }
      }
      out.iterations = k + 1;
      out.history.push_back(m_hat(nxt));
      if (nxt == cur) {
        out.converged = true;
        break;
      }
      bool cycle = seen.count(nxt) > 0;
      cur = nxt;
      if (cycle) break;  // closed a cycle that is not a fixed point
    }
    out.estimate = fc.members[cur];
    out.member_index = cur;
    out.program_value = out.history.empty() ? m_hat(cur) : out.history.back();
  } else {
    const LinearClass& lc = cls.as_linear();
    Eigen::VectorXd w = opt.start_weights ? *opt.start_weights
                                          : Eigen::VectorXd::Zero(lc.dim);
    if (w.size() != lc.dim)
      throw validation_error("fitted_q: start weights have wrong dimension");
    TdSuffStats st = TdSuffStats::from_dataset(data, lc.n_states, lc.n_actions);
    detail::LinearMinimaxForm fm = detail::linear_minimax_form(lc, st, pi, gamma);
    QFunction f = lc.evaluate(w);
    for (int k = 0; k < opt.max_iter; ++k) {
      // One update solves G w' = m0 + gamma N w = G w - (M1 w - m0).
      Eigen::VectorXd rhs = fm.G * w - (fm.M1 * w - fm.m0);
      Eigen::VectorXd wn = detail::psd_min_norm_solve(fm.G, rhs);
      QFunction fn = lc.evaluate(wn);
      out.iterations = k + 1;
      out.history.push_back(fm.value(wn));
      double gap = fn.sup_dist(f);
      w = wn;
      f = fn;
      if (gap <= opt.tol) {
        out.converged = true;
        break;
      }
      if (f.max_abs() > 1e8) break;  // diverging update, stop early
    }
    out.estimate = f;
    out.weights = w;
    out.program_value = out.history.empty() ? fm.value(w) : out.history.back();
  }
  return out;
}

struct BoundReport {
  ExtReal new_bound;
  ExtReal classic_bound;
  std::string tighter;  // "new" or "classic"
};

// (1/(1-gamma)) (1/(1-beta)) sqrt(C ln(card_F/delta) / n). Collapses to the
// sentinel when beta reaches 1 or C is already infinite.
inline ExtReal bound_finite(std::size_t card_f, double delta, std::size_t n,
                            double gamma, double beta_val, ExtReal conc) {
  if (n < 1 || card_f < 1)
    throw validation_error("bound_finite: n and card_f must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw validation_error("bound_finite: delta must lie in (0,1)");
  if (!conc.finite_value() || beta_val >= 1.0) return ExtReal::inf();
  double log_term = std::log(static_cast<double>(card_f) / delta);
  double val = std::sqrt(conc.value * log_term / static_cast<double>(n)) /
               ((1.0 - gamma) * (1.0 - beta_val));
  return ExtReal::finite(val);
}

// (1/(1-gamma)) sqrt(C ln(card_F/delta) / n) + (sqrt(C)/(1-gamma)) I_F.
inline ExtReal bound_classic(std::size_t card_f, double delta, std::size_t n,
                             double gamma, ExtReal conc, ExtReal inherent_be) {
  if (n < 1 || card_f < 1)
    throw validation_error("bound_classic: n and card_f must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw validation_error("bound_classic: delta must lie in (0,1)");
  if (!conc.finite_value() || !inherent_be.finite_value()) return ExtReal::inf();
  double log_term = std::log(static_cast<double>(card_f) / delta);
  double stat = std::sqrt(conc.value * log_term / static_cast<double>(n)) /
                (1.0 - gamma);
  double approx = std::sqrt(conc.value) * inherent_be.value / (1.0 - gamma);
  return ExtReal::finite(stat + approx);
}

inline BoundReport make_bound_report(std::size_t card_f, double delta,
                                     std::size_t n, double gamma, double beta_val,
                                     ExtReal conc, ExtReal inherent_be) {
  BoundReport out;
  out.new_bound = bound_finite(card_f, delta, n, gamma, beta_val, conc);
  out.classic_bound = bound_classic(card_f, delta, n, gamma, conc, inherent_be);
  out.tighter = out.new_bound <= out.classic_bound ? "new" : "classic";
  return out;
}

}  // namespace oped
