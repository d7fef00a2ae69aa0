#pragma once

// Tabular discounted MDP under a fixed target policy: exact representation
// plus the linear-algebraic operations everything else builds on. Reward
// laws are finite-support distributions over [0,1], which keeps every
// expectation and variance downstream exactly summable.
//
// All operations are pure functions of immutable inputs.

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "oped/common.hpp"

namespace oped {

constexpr double kProbTol = 1e-12;

// One support atom of a reward law: value in [0,1] with its probability.
struct RewardAtom {
  double value = 0.0;
  double prob = 0.0;
};

struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  // transition[s][a][s'] = P(s'|s,a)
  std::vector<std::vector<std::vector<double>>> transition;
  // reward_law[s][a] = finite support of R(s,a)
  std::vector<std::vector<std::vector<RewardAtom>>> reward_law;
  double discount = 0.0;

  double mean_reward(int s, int a) const {
    double m = 0.0;
    for (const RewardAtom& at : reward_law[s][a]) m += at.value * at.prob;
    return m;
  }

  double reward_second_moment(int s, int a) const {
    double m = 0.0;
    for (const RewardAtom& at : reward_law[s][a]) m += at.value * at.value * at.prob;
    return m;
  }

  double reward_variance(int s, int a) const {
    double m = mean_reward(s, a);
    double v = reward_second_moment(s, a) - m * m;
    return v > 0.0 ? v : 0.0;
  }

  // Throws validation_error unless every transition row and reward support
  // is a probability distribution, rewards live in [0,1], and discount < 1.
  void validate() const {
    if (n_states <= 0 || n_actions <= 0)
      throw validation_error("mdp: state and action counts must be positive");
    if (!(discount >= 0.0) || !(discount < 1.0))
      throw validation_error("mdp: discount must lie in [0,1)");
    if (static_cast<int>(transition.size()) != n_states ||
        static_cast<int>(reward_law.size()) != n_states)
      throw validation_error("mdp: table sizes disagree with n_states");
    for (int s = 0; s < n_states; ++s) {
      if (static_cast<int>(transition[s].size()) != n_actions ||
          static_cast<int>(reward_law[s].size()) != n_actions)
        throw validation_error("mdp: table sizes disagree with n_actions");
      for (int a = 0; a < n_actions; ++a) {
        if (static_cast<int>(transition[s][a].size()) != n_states)
          throw validation_error("mdp: transition row has wrong length");
        double row = 0.0;
        for (double p : transition[s][a]) {
          if (!(p >= 0.0) || !std::isfinite(p))
            throw validation_error("mdp: negative or non-finite transition probability");
          row += p;
        }
        if (std::abs(row - 1.0) > kProbTol)
          throw validation_error("mdp: transition row does not sum to 1");
        if (reward_law[s][a].empty())
          throw validation_error("mdp: empty reward support");
        double mass = 0.0;
        for (const RewardAtom& at : reward_law[s][a]) {
          if (!(at.value >= 0.0) || !(at.value <= 1.0))
            throw validation_error("mdp: reward value outside [0,1]");
          if (!(at.prob >= 0.0) || !std::isfinite(at.prob))
            throw validation_error("mdp: negative or non-finite reward probability");
          mass += at.prob;
        }
        if (std::abs(mass - 1.0) > kProbTol)
          throw validation_error("mdp: reward support does not sum to 1");
      }
    }
  }
};

struct Policy {
  // action_probs[s][a] = pi(a|s)
  std::vector<std::vector<double>> action_probs;

  void validate(int n_states, int n_actions) const {
    if (static_cast<int>(action_probs.size()) != n_states)
      throw validation_error("policy: wrong number of states");
    for (const auto& row : action_probs) {
      if (static_cast<int>(row.size()) != n_actions)
        throw validation_error("policy: wrong number of actions");
      double mass = 0.0;
      for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw validation_error("policy: negative or non-finite probability");
        mass += p;
      }
      if (std::abs(mass - 1.0) > kProbTol)
        throw validation_error("policy: row does not sum to 1");
    }
  }
};

struct StateActionDistribution {
  // probs[s][a] >= 0, summing to 1 over all pairs
  std::vector<std::vector<double>> probs;

  void validate(int n_states, int n_actions) const {
    if (static_cast<int>(probs.size()) != n_states)
      throw validation_error("distribution: wrong number of states");
    double mass = 0.0;
    for (const auto& row : probs) {
      if (static_cast<int>(row.size()) != n_actions)
        throw validation_error("distribution: wrong number of actions");
      for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw validation_error("distribution: negative or non-finite entry");
        mass += p;
      }
    }
    if (std::abs(mass - 1.0) > kProbTol)
      throw validation_error("distribution: entries do not sum to 1");
  }

  std::uint64_t identity_hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const auto& row : probs)
      h = detail::fnv1a(row.data(), row.size() * sizeof(double), h);
    return h;
  }
};

struct QFunction {
  // values[s][a]
  std::vector<std::vector<double>> values;

  static QFunction zeros(int n_states, int n_actions) {
    QFunction q;
    q.values.assign(n_states, std::vector<double>(n_actions, 0.0));
    return q;
  }

  static QFunction constant(int n_states, int n_actions, double c) {
    QFunction q;
    q.values.assign(n_states, std::vector<double>(n_actions, c));
    return q;
  }

  double operator()(int s, int a) const { return values[s][a]; }
  double& at(int s, int a) { return values[s][a]; }

  int n_states() const { return static_cast<int>(values.size()); }
  int n_actions() const {
    return values.empty() ? 0 : static_cast<int>(values[0].size());
  }

  // pi-average of the row at state s: sum_a pi(a|s) q(s,a).
  double eval_policy(int s, const Policy& pi) const {
    double v = 0.0;
    for (std::size_t a = 0; a < values[s].size(); ++a)
      v += pi.action_probs[s][a] * values[s][a];
    return v;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& row : values)
      for (double v : row) m = std::max(m, std::abs(v));
    return m;
  }

  double sup_dist(const QFunction& o) const {
    double m = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s)
      for (std::size_t a = 0; a < values[s].size(); ++a)
        m = std::max(m, std::abs(values[s][a] - o.values[s][a]));
    return m;
  }

  void validate_finite() const {
    for (const auto& row : values)
      for (double v : row)
        if (!std::isfinite(v)) throw validation_error("q-function: non-finite entry");
  }
};

// One observed transition tuple.
struct Tuple {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
};

namespace detail {

// Flat pair index; the fixed (s,a) -> s*A + a layout is shared by every
// matrix builder in the library.
inline int sa_index(int s, int a, int n_actions) { return s * n_actions + a; }

// Evaluation-operator transition matrix on pairs:
// Ppi[(s,a),(s',a')] = P(s'|s,a) pi(a'|s').
inline Eigen::MatrixXd build_ppi(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.n_states, A = mdp.n_actions, SA = S * A;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(SA, SA);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      for (int s2 = 0; s2 < S; ++s2) {
        double p = mdp.transition[s][a][s2];
        if (p == 0.0) continue;
        for (int a2 = 0; a2 < A; ++a2)
          P(sa_index(s, a, A), sa_index(s2, a2, A)) = p * pi.action_probs[s2][a2];
      }
  return P;
}

inline Eigen::VectorXd flatten(const QFunction& q) {
  const int S = q.n_states(), A = q.n_actions();
  Eigen::VectorXd v(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) v(sa_index(s, a, A)) = q(s, a);
  return v;
}

inline QFunction unflatten(const Eigen::VectorXd& v, int S, int A) {
  QFunction q = QFunction::zeros(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) q.at(s, a) = v(sa_index(s, a, A));
  return q;
}

inline Eigen::VectorXd mean_reward_vector(const TabularMdp& mdp) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Eigen::VectorXd r(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) r(sa_index(s, a, A)) = mdp.mean_reward(s, a);
  return r;
}

}  // namespace detail

// Fixed point of the evaluation operator, from the dense solve
// (I - gamma Ppi) q = rbar. The system is nonsingular for discount < 1.
inline QFunction exact_q(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.n_states, A = mdp.n_actions, SA = S * A;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(SA, SA) -
                      mdp.discount * detail::build_ppi(mdp, pi);
  Eigen::VectorXd r = detail::mean_reward_vector(mdp);
  Eigen::VectorXd q = M.partialPivLu().solve(r);
  double resid = (M * q - r).lpNorm<Eigen::Infinity>();
  if (!(resid <= 1e-10))
    throw invariant_error("exact_q: linear solve residual above 1e-10");
  return detail::unflatten(q, S, A);
}

// (Tf)(s,a) = rbar(s,a) + gamma sum_s' P(s'|s,a) sum_a' pi(a'|s') f(s',a').
inline QFunction bellman_backup(const TabularMdp& mdp, const Policy& pi,
                                const QFunction& f) {
  const int S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> next_value(S);
  for (int s2 = 0; s2 < S; ++s2) next_value[s2] = f.eval_policy(s2, pi);
  QFunction out = QFunction::zeros(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double exp_next = 0.0;
      for (int s2 = 0; s2 < S; ++s2)
        exp_next += mdp.transition[s][a][s2] * next_value[s2];
      out.at(s, a) = mdp.mean_reward(s, a) + mdp.discount * exp_next;
    }
  return out;
}

// f - Tf, elementwise.
inline QFunction bellman_error(const TabularMdp& mdp, const Policy& pi,
                               const QFunction& f) {
  QFunction tf = bellman_backup(mdp, pi, f);
  QFunction out = f;
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) out.at(s, a) -= tf(s, a);
  return out;
}

// f(s,a) - r - gamma f(s',pi) for one observed tuple.
inline double td_error(const QFunction& f, const Tuple& t, const Policy& pi,
                       double gamma) {
  return f(t.s, t.a) - t.r - gamma * f.eval_policy(t.s_next, pi);
}

// Discounted occupancy of the target policy from start state s0, via the
// state-marginal solve d = (1-gamma)(I - gamma Ptilde^T)^{-1} e_{s0} followed
// by d(s,a) = d(s) pi(a|s).
inline StateActionDistribution occupancy(const TabularMdp& mdp, const Policy& pi,
                                         int s0) {
  const int S = mdp.n_states, A = mdp.n_actions;
  if (s0 < 0 || s0 >= S) throw validation_error("occupancy: start state out of range");
  Eigen::MatrixXd Pt = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int s2 = 0; s2 < S; ++s2) {
      double p = 0.0;
      for (int a = 0; a < A; ++a)
        p += pi.action_probs[s][a] * mdp.transition[s][a][s2];
      Pt(s, s2) = p;
    }
  Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(S, S) - mdp.discount * Pt.transpose();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(S);
  e(s0) = 1.0 - mdp.discount;
  Eigen::VectorXd d = M.partialPivLu().solve(e);
  StateActionDistribution out;
  out.probs.assign(S, std::vector<double>(A, 0.0));
  for (int s = 0; s < S; ++s) {
    double ds = d(s);
    if (ds < 0.0) {
      if (ds < -1e-12) throw invariant_error("occupancy: negative state mass");
      ds = 0.0;
    }
    for (int a = 0; a < A; ++a) out.probs[s][a] = ds * pi.action_probs[s][a];
  }
  return out;
}

// Signed prediction error (fstar - f)(s0, pi).
inline double prediction_error(const QFunction& f, const QFunction& fstar,
                               const Policy& pi, int s0) {
  return fstar.eval_policy(s0, pi) - f.eval_policy(s0, pi);
}

}  // namespace oped
