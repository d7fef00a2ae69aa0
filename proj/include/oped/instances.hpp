#pragma once

// Random problem instances for the lemma suite and the scaling studies:
// dense tabular MDPs with finite-support reward laws, behavior and target
// distributions with full support, finite classes with members in [0,1],
// and realizable linear instances whose rewards are manufactured from a
// weight vector so the fixed point lands in the span by construction.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "oped/function_class.hpp"
#include "oped/mdp.hpp"
#include "oped/random.hpp"

namespace oped {

struct ProblemInstance {
  TabularMdp mdp;
  Policy pi;
  StateActionDistribution mu;
  FunctionClass cls = FunctionClass::finite({QFunction::zeros(1, 1)});
  int s0 = 0;
  bool realizable_by_construction = false;
};

inline int rand_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() %
                               static_cast<std::uint64_t>(hi - lo + 1));
}

namespace detail {

inline std::vector<double> random_simplex(Rng& rng, int n) {
  std::vector<double> v(n);
  double tot = 0.0;
  for (double& x : v) {
    x = rng.exponential();
    tot += x;
  }
  for (double& x : v) x /= tot;
  // Exact renormalization so validation tolerances never bite.
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

}  // namespace detail

// Dense transitions, two-atom reward laws with values in [0, reward_cap].
inline TabularMdp random_mdp(Rng& rng, int S, int A, double gamma,
                             double reward_cap = 1.0) {
  TabularMdp mdp;
  mdp.n_states = S;
  mdp.n_actions = A;
  mdp.discount = gamma;
  mdp.transition.assign(S, std::vector<std::vector<double>>(A));
  mdp.reward_law.assign(S, std::vector<std::vector<RewardAtom>>(A));
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      mdp.transition[s][a] = detail::random_simplex(rng, S);
      double v0 = rng.uniform(0.0, reward_cap);
      double v1 = rng.uniform(0.0, reward_cap);
      double p = rng.uniform(0.05, 0.95);
      mdp.reward_law[s][a] = {RewardAtom{v0, p}, RewardAtom{v1, 1.0 - p}};
    }
  mdp.validate();
  return mdp;
}

inline Policy random_policy(Rng& rng, int S, int A) {
  Policy pi;
  pi.action_probs.assign(S, {});
  for (int s = 0; s < S; ++s) pi.action_probs[s] = detail::random_simplex(rng, A);
  pi.validate(S, A);
  return pi;
}

inline StateActionDistribution random_mu(Rng& rng, int S, int A) {
  StateActionDistribution mu;
  std::vector<double> flat = detail::random_simplex(rng, S * A);
  mu.probs.assign(S, std::vector<double>(A));
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) mu.probs[s][a] = flat[s * A + a];
  mu.validate(S, A);
  return mu;
}

inline QFunction random_q(Rng& rng, int S, int A, double lo = 0.0,
                          double hi = 1.0) {
  QFunction f = QFunction::zeros(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) f.values[s][a] = rng.uniform(lo, hi);
  return f;
}

// A full random problem with a finite class of members in [0,1]. Realizable
// instances cap rewards at 0.9 (1 - gamma) so the exact fixed point stays in
// [0,1] and can be inserted as a member.
inline ProblemInstance random_finite_instance(Rng& rng, bool realizable) {
  ProblemInstance inst;
  int S = rand_int(rng, 2, 10);
  int A = rand_int(rng, 2, 4);
  double gamma = rng.unit() < 0.5 ? 0.5 : 0.9;
  double cap = realizable ? 0.9 * (1.0 - gamma) : 1.0;
  inst.mdp = random_mdp(rng, S, A, gamma, cap);
  inst.pi = random_policy(rng, S, A);
  inst.mu = random_mu(rng, S, A);
  inst.s0 = rand_int(rng, 0, S - 1);
  int K = rand_int(rng, 3, 20);
  std::vector<QFunction> members;
  members.reserve(K);
  for (int i = 0; i < K; ++i) members.push_back(random_q(rng, S, A));
  if (realizable) members[0] = exact_q(inst.mdp, inst.pi);
  inst.cls = FunctionClass::finite(members);
  inst.realizable_by_construction = realizable;
  inst.cls.validate(S, A);
  return inst;
}

// A realizable linear instance: features contain the constant column, a
// weight vector is drawn, and Bernoulli reward means are set to the
// residual (I - gamma Ppi) Phi w, affinely rescaled into [0.05, 0.95].
// The rescale stays inside the span because the constant column absorbs
// the shift, so the exact fixed point is Phi w by construction.
inline ProblemInstance random_linear_realizable_instance(Rng& rng,
                                                         int max_extra_dims = 3) {
  ProblemInstance inst;
  int S = rand_int(rng, 3, 8);
  int A = rand_int(rng, 2, 3);
  double gamma = rng.unit() < 0.5 ? 0.5 : 0.9;
  inst.mdp = random_mdp(rng, S, A, gamma);  // rewards replaced below
  inst.pi = random_policy(rng, S, A);
  inst.mu = random_mu(rng, S, A);
  inst.s0 = rand_int(rng, 0, S - 1);

  int extra = rand_int(rng, 0, max_extra_dims);
  int d = 1 + extra;
  const int SA = S * A;
  Eigen::MatrixXd phi(SA, d);
  phi.col(0).setOnes();
  for (int j = 1; j < d; ++j)
    for (int i = 0; i < SA; ++i) phi(i, j) = rng.uniform(-1.0, 1.0);

  Eigen::VectorXd w(d);
  for (int j = 0; j < d; ++j) w(j) = rng.uniform(-1.0, 1.0);

  Eigen::MatrixXd ppi = detail::build_ppi(inst.mdp, inst.pi);
  Eigen::VectorXd v = (phi - gamma * (ppi * phi)) * w;
  double vmin = v.minCoeff(), vmax = v.maxCoeff();
  double span = vmax - vmin;
  double alpha = span > 1e-12 ? 0.9 / span : 1.0;
  double shift = 0.05 - alpha * vmin;
  v = alpha * v + Eigen::VectorXd::Constant(SA, shift);

  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double m = std::clamp(v(detail::sa_index(s, a, A)), 0.0, 1.0);
      inst.mdp.reward_law[s][a] = {RewardAtom{0.0, 1.0 - m}, RewardAtom{1.0, m}};
    }
  inst.mdp.validate();

  LinearClass lc;
  lc.n_states = S;
  lc.n_actions = A;
  lc.dim = d;
  lc.phi = phi;
  inst.cls = FunctionClass::linear(lc);
  inst.cls.validate(S, A);
  inst.realizable_by_construction = true;
  return inst;
}

}  // namespace oped
