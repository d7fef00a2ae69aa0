#pragma once

// Predictor classes over state-action tables: an explicit finite set of
// Q-functions, or the linear span of a feature map. Both come with
// mu-weighted seminorms and exact / empirical projection operators.
//
// Conventions that matter downstream:
//  - finite argmins break ties toward the lowest member index;
//  - linear projections under a degenerate mu return the minimum-norm
//    weight vector (the seminorm kernel is quotiented, not an error);
//  - linear classes are never sup-norm-clipped; the sup <= 1 requirement
//    applies to finite members only.

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "oped/common.hpp"
#include "oped/dataset.hpp"
#include "oped/mdp.hpp"

namespace oped {

struct FiniteClass {
  std::vector<QFunction> members;
};

struct LinearClass {
  int n_states = 0;
  int n_actions = 0;
  int dim = 0;
  Eigen::MatrixXd phi;  // (S*A) x dim, row layout detail::sa_index
  std::optional<double> weight_radius;  // declared ball for sup-type queries

  QFunction evaluate(const Eigen::VectorXd& w) const {
    QFunction q = QFunction::zeros(n_states, n_actions);
    Eigen::VectorXd v = phi * w;
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        q.at(s, a) = v(detail::sa_index(s, a, n_actions));
    return q;
  }
};

struct FunctionClass {
  std::variant<FiniteClass, LinearClass> v;

  static FunctionClass finite(std::vector<QFunction> members) {
    return FunctionClass{FiniteClass{std::move(members)}};
  }
  static FunctionClass linear(LinearClass lc) { return FunctionClass{std::move(lc)}; }

  bool is_finite() const { return std::holds_alternative<FiniteClass>(v); }
  const FiniteClass& as_finite() const { return std::get<FiniteClass>(v); }
  const LinearClass& as_linear() const { return std::get<LinearClass>(v); }

  void validate(int n_states, int n_actions) const {
    if (is_finite()) {
      const FiniteClass& fc = as_finite();
      if (fc.members.empty())
        throw validation_error("class: finite class must be nonempty");
      for (const QFunction& m : fc.members) {
        if (m.n_states() != n_states || m.n_actions() != n_actions)
          throw validation_error("class: member has wrong dimensions");
        m.validate_finite();
        if (m.max_abs() > 1.0 + 1e-12)
          throw validation_error("class: finite member exceeds sup-norm 1");
      }
    } else {
      const LinearClass& lc = as_linear();
      if (lc.dim < 1) throw validation_error("class: feature dimension must be >= 1");
      if (lc.n_states != n_states || lc.n_actions != n_actions ||
          lc.phi.rows() != static_cast<long>(n_states) * n_actions ||
          lc.phi.cols() != lc.dim)
        throw validation_error("class: feature matrix has wrong dimensions");
      if (!lc.phi.allFinite())
        throw validation_error("class: feature matrix has non-finite entries");
      if (lc.weight_radius && !(*lc.weight_radius > 0.0))
        throw validation_error("class: weight radius must be positive");
    }
  }

  // Numerical rank of the feature matrix; member count for finite classes.
  int rank() const {
    if (is_finite()) return static_cast<int>(as_finite().members.size());
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(as_linear().phi);
    return static_cast<int>(cod.rank());
  }
};

struct RealizabilityCheck {
  bool is_realizable = false;
  double witness_distance = 0.0;
};

// Seminorm induced by a nonnegative weight table: sqrt(sum w(s,a) f(s,a)^2).
inline double mu_norm(const QFunction& f, const StateActionDistribution& w) {
  double acc = 0.0;
  for (int s = 0; s < f.n_states(); ++s)
    for (int a = 0; a < f.n_actions(); ++a) {
      double x = f(s, a);
      acc += w.probs[s][a] * x * x;
    }
  return std::sqrt(acc);
}

inline double mu_dist(const QFunction& f, const QFunction& g,
                      const StateActionDistribution& w) {
  double acc = 0.0;
  for (int s = 0; s < f.n_states(); ++s)
    for (int a = 0; a < f.n_actions(); ++a) {
      double x = f(s, a) - g(s, a);
      acc += w.probs[s][a] * x * x;
    }
  return std::sqrt(acc);
}

namespace detail {

// Minimum-norm weighted least-squares weights for min_w ||Phi w - target||_mu.
inline Eigen::VectorXd project_weights(const LinearClass& lc,
                                       const Eigen::VectorXd& target,
                                       const StateActionDistribution& mu) {
  const int SA = lc.n_states * lc.n_actions;
  Eigen::VectorXd sw(SA);
  for (int s = 0; s < lc.n_states; ++s)
    for (int a = 0; a < lc.n_actions; ++a) {
      int sa = sa_index(s, a, lc.n_actions);
      sw(sa) = std::sqrt(mu.probs[s][a]);
    }
  Eigen::MatrixXd W = sw.asDiagonal() * lc.phi;
  Eigen::VectorXd t = sw.asDiagonal() * target;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(W);
  return cod.solve(t);
}

// Index of the member minimizing the mu-distance to target; lowest index wins ties.
inline int argmin_member(const FiniteClass& fc, const QFunction& target,
                         const StateActionDistribution& mu) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fc.members.size(); ++i) {
    double d = mu_dist(fc.members[i], target, mu);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Minimum-norm solve of the PSD system G w = rhs with rhs in range(G).
inline Eigen::VectorXd psd_min_norm_solve(const Eigen::MatrixXd& G,
                                          const Eigen::VectorXd& rhs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const Eigen::VectorXd& lam = es.eigenvalues();
  double lmax = lam.size() ? lam(lam.size() - 1) : 0.0;
  double cut = std::max(lmax, 0.0) * 1e-13;
  Eigen::VectorXd y = es.eigenvectors().transpose() * rhs;
  for (long i = 0; i < y.size(); ++i) y(i) = lam(i) > cut ? y(i) / lam(i) : 0.0;
  return es.eigenvectors() * y;
}

}  // namespace detail

// argmin_{g in F} ||g - target||_mu.
inline QFunction project(const FunctionClass& cls, const QFunction& target,
                         const StateActionDistribution& mu) {
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    if (fc.members.empty()) throw validation_error("project: empty finite class");
    return fc.members[detail::argmin_member(fc, target, mu)];
  }
  const LinearClass& lc = cls.as_linear();
  Eigen::VectorXd w =
      detail::project_weights(lc, detail::flatten(target), mu);
  return lc.evaluate(w);
}

// g_f: the mu-projection of the exact backup Tf onto the class.
inline QFunction projected_backup(const FunctionClass& cls, const TabularMdp& mdp,
                                  const Policy& pi, const QFunction& f,
                                  const StateActionDistribution& mu) {
  return project(cls, bellman_backup(mdp, pi, f), mu);
}

// ghat_f: argmin_{g in F} (1/n) sum (g(s,a) - r - gamma f(s',pi))^2.
inline QFunction empirical_projected_backup(const FunctionClass& cls,
                                            const QFunction& f,
                                            const Dataset& data, const Policy& pi,
                                            double gamma) {
  if (!data.provenance.population && data.tuples.empty())
    throw validation_error("empirical_projected_backup: empty dataset");
  const int S = f.n_states(), A = f.n_actions();
  TdSuffStats st = TdSuffStats::from_dataset(data, S, A);
  std::vector<double> nv = policy_values(f, pi);
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    int best = 0;
    double best_l = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fc.members.size(); ++i) {
      double l = st.loss(fc.members[i], nv, gamma);
      if (l < best_l) {
        best_l = l;
        best = static_cast<int>(i);
      }
    }
    return fc.members[best];
  }
  const LinearClass& lc = cls.as_linear();
  // Normal equations from the aggregates: G v = sum_sa phi_sa * a1_sa where
  // a1 is the per-pair sum of targets r + gamma f(s',pi).
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lc.dim, lc.dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(lc.dim);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      int sa = detail::sa_index(s, a, A);
      double c = st.count[sa];
      if (c == 0.0) continue;
      Eigen::VectorXd ph = lc.phi.row(sa).transpose();
      G += c * ph * ph.transpose();
      double stv = 0.0;
      for (const auto& [s2, cell] : st.succ[sa]) stv += cell.first * nv[s2];
      double a1 = st.sum_r[sa] + gamma * stv;
      rhs += a1 * ph;
    }
  Eigen::VectorXd w = detail::psd_min_norm_solve(G, rhs);
  return lc.evaluate(w);
}

// Distance from the true fixed point to the class under the mu-seminorm.
inline RealizabilityCheck check_realizability(const FunctionClass& cls,
                                              const TabularMdp& mdp,
                                              const Policy& pi,
                                              const StateActionDistribution& mu,
                                              double tol = 1e-9) {
  QFunction fstar = exact_q(mdp, pi);
  double dist;
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    dist = std::numeric_limits<double>::infinity();
    for (const QFunction& m : fc.members) dist = std::min(dist, mu_dist(m, fstar, mu));
  } else {
    QFunction pr = project(cls, fstar, mu);
    dist = mu_dist(pr, fstar, mu);
  }
  return RealizabilityCheck{dist <= tol, dist};
}

}  // namespace oped
