#pragma once

// Structural constants of an evaluation problem: the incompleteness factor
// beta, the incompleteness function I(r), inherent Bellman error, the
// concentrability coefficient and its class-free upper bounds, the
// off-policy cost coefficient, the population minimax loss, and the exact
// first and second moments of the X / Y cost processes.
//
// Finite classes go through exhaustive scans. Linear classes reduce to
// dense eigenproblems: ratios of quadratic forms become generalized
// Rayleigh quotients on an affine homogenization (weights z = (w, t) with
// the reward column folded in), and the incompleteness function becomes an
// ellipsoid-constrained norm maximization solved by a secular equation.
// The two routes never share intermediate results, so they can check each
// other in tests.
//
// Every +infinity outcome is an explicit sentinel, never a floating-point
// infinity inside arithmetic.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "oped/common.hpp"
#include "oped/function_class.hpp"
#include "oped/linalg.hpp"
#include "oped/mdp.hpp"

namespace oped {

struct CurvePoint {
  double r = 0.0;
  double value = 0.0;
  bool empty = false;  // no class member satisfies the radius constraint
};

struct ConcentrabilityBounds {
  ExtReal chi_sq;     // E_mu[(dpi/mu)^2]-style moment bound
  ExtReal sup_ratio;  // sup over pairs of dpi/mu
};

struct DiagnosticsReport {
  double beta = 0.0;
  ExtReal concentrability;
  ExtReal opc;
  ExtReal inherent_be;
  std::vector<CurvePoint> curve;
  ConcentrabilityBounds bounds;
  bool realizable = false;
};

struct ProcessMoments {
  double px = 0.0;     // E[c(f,f) - c(g_f,f)], equals the population minimax loss
  double var_x = 0.0;
  double py = 0.0;     // E[c(fstar,fstar) - c(g,fstar)], equals -||g - T fstar||_mu^2
  double var_y = 0.0;
  bool y_flagged = false;  // class is not realizable; Y uses the exact fixed point
};

namespace detail {

// Matrices shared by every linear-class diagnostic, in mu-scaled coordinates
// (rows premultiplied by sqrt(mu) so plain 2-norms realize the seminorm).
//
//   Bs = sqrt(mu) (I - gamma Ppi) Phi     ts = sqrt(mu) rbar
//   Gs = Proj_res( gamma sqrt(mu) Ppi Phi )  cs = Proj_res( sqrt(mu) rbar )
//
// where Proj_res removes the component inside the scaled feature span, so
// ||Gs w + cs|| is the mu-distance from T(Phi w) to the span.
struct LinearBundle {
  int S = 0, A = 0, d = 0;
  Eigen::MatrixXd phi;        // unscaled features
  Eigen::MatrixXd b_mat;      // (I - gamma Ppi) Phi, unscaled
  Eigen::VectorXd rbar;       // unscaled mean rewards
  Eigen::MatrixXd bs, gs;     // scaled B and projected-backup residual map
  Eigen::VectorXd ts, cs;
  Eigen::MatrixXd g_unscaled; // gamma (I - Proj) Ppi Phi in unscaled rows
  Eigen::VectorXd c_unscaled;
};

inline LinearBundle make_linear_bundle(const LinearClass& lc, const TabularMdp& mdp,
                                       const Policy& pi,
                                       const StateActionDistribution& mu) {
  LinearBundle lb;
  lb.S = mdp.n_states;
  lb.A = mdp.n_actions;
  lb.d = lc.dim;
  const int SA = lb.S * lb.A;
  lb.phi = lc.phi;
  Eigen::MatrixXd ppi = build_ppi(mdp, pi);
  lb.rbar = mean_reward_vector(mdp);
  lb.b_mat = lc.phi - mdp.discount * (ppi * lc.phi);

  Eigen::VectorXd sw(SA);
  for (int s = 0; s < lb.S; ++s)
    for (int a = 0; a < lb.A; ++a)
      sw(sa_index(s, a, lb.A)) = std::sqrt(mu.probs[s][a]);

  Eigen::MatrixXd phis = sw.asDiagonal() * lc.phi;
  lb.bs = sw.asDiagonal() * lb.b_mat;
  lb.ts = sw.cwiseProduct(lb.rbar);

  // Orthonormal basis of the scaled feature span for the residual projector.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phis, Eigen::ComputeThinU);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  long rank = 0;
  for (long i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > smax * 1e-13) ++rank;
  Eigen::MatrixXd U = svd.matrixU().leftCols(rank);

  auto residual = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    if (rank == 0) return v;
    return v - U * (U.transpose() * v);
  };
  Eigen::MatrixXd backup_s = mdp.discount * (sw.asDiagonal() * (ppi * lc.phi));
  lb.gs = residual(backup_s);
  lb.cs = residual(lb.ts);

  // Unscaled residual images, for forms weighted by a different distribution.
  Eigen::VectorXd inv_sw(SA);
  for (int i = 0; i < SA; ++i) inv_sw(i) = sw(i) > 0.0 ? 1.0 / sw(i) : 0.0;
  lb.g_unscaled = inv_sw.asDiagonal() * lb.gs;
  lb.c_unscaled = inv_sw.asDiagonal() * lb.cs;
  return lb;
}

// Affine homogenization [M | v] acting on z = (w, t).
inline Eigen::MatrixXd hstack(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  Eigen::MatrixXd out(M.rows(), M.cols() + 1);
  out.leftCols(M.cols()) = M;
  out.col(M.cols()) = v;
  return out;
}

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& M) {
  return M.transpose() * M;
}

inline Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& M,
                                     const StateActionDistribution& w, int A) {
  Eigen::VectorXd dw(M.rows());
  for (int s = 0; s < static_cast<int>(w.probs.size()); ++s)
    for (int a = 0; a < A; ++a) dw(sa_index(s, a, A)) = w.probs[s][a];
  return M.transpose() * dw.asDiagonal() * M;
}

// Per-member Bellman error norm and projection distance, the raw material
// of every finite-class diagnostic.
struct FiniteProfile {
  std::vector<double> be;     // ||f - Tf||_mu
  std::vector<double> dist;   // min_g ||g - Tf||_mu
  double max_be = 0.0;
};

inline FiniteProfile finite_profile(const FiniteClass& fc, const TabularMdp& mdp,
                                    const Policy& pi,
                                    const StateActionDistribution& mu) {
  FiniteProfile pr;
  pr.be.reserve(fc.members.size());
  pr.dist.reserve(fc.members.size());
  for (const QFunction& f : fc.members) {
    QFunction tf = bellman_backup(mdp, pi, f);
    double be = mu_dist(f, tf, mu);
    double dist = std::numeric_limits<double>::infinity();
    for (const QFunction& g : fc.members) dist = std::min(dist, mu_dist(g, tf, mu));
    pr.be.push_back(be);
    pr.dist.push_back(dist);
    pr.max_be = std::max(pr.max_be, be);
  }
  return pr;
}

}  // namespace detail

// M(f) = ||f - Tf||_mu^2 - min_g ||g - Tf||_mu^2.
inline double population_minimax_loss(const FunctionClass& cls, const TabularMdp& mdp,
                                      const Policy& pi,
                                      const StateActionDistribution& mu,
                                      const QFunction& f) {
  QFunction tf = bellman_backup(mdp, pi, f);
  double be = mu_dist(f, tf, mu);
  QFunction g = project(cls, tf, mu);
  double dist = mu_dist(g, tf, mu);
  return be * be - dist * dist;
}

// sup_f inf_g ||g - Tf||_mu. Finite classes scan; linear classes need a
// declared weight radius unless the projected backup map is exactly closed.
inline double inherent_bellman_error(const FunctionClass& cls, const TabularMdp& mdp,
                                     const Policy& pi,
                                     const StateActionDistribution& mu) {
  if (cls.is_finite()) {
    detail::FiniteProfile pr = detail::finite_profile(cls.as_finite(), mdp, pi, mu);
    double best = 0.0;
    for (double d : pr.dist) best = std::max(best, d);
    return best;
  }
  const LinearClass& lc = cls.as_linear();
  detail::LinearBundle lb = detail::make_linear_bundle(lc, mdp, pi, mu);
  if (lc.weight_radius) {
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(lb.d, lb.d);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(lb.d);
    linalg::BallMaxResult bm =
        linalg::ball_max(lb.gs, lb.cs, eye, zero, *lc.weight_radius);
    return std::sqrt(std::max(0.0, bm.value));
  }
  double scale = std::max(1.0, lb.bs.norm());
  if (lb.gs.norm() <= 1e-12 * scale) return lb.cs.norm();
  throw std::domain_error(
      "inherent_bellman_error: sup not finite for an unbounded linear class; "
      "declare a weight radius");
}

// Default evaluation grid: zero plus 20 log-spaced radii up to the largest
// member Bellman error (finite) or a span-derived scale (linear).
inline std::vector<double> default_r_grid(const FunctionClass& cls,
                                          const TabularMdp& mdp, const Policy& pi,
                                          const StateActionDistribution& mu) {
  double rmax = 0.0;
  if (cls.is_finite()) {
    detail::FiniteProfile pr = detail::finite_profile(cls.as_finite(), mdp, pi, mu);
    rmax = pr.max_be;
  } else {
    detail::LinearBundle lb =
        detail::make_linear_bundle(cls.as_linear(), mdp, pi, mu);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lb.bs);
    double min_be = (lb.bs * cod.solve(lb.ts) - lb.ts).norm();
    rmax = std::max(1.0, 10.0 * min_be);
  }
  if (rmax <= 0.0) rmax = 1.0;
  std::vector<double> grid;
  grid.push_back(0.0);
  const int pts = 20;
  for (int j = 0; j < pts; ++j)
    grid.push_back(rmax * std::pow(10.0, -3.0 * (1.0 - static_cast<double>(j) /
                                                           (pts - 1))));
  return grid;
}

// I(r) = sup over {f in F : ||f - Tf||_mu <= r} of inf_g ||g - Tf||_mu.
// Grid points whose constraint set is empty are marked, never reported as 0.
inline std::vector<CurvePoint> incompleteness_function(
    const FunctionClass& cls, const TabularMdp& mdp, const Policy& pi,
    const StateActionDistribution& mu, const std::vector<double>& r_grid) {
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (r_grid[i] < r_grid[i - 1])
      throw validation_error("incompleteness_function: grid must be ascending");
  if (!r_grid.empty() && r_grid.front() < 0.0)
    throw validation_error("incompleteness_function: radii must be nonnegative");

  std::vector<CurvePoint> out;
  out.reserve(r_grid.size());
  if (cls.is_finite()) {
    detail::FiniteProfile pr = detail::finite_profile(cls.as_finite(), mdp, pi, mu);
    double eps = 1e-12 * std::max(1.0, pr.max_be);
    for (double r : r_grid) {
      CurvePoint cp;
      cp.r = r;
      cp.empty = true;
      for (std::size_t i = 0; i < pr.be.size(); ++i) {
        if (pr.be[i] <= r + eps) {
          if (cp.empty || pr.dist[i] > cp.value) cp.value = pr.dist[i];
          cp.empty = false;
        }
      }
      if (cp.empty) cp.value = 0.0;
      out.push_back(cp);
    }
    return out;
  }
  detail::LinearBundle lb = detail::make_linear_bundle(cls.as_linear(), mdp, pi, mu);
  for (double r : r_grid) {
    linalg::BallMaxResult bm = linalg::ball_max(lb.gs, lb.cs, lb.bs, lb.ts, r);
    CurvePoint cp;
    cp.r = r;
    cp.empty = bm.empty;
    cp.value = bm.empty ? 0.0 : std::sqrt(std::max(0.0, bm.value));
    out.push_back(cp);
  }
  return out;
}

// beta = sup over members with nonzero Bellman error of
// (inf_g ||g - Tf||_mu) / ||f - Tf||_mu, clamped to [0,1]. A class whose
// members all have zero Bellman error gets beta = 0. Linear classes solve
// the affine-homogenized generalized eigenproblem; denominator-null
// directions that still move the numerator pin beta at 1.
inline double beta(const FunctionClass& cls, const TabularMdp& mdp, const Policy& pi,
                   const StateActionDistribution& mu) {
  if (cls.is_finite()) {
    detail::FiniteProfile pr = detail::finite_profile(cls.as_finite(), mdp, pi, mu);
    double tol = 1e-12 * std::max(1.0, pr.max_be);
    double best = 0.0;
    for (std::size_t i = 0; i < pr.be.size(); ++i)
      if (pr.be[i] > tol) best = std::max(best, pr.dist[i] / pr.be[i]);
    return std::clamp(best, 0.0, 1.0);
  }
  detail::LinearBundle lb = detail::make_linear_bundle(cls.as_linear(), mdp, pi, mu);
  Eigen::MatrixXd num = detail::hstack(lb.gs, lb.cs);
  Eigen::MatrixXd den = detail::hstack(lb.bs, -lb.ts);
  linalg::RayleighResult rr =
      linalg::max_rayleigh(detail::gram(num), detail::gram(den));
  if (rr.degenerate) return 0.0;
  if (rr.null_numerator) return 1.0;
  return std::clamp(std::sqrt(std::max(0.0, rr.max_ratio)), 0.0, 1.0);
}

// C = sup over members with nonzero mu-Bellman error of
// ||f - Tf||_dpi^2 / ||f - Tf||_mu^2. Members invisible to mu but visible
// to dpi force the +infinity sentinel.
inline ExtReal concentrability(const FunctionClass& cls, const TabularMdp& mdp,
                               const Policy& pi, const StateActionDistribution& mu,
                               int s0) {
  StateActionDistribution dpi = occupancy(mdp, pi, s0);
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    double scale = 0.0;
    std::vector<double> bmu, bpi;
    for (const QFunction& f : fc.members) {
      QFunction tf = bellman_backup(mdp, pi, f);
      bmu.push_back(mu_dist(f, tf, mu));
      bpi.push_back(mu_dist(f, tf, dpi));
      scale = std::max({scale, bmu.back(), bpi.back()});
    }
    double tol = 1e-12 * std::max(1.0, scale);
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < bmu.size(); ++i) {
      if (bmu[i] <= tol) {
        if (bpi[i] > tol) return ExtReal::inf();
        continue;
      }
      any = true;
      best = std::max(best, (bpi[i] * bpi[i]) / (bmu[i] * bmu[i]));
    }
    return ExtReal::finite(any ? best : 0.0);
  }
  detail::LinearBundle lb = detail::make_linear_bundle(cls.as_linear(), mdp, pi, mu);
  Eigen::MatrixXd H = detail::hstack(lb.b_mat, -lb.rbar);
  Eigen::MatrixXd qa = detail::weighted_gram(H, dpi, lb.A);
  Eigen::MatrixXd qb = detail::weighted_gram(H, mu, lb.A);
  linalg::RayleighResult rr = linalg::max_rayleigh(qa, qb);
  if (rr.degenerate) return ExtReal::finite(0.0);
  if (rr.null_numerator) return ExtReal::inf();
  return ExtReal::finite(rr.max_ratio);
}

// Class-free bounds sandwiching the concentrability coefficient:
// the second-moment bound E_mu[(dpi/mu)^2] and the sup ratio, both over the
// support of mu. Occupancy mass outside that support forces the sentinel.
inline ConcentrabilityBounds concentrability_upper_bounds(
    const StateActionDistribution& mu, const StateActionDistribution& dpi) {
  double chi = 0.0, sup = 0.0;
  bool inf = false;
  for (std::size_t s = 0; s < mu.probs.size(); ++s)
    for (std::size_t a = 0; a < mu.probs[s].size(); ++a) {
      double m = mu.probs[s][a];
      double d = dpi.probs[s][a];
      if (m <= 0.0) {
        if (d > 1e-15) inf = true;
        continue;
      }
      double ratio = d / m;
      chi += d * ratio;
      sup = std::max(sup, ratio);
    }
  ConcentrabilityBounds out;
  out.chi_sq = inf ? ExtReal::inf() : ExtReal::finite(chi);
  out.sup_ratio = inf ? ExtReal::inf() : ExtReal::finite(sup);
  return out;
}

// C* = sup over members with M(f) > 0 of E(f)^2 / M(f). Members with both
// M and E at zero (the fixed point) are excluded; M = 0 with E != 0 is the
// beta = 1 pathology and forces the sentinel.
inline ExtReal opc(const FunctionClass& cls, const TabularMdp& mdp, const Policy& pi,
                   const StateActionDistribution& mu, int s0) {
  QFunction fstar = exact_q(mdp, pi);
  if (cls.is_finite()) {
    const FiniteClass& fc = cls.as_finite();
    double tol_m = 1e-12;
    double tol_e = 1e-9 * std::max(1.0, fstar.max_abs());
    double best = 0.0;
    bool any = false;
    for (const QFunction& f : fc.members) {
      double m = population_minimax_loss(cls, mdp, pi, mu, f);
      double e = prediction_error(f, fstar, pi, s0);
      if (m <= tol_m) {
        if (std::abs(e) > tol_e) return ExtReal::inf();
        continue;
      }
      any = true;
      best = std::max(best, e * e / m);
    }
    return ExtReal::finite(any ? best : 0.0);
  }
  const LinearClass& lc = cls.as_linear();
  detail::LinearBundle lb = detail::make_linear_bundle(lc, mdp, pi, mu);
  // E(w) = e0 - p'w with p the pi-averaged feature row at s0.
  Eigen::VectorXd u(lb.d + 1);
  for (int j = 0; j < lb.d; ++j) {
    double pj = 0.0;
    for (int a = 0; a < lb.A; ++a)
      pj += pi.action_probs[s0][a] * lc.phi(detail::sa_index(s0, a, lb.A), j);
    u(j) = -pj;
  }
  u(lb.d) = fstar.eval_policy(s0, pi);
  Eigen::MatrixXd qn = u * u.transpose();
  Eigen::MatrixXd qm = detail::gram(detail::hstack(lb.bs, -lb.ts)) -
                       detail::gram(detail::hstack(lb.gs, lb.cs));
  linalg::RayleighResult rr = linalg::max_rayleigh(qn, qm);
  if (rr.degenerate) return ExtReal::finite(0.0);
  if (rr.null_numerator) return ExtReal::inf();
  return ExtReal::finite(rr.max_ratio);
}

// sigma^2(f) = E_mu[ Var_R(s,a) + gamma^2 Var_{s'}( f(s',pi) ) ]: the
// variance of the empirical backup, exact from the finite laws.
inline double sigma_sq(const TabularMdp& mdp, const Policy& pi,
                       const StateActionDistribution& mu, const QFunction& f) {
  const int S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> nv(S);
  for (int s = 0; s < S; ++s) nv[s] = f.eval_policy(s, pi);
  double acc = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double w = mu.probs[s][a];
      if (w == 0.0) continue;
      double m1 = 0.0, m2 = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        double p = mdp.transition[s][a][s2];
        m1 += p * nv[s2];
        m2 += p * nv[s2] * nv[s2];
      }
      double var_next = std::max(0.0, m2 - m1 * m1);
      acc += w * (mdp.reward_variance(s, a) +
                  mdp.discount * mdp.discount * var_next);
    }
  return acc;
}

// Exact moments of the cost processes for one function: X handles fg as a
// candidate f (against its projected backup), Y handles fg as a competitor g
// (against the exact fixed point). Summation runs over the full law of
// (s, a, r, s'), exploiting that r and s' are independent given (s, a).
inline ProcessMoments exact_process_moments(const FunctionClass& cls,
                                            const TabularMdp& mdp, const Policy& pi,
                                            const StateActionDistribution& mu,
                                            const QFunction& fg) {
  const int S = mdp.n_states, A = mdp.n_actions;
  QFunction fstar = exact_q(mdp, pi);
  QFunction gf = projected_backup(cls, mdp, pi, fg, mu);

  std::vector<double> nv_fg(S), nv_star(S);
  for (int s = 0; s < S; ++s) {
    nv_fg[s] = fg.eval_policy(s, pi);
    nv_star[s] = fstar.eval_policy(s, pi);
  }
  double gamma = mdp.discount;

  double ex = 0.0, ex2 = 0.0, ey = 0.0, ey2 = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double w = mu.probs[s][a];
      if (w == 0.0) continue;
      for (const RewardAtom& at : mdp.reward_law[s][a])
        for (int s2 = 0; s2 < S; ++s2) {
          double p = at.prob * mdp.transition[s][a][s2];
          if (p == 0.0) continue;
          double backup_fg = at.value + gamma * nv_fg[s2];
          double backup_star = at.value + gamma * nv_star[s2];
          double cf = fg(s, a) - backup_fg;
          double cg = gf(s, a) - backup_fg;
          double x = cf * cf - cg * cg;
          double cs1 = fstar(s, a) - backup_star;
          double cs2 = fg(s, a) - backup_star;
          double yv = cs1 * cs1 - cs2 * cs2;
          ex += w * p * x;
          ex2 += w * p * x * x;
          ey += w * p * yv;
          ey2 += w * p * yv * yv;
        }
    }
  ProcessMoments out;
  out.px = ex;
  out.var_x = std::max(0.0, ex2 - ex * ex);
  out.py = ey;
  out.var_y = std::max(0.0, ey2 - ey * ey);
  out.y_flagged = !check_realizability(cls, mdp, pi, mu).is_realizable;
  return out;
}

inline void validate_report(const DiagnosticsReport& rep, double gamma);

// Report assembly plus invariant enforcement. The inherent Bellman error of
// an unbounded linear class (no declared radius, projected backups escaping
// the span) is reported as the sentinel.
inline DiagnosticsReport diagnose(const FunctionClass& cls, const TabularMdp& mdp,
                                  const Policy& pi, const StateActionDistribution& mu,
                                  int s0,
                                  const std::vector<double>* r_grid = nullptr) {
  DiagnosticsReport rep;
  rep.beta = beta(cls, mdp, pi, mu);
  rep.concentrability = concentrability(cls, mdp, pi, mu, s0);
  rep.opc = opc(cls, mdp, pi, mu, s0);
  try {
    rep.inherent_be = ExtReal::finite(inherent_bellman_error(cls, mdp, pi, mu));
  } catch (const std::domain_error&) {
    rep.inherent_be = ExtReal::inf();
  }
  std::vector<double> grid =
      r_grid ? *r_grid : default_r_grid(cls, mdp, pi, mu);
  rep.curve = incompleteness_function(cls, mdp, pi, mu, grid);
  rep.bounds = concentrability_upper_bounds(mu, occupancy(mdp, pi, s0));
  rep.realizable = check_realizability(cls, mdp, pi, mu).is_realizable;
  validate_report(rep, mdp.discount);
  return rep;
}

// Structural checks every report must satisfy.
inline void validate_report(const DiagnosticsReport& rep, double gamma) {
  if (!(rep.beta >= 0.0 && rep.beta <= 1.0))
    throw invariant_error("report: beta outside [0,1]");
  double prev = -1.0;
  bool realizable_zero_checked = false;
  for (const CurvePoint& cp : rep.curve) {
    if (cp.empty) continue;
    double slack = 1e-9 * std::max(1.0, cp.value);
    if (cp.value < prev - slack)
      throw invariant_error("report: incompleteness curve decreases");
    prev = std::max(prev, cp.value);
    if (cp.value > rep.beta * cp.r + 1e-9 * std::max(1.0, cp.r))
      throw invariant_error("report: curve exceeds beta * r");
    if (rep.realizable && cp.r == 0.0) {
      if (cp.value > 1e-9)
        throw invariant_error("report: I(0) nonzero under realizability");
      realizable_zero_checked = true;
    }
  }
  (void)realizable_zero_checked;
  if (rep.beta < 1.0 && rep.opc.finite_value() &&
      rep.concentrability.finite_value()) {
    double cap = rep.concentrability.value /
                 ((1.0 - gamma) * (1.0 - gamma) * (1.0 - rep.beta));
    if (rep.opc.value > cap * (1.0 + 1e-7) + 1e-9)
      throw invariant_error("report: opc exceeds concentrability cap");
  }
}

}  // namespace oped
