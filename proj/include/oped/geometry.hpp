#pragma once

// Two-state constructions realizing a prescribed incompleteness angle: a
// one-dimensional linear class whose projected backup leaves the span at
// angle theta, so beta = sin(theta).
//
// State 0 is absorbing and carries the only feature mass; state 1 leaks
// into state 0 with probability b. With zero rewards and uniform mu the
// achieved beta is gamma b / sqrt((1-gamma)^2 + gamma^2 b^2), so
// b = tan(theta) (1-gamma) / gamma hits sin(theta) exactly. A bisection
// polish against the measured beta guards the closed form.

#include <cmath>
#include <vector>

#include "oped/common.hpp"
#include "oped/diagnostics.hpp"
#include "oped/function_class.hpp"
#include "oped/instances.hpp"
#include "oped/mdp.hpp"

namespace oped {

struct GeometryRow {
  double theta_deg = 0.0;
  double mix = 0.0;   // transition parameter b
  double beta = 0.0;  // achieved, from the diagnostics pipeline
  ExtReal concentrability;
  ExtReal opc;
  bool ok = false;  // |beta - sin(theta)| within tolerance
};

namespace detail {

inline ProblemInstance geometry_instance_from_mix(double b, double gamma) {
  ProblemInstance inst;
  TabularMdp& mdp = inst.mdp;
  mdp.n_states = 2;
  mdp.n_actions = 1;
  mdp.discount = gamma;
  mdp.transition = {{{1.0, 0.0}}, {{b, 1.0 - b}}};
  mdp.reward_law = {{{RewardAtom{0.0, 1.0}}}, {{RewardAtom{0.0, 1.0}}}};
  mdp.validate();
  inst.pi.action_probs = {{1.0}, {1.0}};
  inst.mu.probs = {{0.5}, {0.5}};
  inst.s0 = 0;
  LinearClass lc;
  lc.n_states = 2;
  lc.n_actions = 1;
  lc.dim = 1;
  lc.phi = Eigen::MatrixXd::Zero(2, 1);
  lc.phi(0, 0) = 1.0;
  lc.weight_radius = 1.0;  // makes the inherent Bellman error reportable
  inst.cls = FunctionClass::linear(lc);
  inst.realizable_by_construction = true;  // zero rewards put fstar in the span
  return inst;
}

}  // namespace detail

// Builds the instance for one angle, polishing the mix parameter until the
// measured beta agrees with sin(theta).
inline ProblemInstance geometry_instance(double theta_deg, double gamma = 0.99,
                                         double tol = 1e-3) {
  if (theta_deg < 0.0 || theta_deg >= 90.0)
    throw validation_error("geometry_instance: theta must lie in [0, 90)");
  const double rad = theta_deg * M_PI / 180.0;
  const double target = std::sin(rad);
  double b = std::tan(rad) * (1.0 - gamma) / gamma;
  ProblemInstance inst = detail::geometry_instance_from_mix(b, gamma);
  double achieved = beta(inst.cls, inst.mdp, inst.pi, inst.mu);
  if (std::abs(achieved - target) <= tol) return inst;

  // Achieved beta is increasing in b; bisect on [0, hi].
  double lo = 0.0, hi = std::min(1.0, std::max(2.0 * b, 0.01));
  for (int it = 0; it < 200 && std::abs(achieved - target) > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    inst = detail::geometry_instance_from_mix(mid, gamma);
    achieved = beta(inst.cls, inst.mdp, inst.pi, inst.mu);
    if (achieved < target)
      lo = mid;
    else
      hi = mid;
    b = mid;
  }
  return inst;
}

inline GeometryRow geometry_row(double theta_deg, double gamma = 0.99) {
  ProblemInstance inst = geometry_instance(theta_deg, gamma);
  GeometryRow row;
  row.theta_deg = theta_deg;
  row.mix = inst.mdp.transition[1][0][0];
  row.beta = beta(inst.cls, inst.mdp, inst.pi, inst.mu);
  row.concentrability =
      concentrability(inst.cls, inst.mdp, inst.pi, inst.mu, inst.s0);
  row.opc = opc(inst.cls, inst.mdp, inst.pi, inst.mu, inst.s0);
  double target = std::sin(theta_deg * M_PI / 180.0);
  row.ok = std::abs(row.beta - target) <= 1e-2;
  return row;
}

inline std::vector<GeometryRow> geometry_sweep(
    const std::vector<double>& thetas_deg, double gamma = 0.99) {
  if (thetas_deg.empty())
    throw validation_error("geometry_sweep: need at least one angle");
  std::vector<GeometryRow> rows;
  rows.reserve(thetas_deg.size());
  for (double t : thetas_deg) rows.push_back(geometry_row(t, gamma));
  return rows;
}

}  // namespace oped
