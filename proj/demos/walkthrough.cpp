// Worked example, start to finish: build a small MDP and a candidate class,
// read off the structural diagnostics, then fit both estimators on sampled
// data and compare the achieved error against the computed bounds.
//
// Run from the repo root after building:
//   build/demo_walkthrough

#include <cstdio>

#include "oped/diagnostics.hpp"
#include "oped/estimation.hpp"
#include "oped/spec_io.hpp"

using namespace oped;

int main() {
  // Two states, two actions. Action 0 tends to stay, action 1 tends to move;
  // rewards are Bernoulli with state-dependent means.
  TabularMdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.discount = 0.9;
  mdp.transition = {{{0.8, 0.2}, {0.3, 0.7}}, {{0.4, 0.6}, {0.9, 0.1}}};
  mdp.reward_law = {{{{0.0, 0.6}, {1.0, 0.4}}, {{0.0, 0.8}, {1.0, 0.2}}},
                    {{{0.0, 0.3}, {1.0, 0.7}}, {{0.0, 0.5}, {1.0, 0.5}}}};
  mdp.validate();

  Policy pi;
  pi.action_probs = {{0.7, 0.3}, {0.4, 0.6}};
  pi.validate(2, 2);

  StateActionDistribution mu;
  mu.probs = {{0.3, 0.2}, {0.25, 0.25}};
  mu.validate(2, 2);

  const int s0 = 0;

  QFunction fstar = exact_q(mdp, pi);
  std::printf("exact q under pi:\n");
  for (int s = 0; s < 2; ++s)
    std::printf("  q(%d,0)=%.4f  q(%d,1)=%.4f\n", s, fstar.values[s][0], s,
                fstar.values[s][1]);

  // Candidate class: the true function, a damped copy, and a constant.
  QFunction damped = fstar;
  for (auto& row : damped.values)
    for (double& v : row) v *= 0.8;
  FunctionClass cls =
      FunctionClass::finite({fstar, damped, QFunction::constant(2, 2, 0.5)});

  DiagnosticsReport rep = diagnose(cls, mdp, pi, mu, s0);
  std::printf("\nstructural diagnostics:\n%s\n",
              io::report_to_json(rep).dump(2).c_str());

  // Sample a behavior dataset and fit both estimators.
  const std::size_t n = 20000;
  Dataset data = sample_dataset(mdp, mu, n, 12345u);

  FitResult mm = minimize_minimax(cls, data, pi, mdp.discount);
  FitResult fq = fitted_q(cls, data, pi, mdp.discount);

  std::printf("minimax estimate: member %d, program value %.3e, error %.4e\n",
              mm.member_index.value_or(-1), mm.program_value,
              prediction_error(mm.estimate, fstar, pi, s0));
  std::printf("fitted-q estimate: member %d, converged=%s in %d steps, "
              "error %.4e\n",
              fq.member_index.value_or(-1), fq.converged ? "yes" : "no", fq.iterations,
              prediction_error(fq.estimate, fstar, pi, s0));

  // Bound comparison at this sample size.
  double b = beta(cls, mdp, pi, mu);
  ExtReal conc = concentrability(cls, mdp, pi, mu, s0);
  ExtReal ibe = ExtReal::finite(inherent_bellman_error(cls, mdp, pi, mu));
  BoundReport br =
      make_bound_report(3, 0.1, n, mdp.discount, b, conc, ibe);
  std::printf("\nbounds at n=%zu: new=%s classic=%s tighter=%s\n", n,
              br.new_bound.to_string().c_str(),
              br.classic_bound.to_string().c_str(), br.tighter.c_str());
  return 0;
}
