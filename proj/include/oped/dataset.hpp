#pragma once

// Datasets of i.i.d. (s, a, r, s') tuples and their sufficient statistics.
//
// Every empirical loss the library evaluates depends on the data only
// through per-(s,a,s') counts and reward sums, so TdSuffStats makes each
// loss evaluation independent of n after one aggregation pass.
//
// A dataset can also be the exact population device: per-pair weights equal
// to mu with rewards and successor values replaced by their means. That mode
// is flagged in provenance and turns empirical operations into their exact
// population counterparts (zero-variance oracle limit).

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "oped/common.hpp"
#include "oped/mdp.hpp"
#include "oped/random.hpp"

namespace oped {

struct DatasetProvenance {
  std::uint64_t master_seed = 0;
  std::uint64_t mu_hash = 0;
  bool population = false;
};

// Exact-moment payload backing a population dataset.
struct PopulationData {
  TabularMdp mdp;
  StateActionDistribution mu;
};

struct Dataset {
  std::vector<Tuple> tuples;
  DatasetProvenance provenance;
  std::optional<PopulationData> population;

  std::size_t size() const { return tuples.size(); }

  void validate(int n_states, int n_actions) const {
    for (const Tuple& t : tuples) {
      if (t.s < 0 || t.s >= n_states || t.s_next < 0 || t.s_next >= n_states)
        throw validation_error("dataset: state index out of range");
      if (t.a < 0 || t.a >= n_actions)
        throw validation_error("dataset: action index out of range");
      if (!(t.r >= 0.0) || !(t.r <= 1.0))
        throw validation_error("dataset: reward outside [0,1]");
    }
  }
};

// n i.i.d. tuples: (s,a) ~ mu, r ~ R(s,a), s' ~ P(s,a). Deterministic given
// the seed; each tuple consumes exactly three uniform draws.
inline Dataset sample_dataset(const TabularMdp& mdp,
                              const StateActionDistribution& mu, long n,
                              std::uint64_t seed) {
  if (n < 1) throw validation_error("sample_dataset: n must be at least 1");
  const int S = mdp.n_states, A = mdp.n_actions;
  std::vector<double> pair_probs(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      pair_probs[detail::sa_index(s, a, A)] = mu.probs[s][a];
  Rng rng(seed);
  Dataset out;
  out.provenance.master_seed = seed;
  out.provenance.mu_hash = mu.identity_hash();
  out.tuples.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    int sa = rng.sample(pair_probs);
    int s = sa / A, a = sa % A;
    const auto& law = mdp.reward_law[s][a];
    double u = rng.unit();
    double acc = 0.0;
    double r = law.back().value;
    for (const RewardAtom& at : law) {
      acc += at.prob;
      if (u < acc) {
        r = at.value;
        break;
      }
    }
    int s2 = rng.sample(mdp.transition[s][a]);
    out.tuples.push_back(Tuple{s, a, r, s2});
  }
  return out;
}

// The exact-sweep population device: no tuples, exact per-pair moments.
inline Dataset population_dataset(const TabularMdp& mdp,
                                  const StateActionDistribution& mu) {
  Dataset out;
  out.provenance.master_seed = 0;
  out.provenance.mu_hash = mu.identity_hash();
  out.provenance.population = true;
  out.population = PopulationData{mdp, mu};
  return out;
}

// Sufficient statistics of a dataset for squared-TD losses, grouped by
// (s,a): total count, reward sums, and the successor profile with per-s'
// count and reward sum (the cross term r * f(s',pi) needs the latter).
struct TdSuffStats {
  int n_states = 0;
  int n_actions = 0;
  double total = 0.0;  // number of tuples, or 1 for population weights
  bool population = false;
  std::vector<double> count, sum_r, sum_r2;       // indexed by sa
  std::vector<std::map<int, std::pair<double, double>>> succ;  // sa -> s' -> (count, sum_r)

  void init(int S, int A) {
    n_states = S;
    n_actions = A;
    std::size_t sa = static_cast<std::size_t>(S) * static_cast<std::size_t>(A);
    count.assign(sa, 0.0);
    sum_r.assign(sa, 0.0);
    sum_r2.assign(sa, 0.0);
    succ.assign(sa, {});
  }

  static TdSuffStats from_dataset(const Dataset& data, int S, int A) {
    if (data.provenance.population && data.population)
      return from_population(data.population->mdp, data.population->mu);
    if (data.tuples.empty())
      throw validation_error("dataset: empty");
    TdSuffStats st;
    st.init(S, A);
    for (const Tuple& t : data.tuples) {
      int sa = detail::sa_index(t.s, t.a, A);
      st.count[sa] += 1.0;
      st.sum_r[sa] += t.r;
      st.sum_r2[sa] += t.r * t.r;
      auto& cell = st.succ[sa][t.s_next];
      cell.first += 1.0;
      cell.second += t.r;
    }
    st.total = static_cast<double>(data.tuples.size());
    return st;
  }

  // Population weights: count = mu(s,a), rewards and successors at their
  // exact laws. Evaluators collapse the target to its mean in this mode.
  static TdSuffStats from_population(const TabularMdp& mdp,
                                     const StateActionDistribution& mu) {
    TdSuffStats st;
    st.init(mdp.n_states, mdp.n_actions);
    st.population = true;
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) {
        int sa = detail::sa_index(s, a, mdp.n_actions);
        double w = mu.probs[s][a];
        if (w == 0.0) continue;
        double rb = mdp.mean_reward(s, a);
        st.count[sa] = w;
        st.sum_r[sa] = w * rb;
        st.sum_r2[sa] = w * rb * rb;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          double p = mdp.transition[s][a][s2];
          if (p == 0.0) continue;
          st.succ[sa][s2] = {w * p, w * p * rb};
        }
      }
    st.total = 1.0;
    return st;
  }

  // Mean squared TD cost (1/n) sum_i (g(s_i,a_i) - r_i - gamma f(s'_i,pi))^2,
  // evaluated from the aggregates. next_value[s'] must hold f(s',pi).
  // In population mode the target collapses to rbar + gamma E[f(s',pi)].
  double loss(const QFunction& g, const std::vector<double>& next_value,
              double gamma) const {
    double acc = 0.0;
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a) {
        int sa = detail::sa_index(s, a, n_actions);
        double c = count[sa];
        if (c == 0.0) continue;
        double gv = g(s, a);
        if (population) {
          double tbar = 0.0;
          for (const auto& [s2, cell] : succ[sa]) tbar += cell.first * next_value[s2];
          double m = (sum_r[sa] + gamma * tbar) / c;
          acc += c * (gv - m) * (gv - m);
        } else {
          double st = 0.0, srt = 0.0, st2 = 0.0;
          for (const auto& [s2, cell] : succ[sa]) {
            double t = next_value[s2];
            st += cell.first * t;
            srt += cell.second * t;
            st2 += cell.first * t * t;
          }
          double a1 = sum_r[sa] + gamma * st;
          double a2 = sum_r2[sa] + 2.0 * gamma * srt + gamma * gamma * st2;
          acc += gv * gv * c - 2.0 * gv * a1 + a2;
        }
      }
    return acc / total;
  }
};

inline std::vector<double> policy_values(const QFunction& f, const Policy& pi) {
  std::vector<double> out(f.n_states());
  for (int s = 0; s < f.n_states(); ++s) out[s] = f.eval_policy(s, pi);
  return out;
}

// Columnar CSV with a header comment carrying provenance.
inline void dataset_to_csv(const Dataset& data, std::ostream& os) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%llu",
                static_cast<unsigned long long>(data.provenance.master_seed));
  os << "# seed=" << buf;
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(data.provenance.mu_hash));
  os << " mu_hash=" << buf
     << (data.provenance.population ? " population=1" : "") << "\n";
  os << "s,a,r,s_next\n";
  for (const Tuple& t : data.tuples) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.r);
    os << t.s << ',' << t.a << ',' << buf << ',' << t.s_next << "\n";
  }
}

}  // namespace oped
