#pragma once

// JSON plumbing: problem specs, sweep configs, and report serialization.
// Specs are single hand-editable JSON documents; loading validates every
// sub-type invariant and reports the offending field. The +infinity
// sentinel serializes as the string "inf" everywhere.
//
// Feature matrices flatten row-major with row index s * n_actions + a, the
// layout shared by every matrix builder in the library.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oped/common.hpp"
#include "oped/diagnostics.hpp"
#include "oped/estimation.hpp"
#include "oped/function_class.hpp"
#include "oped/lemmas.hpp"
#include "oped/mdp.hpp"

namespace oped {

struct ProblemSpec {
  TabularMdp mdp;
  Policy pi;
  StateActionDistribution mu;
  int s0 = 0;
  FunctionClass cls = FunctionClass::finite({QFunction::zeros(1, 1)});
};

struct SweepConfig {
  std::vector<std::size_t> n_values;
  int seeds = 1;
  double delta = 0.1;
  std::string estimator = "minimax";  // or "fitted_q"
  std::string out;                    // optional output path
};

namespace io {

using json = nlohmann::json;

inline ExtReal ext_from_json(const json& j, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return ExtReal::inf();
    throw validation_error("spec: field '" + field + "' must be a number or \"inf\"");
  }
  if (!j.is_number())
    throw validation_error("spec: field '" + field + "' must be a number or \"inf\"");
  return ExtReal::finite(j.get<double>());
}

inline json ext_to_json(const ExtReal& v) {
  if (v.is_inf) return json("inf");
  return json(v.value);
}

inline const json& need(const json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end())
    throw validation_error("spec: missing field '" + field + "'");
  return *it;
}

inline json mdp_to_json(const TabularMdp& mdp) {
  json out;
  out["n_states"] = mdp.n_states;
  out["n_actions"] = mdp.n_actions;
  out["discount"] = mdp.discount;
  out["transition"] = mdp.transition;
  json laws = json::array();
  for (int s = 0; s < mdp.n_states; ++s) {
    json row = json::array();
    for (int a = 0; a < mdp.n_actions; ++a) {
      json atoms = json::array();
      for (const RewardAtom& at : mdp.reward_law[s][a])
        atoms.push_back({{"value", at.value}, {"prob", at.prob}});
      row.push_back(atoms);
    }
    laws.push_back(row);
  }
  out["reward_law"] = laws;
  return out;
}

inline TabularMdp mdp_from_json(const json& j) {
  TabularMdp mdp;
  mdp.n_states = need(j, "n_states").get<int>();
  mdp.n_actions = need(j, "n_actions").get<int>();
  mdp.discount = need(j, "discount").get<double>();
  mdp.transition =
      need(j, "transition").get<std::vector<std::vector<std::vector<double>>>>();
  const json& laws = need(j, "reward_law");
  if (!laws.is_array() || static_cast<int>(laws.size()) != mdp.n_states)
    throw validation_error("spec: reward_law must have n_states rows");
  mdp.reward_law.assign(mdp.n_states, {});
  for (int s = 0; s < mdp.n_states; ++s) {
    const json& row = laws[s];
    if (!row.is_array() || static_cast<int>(row.size()) != mdp.n_actions)
      throw validation_error("spec: reward_law rows must have n_actions entries");
    mdp.reward_law[s].assign(mdp.n_actions, {});
    for (int a = 0; a < mdp.n_actions; ++a) {
      for (const json& atom : row[a]) {
        RewardAtom at;
        at.value = need(atom, "value").get<double>();
        at.prob = need(atom, "prob").get<double>();
        mdp.reward_law[s][a].push_back(at);
      }
    }
  }
  mdp.validate();
  return mdp;
}

inline json class_to_json(const FunctionClass& cls) {
  json out;
  if (cls.is_finite()) {
    out["type"] = "finite";
    json members = json::array();
    for (const QFunction& f : cls.as_finite().members) members.push_back(f.values);
    out["members"] = members;
  } else {
    const LinearClass& lc = cls.as_linear();
    out["type"] = "linear";
    out["dim"] = lc.dim;
    json rows = json::array();
    for (int i = 0; i < lc.phi.rows(); ++i) {
      json row = json::array();
      for (int jj = 0; jj < lc.phi.cols(); ++jj) row.push_back(lc.phi(i, jj));
      rows.push_back(row);
    }
    out["features"] = rows;
    if (lc.weight_radius) out["weight_radius"] = *lc.weight_radius;
  }
  return out;
}

inline FunctionClass class_from_json(const json& j, int S, int A) {
  std::string type = need(j, "type").get<std::string>();
  if (type == "finite") {
    std::vector<QFunction> members;
    for (const json& m : need(j, "members")) {
      QFunction f;
      f.values = m.get<std::vector<std::vector<double>>>();
      members.push_back(std::move(f));
    }
    FunctionClass cls = FunctionClass::finite(members);
    cls.validate(S, A);
    return cls;
  }
  if (type == "linear") {
    LinearClass lc;
    lc.n_states = S;
    lc.n_actions = A;
    lc.dim = need(j, "dim").get<int>();
    const json& rows = need(j, "features");
    if (static_cast<int>(rows.size()) != S * A)
      throw validation_error("spec: features must have n_states*n_actions rows");
    lc.phi.resize(S * A, lc.dim);
    for (int i = 0; i < S * A; ++i) {
      const json& row = rows[i];
      if (static_cast<int>(row.size()) != lc.dim)
        throw validation_error("spec: feature rows must have dim entries");
      for (int jj = 0; jj < lc.dim; ++jj) lc.phi(i, jj) = row[jj].get<double>();
    }
    if (j.contains("weight_radius"))
      lc.weight_radius = j["weight_radius"].get<double>();
    FunctionClass cls = FunctionClass::linear(lc);
    cls.validate(S, A);
    return cls;
  }
  throw validation_error("spec: class type must be \"finite\" or \"linear\"");
}

inline json spec_to_json(const ProblemSpec& spec) {
  json out;
  out["mdp"] = mdp_to_json(spec.mdp);
  out["policy"] = spec.pi.action_probs;
  out["mu"] = spec.mu.probs;
  out["s0"] = spec.s0;
  out["class"] = class_to_json(spec.cls);
  out["gamma"] = spec.mdp.discount;  // echoed for audit
  return out;
}

inline ProblemSpec spec_from_json(const json& j) {
  ProblemSpec spec;
  spec.mdp = mdp_from_json(need(j, "mdp"));
  spec.pi.action_probs =
      need(j, "policy").get<std::vector<std::vector<double>>>();
  spec.pi.validate(spec.mdp.n_states, spec.mdp.n_actions);
  spec.mu.probs = need(j, "mu").get<std::vector<std::vector<double>>>();
  spec.mu.validate(spec.mdp.n_states, spec.mdp.n_actions);
  spec.s0 = need(j, "s0").get<int>();
  if (spec.s0 < 0 || spec.s0 >= spec.mdp.n_states)
    throw validation_error("spec: s0 out of range");
  spec.cls = class_from_json(need(j, "class"), spec.mdp.n_states,
                             spec.mdp.n_actions);
  if (j.contains("gamma")) {
    double echo = j["gamma"].get<double>();
    if (std::abs(echo - spec.mdp.discount) > 1e-12)
      throw validation_error("spec: gamma echo disagrees with mdp.discount");
  }
  return spec;
}

inline ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("spec: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw validation_error("spec: parse error in '" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

inline void save_spec(const ProblemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("spec: cannot write '" + path + "'");
  out << spec_to_json(spec).dump(2) << "\n";
}

inline SweepConfig sweep_from_json(const json& j) {
  SweepConfig cfg;
  for (const json& n : need(j, "n_values"))
    cfg.n_values.push_back(n.get<std::size_t>());
  if (cfg.n_values.empty())
    throw validation_error("sweep: n_values must be nonempty");
  cfg.seeds = need(j, "seeds").get<int>();
  if (cfg.seeds < 1) throw validation_error("sweep: seeds must be >= 1");
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw validation_error("sweep: delta must lie in (0,1)");
  if (j.contains("estimator")) cfg.estimator = j["estimator"].get<std::string>();
  if (cfg.estimator != "minimax" && cfg.estimator != "fitted_q")
    throw validation_error("sweep: estimator must be \"minimax\" or \"fitted_q\"");
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  return cfg;
}

inline SweepConfig load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("sweep: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw validation_error("sweep: parse error in '" + path + "': " + e.what());
  }
  return sweep_from_json(j);
}

inline json report_to_json(const DiagnosticsReport& rep) {
  json out;
  out["beta"] = rep.beta;
  out["concentrability"] = ext_to_json(rep.concentrability);
  out["opc"] = ext_to_json(rep.opc);
  out["inherent_be"] = ext_to_json(rep.inherent_be);
  json curve = json::array();
  for (const CurvePoint& cp : rep.curve) {
    json pt;
    pt["r"] = cp.r;
    if (cp.empty)
      pt["empty"] = true;
    else
      pt["value"] = cp.value;
    curve.push_back(pt);
  }
  out["curve"] = curve;
  out["bounds"] = {{"chi_sq", ext_to_json(rep.bounds.chi_sq)},
                   {"sup_ratio", ext_to_json(rep.bounds.sup_ratio)}};
  out["realizable"] = rep.realizable;
  return out;
}

inline json bound_report_to_json(const BoundReport& br) {
  return {{"new", ext_to_json(br.new_bound)},
          {"classic", ext_to_json(br.classic_bound)},
          {"tighter", br.tighter}};
}

inline json lemma_rows_to_json(const std::vector<LemmaResult>& rows) {
  json arr = json::array();
  for (const LemmaResult& r : rows) {
    json row;
    row["lemma"] = r.lemma;
    row["instance"] = r.instance;
    row["margin"] = r.margin;
    row["pass"] = r.pass;
    if (r.skipped) row["skipped"] = true;
    if (!r.note.empty()) row["note"] = r.note;
    arr.push_back(row);
  }
  return arr;
}

}  // namespace io
}  // namespace oped
