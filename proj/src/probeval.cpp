#include "ltlfgen/probeval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <queue>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ltlfgen/error.hpp"

namespace ltlfgen {

using json = nlohmann::ordered_json;

CategoricalDist CategoricalDist::make(std::string variable, Domain domain, std::vector<double> probabilities) {
  if (probabilities.size() != domain.size())
    throw ValidationError("distribution of " + variable + " has " + std::to_string(probabilities.size()) +
                          " entries for a domain of size " + std::to_string(domain.size()));
  double total = 0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("distribution of " + variable + " has an entry outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("distribution of " + variable + " sums to " + std::to_string(total));
  return {std::move(variable), std::move(domain), std::move(probabilities)};
}

namespace {

constexpr std::uint64_t kMaxWorlds = 100'000'000;

const CategoricalDist& dist_of(const Distributions& d, const std::string& v) {
  auto it = d.find(v);
  if (it == d.end()) throw ValidationError("no distribution for variable " + v);
  return it->second;
}

/// Visits the worlds of positive probability in lexicographic order of
/// domain positions.  `values` holds actual domain values.
void for_each_world(const std::vector<const CategoricalDist*>& vars,
                    const std::function<void(const std::vector<int>&, double)>& fn) {
  std::vector<std::vector<std::size_t>> support(vars.size());
  std::uint64_t worlds = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    for (std::size_t j = 0; j < vars[i]->probabilities.size(); ++j)
      if (vars[i]->probabilities[j] > 0) support[i].push_back(j);
    if (support[i].empty()) return;
    worlds *= support[i].size();
    if (worlds > kMaxWorlds) throw DomainError("probability grid exceeds " + std::to_string(kMaxWorlds) + " worlds");
  }
  std::vector<std::size_t> pos(vars.size(), 0);
  std::vector<int> values(vars.size());
  while (true) {
    double w = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::size_t j = support[i][pos[i]];
      values[i] = vars[i]->domain.values[j];
      w *= vars[i]->probabilities[j];
    }
    fn(values, w);
    std::size_t i = vars.size();
    while (i > 0 && ++pos[i - 1] == support[i - 1].size()) pos[--i] = 0;
    if (i == 0) return;
  }
}

std::vector<const CategoricalDist*> param_dists(const ConstraintDef& c, const Distributions& d) {
  std::vector<const CategoricalDist*> out;
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    const auto& dist = dist_of(d, c.params[i]);
    if (!c.param_domains.empty() && !(dist.domain.values == c.param_domains[i].values))
      throw ValidationError("distribution of " + c.params[i] + " is over a different domain than " + c.name + " expects");
    out.push_back(&dist);
  }
  return out;
}

}  // namespace

double constraint_prob_exact(const ConstraintDef& c, const Distributions& dists) {
  double total = 0;
  for_each_world(param_dists(c, dists), [&](const std::vector<int>& v, double w) {
    if (eval_expression(c.expr, v)) total += w;
  });
  return total;
}

double constraint_prob_topk(const ConstraintDef& c, const Distributions& dists, std::size_t k) {
  if (k == 0) return 0;
  // Min-heap on (weight, then later-visited first) keeps the k best worlds.
  using Item = std::pair<double, std::uint64_t>;
  auto worse = [](const Item& a, const Item& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
  std::uint64_t seq = 0;
  for_each_world(param_dists(c, dists), [&](const std::vector<int>& v, double w) {
    const std::uint64_t id = seq++;
    if (!eval_expression(c.expr, v)) return;
    if (heap.size() < k) {
      heap.emplace(w, id);
    } else if (w > heap.top().first) {
      heap.pop();
      heap.emplace(w, id);
    }
  });
  std::vector<double> kept;
  while (!heap.empty()) {
    kept.push_back(heap.top().first);
    heap.pop();
  }
  double total = 0;
  for (auto it = kept.rbegin(); it != kept.rend(); ++it) total += *it;
  return total;
}

double guard_prob_factored(const Guard& g, const GuardAtomProbs& probs) {
  const auto& atoms = g.atoms();
  std::vector<double> p(atoms.size(), 0.0);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    auto it = probs.find(atoms[i]);
    if (it != probs.end()) {
      if (!(it->second >= 0.0 && it->second <= 1.0))
        throw ValidationError("probability of " + atoms[i] + " is outside [0,1]");
      p[i] = it->second;
    } else if (g.mentions(atoms[i])) {
      throw ValidationError("no probability for atom " + atoms[i]);
    }
  }
  // Unmentioned atoms marginalize out; enumerate only the mentioned ones.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (g.mentions(atoms[i])) live.push_back(i);
  double total = 0;
  for (std::uint32_t m = 0; m < (1u << live.size()); ++m) {
    std::uint32_t letter = 0;
    double w = 1;
    for (std::size_t j = 0; j < live.size(); ++j) {
      const bool bit = (m >> j) & 1u;
      if (bit) letter |= 1u << live[j];
      w *= bit ? p[live[j]] : 1.0 - p[live[j]];
    }
    if (g.eval(letter)) total += w;
  }
  return total;
}

double guard_prob_joint(const Guard& g, const std::vector<ConstraintDef>& constraints, const Distributions& dists) {
  const auto& atoms = g.atoms();
  std::vector<const ConstraintDef*> cons;
  std::vector<std::size_t> bit_of;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!g.mentions(atoms[i])) continue;
    auto it = std::find_if(constraints.begin(), constraints.end(), [&](const ConstraintDef& c) { return c.name == atoms[i]; });
    if (it == constraints.end()) throw ValidationError("no constraint named " + atoms[i]);
    cons.push_back(&*it);
    bit_of.push_back(i);
  }
  std::vector<std::string> names;
  for (const auto* c : cons) names.insert(names.end(), c->params.begin(), c->params.end());
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<const CategoricalDist*> vars;
  for (const auto& n : names) vars.push_back(&dist_of(dists, n));
  std::vector<std::vector<std::size_t>> arg_index(cons.size());
  for (std::size_t k = 0; k < cons.size(); ++k) {
    (void)param_dists(*cons[k], dists);
    for (const auto& p : cons[k]->params)
      arg_index[k].push_back(std::lower_bound(names.begin(), names.end(), p) - names.begin());
  }
  double total = 0;
  std::vector<int> args;
  for_each_world(vars, [&](const std::vector<int>& v, double w) {
    std::uint32_t letter = 0;
    for (std::size_t k = 0; k < cons.size(); ++k) {
      args.clear();
      for (auto i : arg_index[k]) args.push_back(v[i]);
      if (eval_expression(cons[k]->expr, args)) letter |= 1u << bit_of[k];
    }
    if (g.eval(letter)) total += w;
  });
  return total;
}

double accept_prob(const Sfa& a, const std::vector<GuardAtomProbs>& steps) {
  if (steps.empty()) throw ValidationError("acceptance probability needs at least one step");
  std::vector<double> mass(a.num_states(), 0.0);
  mass[a.initial()] = 1.0;
  for (const auto& probs : steps) {
    std::vector<double> next(a.num_states(), 0.0);
    for (int s = 0; s < a.num_states(); ++s) {
      if (mass[s] == 0) continue;
      for (const auto& t : a.transitions(s)) next[t.to] += mass[s] * guard_prob_factored(t.guard, probs);
    }
    mass = std::move(next);
  }
  double total = 0;
  for (int s = 0; s < a.num_states(); ++s)
    if (a.is_accepting(s)) total += mass[s];
  return total;
}

ProbeProblem load_probe(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte, "malformed probe JSON");
  }
  try {
    static const std::set<std::string> keys = {"domains", "variables", "distributions", "constraints",
                                               "guards", "formula", "top_k"};
    for (const auto& [k, v] : j.items())
      if (!keys.count(k)) throw ValidationError("unknown probe key '" + k + "'");

    std::vector<std::string> all_labels;
    for (const auto& d : j.at("domains"))
      if (d.contains("labels"))
        for (const auto& l : d["labels"]) all_labels.push_back(l.get<std::string>());
    const Universe universe(all_labels);

    std::map<std::string, Domain> domains;
    std::map<std::string, std::vector<std::string>> declared;  // labels in declared order
    for (const auto& d : j.at("domains")) {
      const auto name = d.at("name").get<std::string>();
      if (d.contains("labels")) {
        declared[name] = d["labels"].get<std::vector<std::string>>();
        domains[name] = Domain::enumeration(name, declared[name], universe);
      } else {
        const auto r = d.at("range").get<std::vector<int>>();
        if (r.size() != 2) throw ValidationError("range of domain " + name + " needs [lo, hi]");
        domains[name] = Domain::range(name, r[0], r[1]);
        for (const auto& l : domains[name].labels) declared[name].push_back(l);
      }
    }

    ProbeProblem out;
    std::map<std::string, Domain> var_domain;
    for (const auto& [v, dn] : j.at("variables").items()) {
      auto it = domains.find(dn.get<std::string>());
      if (it == domains.end()) throw ValidationError("variable " + v + " uses unknown domain " + dn.get<std::string>());
      var_domain[v] = it->second;
    }
    for (const auto& [v, dom] : var_domain) {
      if (!j.at("distributions").contains(v)) throw ValidationError("no distribution for variable " + v);
      const json& p = j["distributions"][v];
      std::vector<double> probs(dom.size(), 0.0);
      if (p.is_array()) {
        const auto& order = declared.at(dom.name);
        if (p.size() != order.size())
          throw ValidationError("distribution of " + v + " needs " + std::to_string(order.size()) + " entries");
        for (std::size_t i = 0; i < order.size(); ++i) {
          const auto val = *dom.value_of(order[i]);
          probs[std::lower_bound(dom.values.begin(), dom.values.end(), val) - dom.values.begin()] = p[i].get<double>();
        }
      } else {
        for (const auto& [label, w] : p.items()) {
          auto val = dom.value_of(label);
          if (!val) throw ValidationError("label " + label + " is not in the domain of " + v);
          probs[std::lower_bound(dom.values.begin(), dom.values.end(), *val) - dom.values.begin()] = w.get<double>();
        }
      }
      out.dists.emplace(v, CategoricalDist::make(v, dom, std::move(probs)));
    }
    for (const auto& [name, c] : j.at("constraints").items()) {
      auto params = c.at("params").get<std::vector<std::string>>();
      std::vector<Domain> pd;
      for (const auto& p : params) {
        auto it = var_domain.find(p);
        if (it == var_domain.end()) throw ValidationError("unknown variable " + p);
        pd.push_back(it->second);
      }
      out.constraints.push_back(ConstraintDef::make(name, params, c.at("body").get<std::string>(), pd, universe));
      out.atoms.push_back(name);
    }
    std::sort(out.atoms.begin(), out.atoms.end());
    if (j.contains("guards"))
      for (const auto& g : j["guards"]) out.guards.push_back(Guard::parse(g.get<std::string>(), out.atoms));
    if (j.contains("formula")) {
      const std::set<std::string> known(out.atoms.begin(), out.atoms.end());
      CompileOptions co;
      co.extra_atoms = out.atoms;
      out.automaton = compile(parse_formula(j["formula"].get<std::string>(), known), co);
    }
    if (j.contains("top_k")) {
      const auto k = j["top_k"].get<long long>();
      if (k < 1) throw ValidationError("top_k must be positive");
      out.top_k = static_cast<std::size_t>(k);
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("probe file: ") + e.what());
  }
}

ProbeReport run_probe(const ProbeProblem& problem) {
  ProbeReport r;
  r.top_k = problem.top_k;
  GuardAtomProbs exact, topk;
  for (const auto& c : problem.constraints) {
    r.constraints.push_back(c.name);
    r.exact.push_back(constraint_prob_exact(c, problem.dists));
    r.topk.push_back(constraint_prob_topk(c, problem.dists, problem.top_k));
    exact[c.name] = r.exact.back();
    topk[c.name] = r.topk.back();
  }
  auto row = [&](std::string label, const Guard& g) {
    return GuardRow{std::move(label), guard_prob_factored(g, exact), guard_prob_factored(g, topk),
                    guard_prob_joint(g, problem.constraints, problem.dists)};
  };
  for (const auto& g : problem.guards) r.guards.push_back(row(g.to_string(), g));
  if (problem.automaton)
    for (int s = 0; s < problem.automaton->num_states(); ++s)
      for (const auto& t : problem.automaton->transitions(s))
        r.transitions.push_back(row(std::to_string(s) + "->" + std::to_string(t.to) + ": " + t.guard.to_string(), t.guard));
  return r;
}

namespace {

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

}  // namespace

std::string format_probe(const ProbeReport& r, bool as_json) {
  const std::string k = "top" + std::to_string(r.top_k);
  if (as_json) {
    json j;
    j["top_k"] = r.top_k;
    json cs = json::object();
    for (std::size_t i = 0; i < r.constraints.size(); ++i) cs[r.constraints[i]] = {{"exact", r.exact[i]}, {k, r.topk[i]}};
    j["constraints"] = cs;
    auto rows = [&](const std::vector<GuardRow>& v) {
      json a = json::array();
      for (const auto& g : v)
        a.push_back({{"guard", g.label}, {"factored_exact", g.factored_exact}, {"factored_" + k, g.factored_topk},
                     {"joint", g.joint}});
      return a;
    };
    j["guards"] = rows(r.guards);
    j["transitions"] = rows(r.transitions);
    return j.dump(2) + "\n";
  }
  std::ostringstream s;
  s << std::left << std::setw(16) << "constraint" << std::setw(14) << "exact" << k << "\n";
  for (std::size_t i = 0; i < r.constraints.size(); ++i)
    s << std::setw(16) << r.constraints[i] << std::setw(14) << num(r.exact[i]) << num(r.topk[i]) << "\n";
  auto table = [&](const char* title, const std::vector<GuardRow>& v) {
    if (v.empty()) return;
    std::size_t w = std::string(title).size();
    for (const auto& g : v) w = std::max(w, g.label.size());
    s << "\n" << std::setw(w + 2) << title << std::setw(16) << "factored/exact" << std::setw(16)
      << ("factored/" + k) << "joint\n";
    for (const auto& g : v)
      s << std::setw(w + 2) << g.label << std::setw(16) << num(g.factored_exact) << std::setw(16)
        << num(g.factored_topk) << num(g.joint) << "\n";
  };
  table("guard", r.guards);
  table("transition", r.transitions);
  return s.str();
}

}  // namespace ltlfgen
