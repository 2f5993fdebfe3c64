#include "ltlfgen/spec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ltlfgen/error.hpp"

namespace ltlfgen {

using json = nlohmann::ordered_json;

std::vector<std::string> TaskSpec::splits() const {
  std::vector<std::string> out;
  if (mode == Mode::Sequential)
    for (const auto& [s, n] : counts) out.push_back(s);
  else
    for (const auto& [s, f] : split_fractions) out.push_back(s);
  return out;
}

bool operator==(const TaskSpec& a, const TaskSpec& b) {
  return a.name == b.name && a.mode == b.mode && a.seed == b.seed && a.domains == b.domains &&
         a.variables == b.variables && a.constraints == b.constraints && a.formula == b.formula &&
         a.streams == b.streams && a.length == b.length && a.episodes == b.episodes && a.counts == b.counts &&
         a.samples_per_episode == b.samples_per_episode && a.split_fractions == b.split_fractions &&
         a.balance == b.balance && a.bias == b.bias && a.orphan_positive_ratio == b.orphan_positive_ratio;
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ValidationError(msg); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) bad("unknown key '" + k + "' in " + where);
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

std::string need_string(const json& j, const std::string& what) {
  if (!j.is_string()) bad(what + " must be a string");
  return j.get<std::string>();
}

int need_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) bad(what + " must be an integer");
  const auto v = j.get<long long>();
  if (v < INT32_MIN || v > INT32_MAX) bad(what + " is out of range");
  return static_cast<int>(v);
}

double need_number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

const json& need_object(const json& j, const std::string& what) {
  if (!j.is_object()) bad(what + " must be an object");
  return j;
}

const json& need_array(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  return j;
}

DomainDef parse_domain(const json& j) {
  need_object(j, "domain");
  allow_keys(j, "domain", {"name", "range", "labels", "sources"});
  DomainDef d;
  d.name = need_string(need(j, "name", "domain"), "domain name");
  const std::string where = "domain '" + d.name + "'";
  const bool has_range = j.contains("range"), has_labels = j.contains("labels");
  if (has_range == has_labels) bad(where + " needs exactly one of 'range' or 'labels'");
  if (has_range) {
    const auto& r = need_array(j.at("range"), where + " range");
    if (r.size() != 2) bad(where + " range must be [lo, hi]");
    d.lo = need_int(r[0], where + " range");
    d.hi = need_int(r[1], where + " range");
  } else {
    const auto& ls = need_array(j.at("labels"), where + " labels");
    if (ls.empty()) bad(where + " has no labels");
    if (ls[0].is_number_integer()) {
      std::vector<int> vals;
      for (const auto& l : ls) vals.push_back(need_int(l, where + " labels"));
      std::sort(vals.begin(), vals.end());
      if (std::adjacent_find(vals.begin(), vals.end()) != vals.end()) bad(where + " has duplicate labels");
      if (vals.back() - vals.front() + 1 != static_cast<int>(vals.size()))
        bad(where + " integer labels must form a contiguous range");
      d.lo = vals.front();
      d.hi = vals.back();
    } else {
      d.integer = false;
      for (const auto& l : ls) d.labels.push_back(need_string(l, where + " labels"));
    }
  }
  if (j.contains("sources")) {
    for (const auto& [split, path] : need_object(j.at("sources"), where + " sources").items())
      d.sources[split] = need_string(path, where + " source");
  }
  return d;
}

StreamMap parse_stream(const json& j) {
  need_object(j, "stream");
  allow_keys(j, "stream", {"atom", "occurrence", "bindings"});
  StreamMap s;
  s.atom = need_string(need(j, "atom", "stream"), "stream atom");
  if (j.contains("occurrence")) s.occurrence = need_int(j.at("occurrence"), "stream occurrence");
  for (const auto& [param, b] : need_object(need(j, "bindings", "stream"), "stream bindings").items()) {
    StreamBinding sb;
    if (b.is_string()) {
      sb.domain = b.get<std::string>();
    } else {
      need_object(b, "stream binding");
      allow_keys(b, "stream binding", {"domain", "direction", "variable"});
      sb.domain = need_string(need(b, "domain", "stream binding"), "stream domain");
      if (b.contains("direction")) sb.direction = need_string(b.at("direction"), "stream direction");
      if (b.contains("variable")) sb.variable = need_string(b.at("variable"), "stream variable");
    }
    s.bindings[param] = sb;
  }
  return s;
}

TaskSpec from_json(const json& j) {
  need_object(j, "specification");
  allow_keys(j, "specification",
             {"name", "mode", "seed", "domains", "variables", "constraints", "formula", "streams", "length", "counts",
              "balance", "bias", "orphan_positive_ratio"});
  const std::string top = "specification";
  TaskSpec s;
  s.name = need_string(need(j, "name", top), "name");
  const std::string mode = need_string(need(j, "mode", top), "mode");
  if (mode == "sequential") s.mode = Mode::Sequential;
  else if (mode == "incremental") s.mode = Mode::Incremental;
  else bad("mode must be 'sequential' or 'incremental'");
  const json& seed = need(j, "seed", top);
  if (!seed.is_number_unsigned()) bad("seed must be a non-negative integer");
  s.seed = seed.get<std::uint64_t>();

  for (const auto& d : need_array(need(j, "domains", top), "domains")) s.domains.push_back(parse_domain(d));
  for (const auto& [v, d] : need_object(need(j, "variables", top), "variables").items())
    s.variables.emplace_back(v, need_string(d, "domain of variable " + v));
  for (const auto& [name, c] : need_object(need(j, "constraints", top), "constraints").items()) {
    ConstraintSpec cs;
    cs.name = name;
    need_object(c, "constraint '" + name + "'");
    allow_keys(c, "constraint '" + name + "'", {"params", "body"});
    for (const auto& p : need_array(need(c, "params", "constraint '" + name + "'"), "params"))
      cs.params.push_back(need_string(p, "parameter of " + name));
    cs.body = need_string(need(c, "body", "constraint '" + name + "'"), "body of " + name);
    s.constraints.push_back(std::move(cs));
  }
  s.formula = need_string(need(j, "formula", top), "formula");
  if (j.contains("streams"))
    for (const auto& st : need_array(j.at("streams"), "streams")) s.streams.push_back(parse_stream(st));

  const json& length = need_object(need(j, "length", top), "length");
  const json& counts = need_object(need(j, "counts", top), "counts");
  if (s.mode == Mode::Sequential) {
    allow_keys(length, "length", {"min", "max"});
    s.length.min = need_int(need(length, "min", "length"), "length.min");
    s.length.max = need_int(need(length, "max", "length"), "length.max");
    for (const auto& [split, n] : counts.items()) s.counts.emplace_back(split, need_int(n, "count of " + split));
  } else {
    allow_keys(length, "length", {"episodes"});
    s.episodes = need_int(need(length, "episodes", "length"), "length.episodes");
    allow_keys(counts, "counts", {"samples_per_episode", "splits"});
    s.samples_per_episode = need_int(need(counts, "samples_per_episode", "counts"), "samples_per_episode");
    for (const auto& [split, f] : need_object(need(counts, "splits", "counts"), "counts.splits").items())
      s.split_fractions.emplace_back(split, need_number(f, "fraction of " + split));
  }
  if (j.contains("balance")) {
    const std::string b = need_string(j.at("balance"), "balance");
    if (b == "balanced") s.balance = Balance::Balanced;
    else if (b == "all_positive") s.balance = Balance::AllPositive;
    else bad("balance must be 'balanced' or 'all_positive'");
  }
  if (j.contains("bias")) {
    const json& b = need_object(j.at("bias"), "bias");
    allow_keys(b, "bias", {"self_loop_decay", "sink_decay", "orphan_coverage"});
    if (b.contains("self_loop_decay")) s.bias.self_loop_decay = need_number(b.at("self_loop_decay"), "self_loop_decay");
    if (b.contains("sink_decay")) s.bias.sink_decay = need_number(b.at("sink_decay"), "sink_decay");
    if (b.contains("orphan_coverage")) {
      const std::string o = need_string(b.at("orphan_coverage"), "orphan_coverage");
      if (o == "off") s.bias.orphan_coverage = OrphanCoverage::Off;
      else if (o == "best_effort") s.bias.orphan_coverage = OrphanCoverage::BestEffort;
      else bad("orphan_coverage must be 'off' or 'best_effort'");
    }
  }
  if (j.contains("orphan_positive_ratio"))
    s.orphan_positive_ratio = need_number(j.at("orphan_positive_ratio"), "orphan_positive_ratio");
  return s;
}

json to_json(const TaskSpec& s) {
  json j;
  j["name"] = s.name;
  j["mode"] = s.mode == Mode::Sequential ? "sequential" : "incremental";
  j["seed"] = s.seed;
  j["domains"] = json::array();
  for (const auto& d : s.domains) {
    json dj;
    dj["name"] = d.name;
    if (d.integer) dj["range"] = {d.lo, d.hi};
    else dj["labels"] = d.labels;
    if (!d.sources.empty()) {
      dj["sources"] = json::object();
      for (const auto& [split, path] : d.sources) dj["sources"][split] = path;
    }
    j["domains"].push_back(dj);
  }
  j["variables"] = json::object();
  for (const auto& [v, d] : s.variables) j["variables"][v] = d;
  j["constraints"] = json::object();
  for (const auto& c : s.constraints) j["constraints"][c.name] = {{"params", c.params}, {"body", c.body}};
  j["formula"] = s.formula;
  if (!s.streams.empty()) {
    j["streams"] = json::array();
    for (const auto& st : s.streams) {
      json sj;
      sj["atom"] = st.atom;
      sj["occurrence"] = st.occurrence;
      sj["bindings"] = json::object();
      for (const auto& [p, b] : st.bindings) {
        json bj{{"domain", b.domain}};
        if (!b.direction.empty()) bj["direction"] = b.direction;
        if (!b.variable.empty()) bj["variable"] = b.variable;
        sj["bindings"][p] = bj;
      }
      j["streams"].push_back(sj);
    }
  }
  if (s.mode == Mode::Sequential) {
    j["length"] = {{"min", s.length.min}, {"max", s.length.max}};
    j["counts"] = json::object();
    for (const auto& [split, n] : s.counts) j["counts"][split] = n;
  } else {
    j["length"] = {{"episodes", s.episodes}};
    json splits = json::object();
    for (const auto& [split, f] : s.split_fractions) splits[split] = f;
    j["counts"] = {{"samples_per_episode", s.samples_per_episode}, {"splits", splits}};
  }
  j["balance"] = s.balance == Balance::Balanced ? "balanced" : "all_positive";
  j["bias"] = {{"self_loop_decay", s.bias.self_loop_decay},
               {"sink_decay", s.bias.sink_decay},
               {"orphan_coverage", s.bias.orphan_coverage == OrphanCoverage::Off ? "off" : "best_effort"}};
  if (s.mode == Mode::Incremental) j["orphan_positive_ratio"] = s.orphan_positive_ratio;
  return j;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

Universe universe_of(const TaskSpec& s) {
  std::vector<std::string> labels;
  for (const auto& d : s.domains) labels.insert(labels.end(), d.labels.begin(), d.labels.end());
  return Universe(std::move(labels));
}

Domain make_domain(const DomainDef& d, const Universe& u) {
  return d.integer ? Domain::range(d.name, d.lo, d.hi) : Domain::enumeration(d.name, d.labels, u);
}

}  // namespace

void validate_spec(const TaskSpec& s) {
  if (s.name.empty()) bad("name must not be empty");
  if (s.domains.empty()) bad("at least one domain is required");
  std::set<std::string> domain_names;
  for (const auto& d : s.domains) {
    if (!is_identifier(d.name)) bad("invalid domain name '" + d.name + "'");
    if (!domain_names.insert(d.name).second) bad("duplicate domain " + d.name);
    if (d.integer) {
      if (d.lo > d.hi) bad("domain '" + d.name + "' has an empty range");
      if (!d.labels.empty()) bad("integer domain '" + d.name + "' must not list enumeration labels");
    } else {
      if (d.labels.empty()) bad("domain '" + d.name + "' has no labels");
      std::set<std::string> seen;
      for (const auto& l : d.labels) {
        if (!is_identifier(l)) bad("invalid label '" + l + "' in domain '" + d.name + "'");
        if (!seen.insert(l).second) bad("domain '" + d.name + "' has duplicate label " + l);
      }
    }
    for (const auto& [split, path] : d.sources)
      if (path.empty()) bad("domain '" + d.name + "' has an empty source for split " + split);
  }
  const Universe universe = universe_of(s);
  std::map<std::string, Domain> domains;
  for (const auto& d : s.domains) domains.emplace(d.name, make_domain(d, universe));

  if (s.variables.empty()) bad("at least one variable is required");
  std::map<std::string, std::string> vars;
  for (const auto& [v, d] : s.variables) {
    if (!is_identifier(v)) bad("invalid variable name '" + v + "'");
    if (!vars.emplace(v, d).second) bad("duplicate variable " + v);
    if (!domains.count(d)) bad("unknown domain " + d + " for variable " + v);
  }
  std::set<std::string> cnames;
  for (const auto& c : s.constraints) {
    if (!is_identifier(c.name)) bad("invalid constraint name '" + c.name + "'");
    if (!cnames.insert(c.name).second) bad("duplicate constraint " + c.name);
    std::vector<Domain> pd;
    for (const auto& p : c.params) {
      auto it = vars.find(p);
      if (it == vars.end()) bad("unknown variable " + p);
      pd.push_back(domains.at(it->second));
    }
    ConstraintDef::make(c.name, c.params, c.body, pd, universe);
  }
  if (s.constraints.size() > Sfa::kMaxAtoms) bad("too many constraints");
  const Formula f = parse_formula(s.formula, cnames);
  const auto occ = atom_occurrences(f);

  std::set<std::pair<std::string, int>> streamed;
  for (const auto& st : s.streams) {
    auto c = std::find_if(s.constraints.begin(), s.constraints.end(),
                          [&](const ConstraintSpec& cs) { return cs.name == st.atom; });
    if (c == s.constraints.end()) bad("stream refers to unknown constraint " + st.atom);
    const int n = static_cast<int>(std::count(occ.begin(), occ.end(), st.atom));
    if (st.occurrence < 0 || st.occurrence >= n)
      bad("stream occurrence " + std::to_string(st.occurrence) + " of " + st.atom + " does not exist in the formula");
    if (!streamed.insert({st.atom, st.occurrence}).second)
      bad("two streams target occurrence " + std::to_string(st.occurrence) + " of " + st.atom);
    if (st.bindings.empty()) bad("stream for " + st.atom + " binds nothing");
    for (const auto& [p, b] : st.bindings) {
      if (std::find(c->params.begin(), c->params.end(), p) == c->params.end())
        bad("stream variable " + p + " is not a parameter of " + st.atom);
      if (!domains.count(b.domain)) bad("unknown domain " + b.domain + " in stream for " + st.atom);
      if (b.direction != "" && b.direction != "in" && b.direction != "out")
        bad("stream direction must be 'in' or 'out'");
      if (!b.variable.empty() && !is_identifier(b.variable)) bad("invalid stream variable '" + b.variable + "'");
    }
  }

  if (s.mode == Mode::Sequential) {
    if (s.length.min < 1) bad("length.min must be at least 1");
    if (s.length.min > s.length.max) bad("length.min exceeds length.max");
    if (s.counts.empty()) bad("counts must name at least one split");
    std::set<std::string> seen;
    for (const auto& [split, n] : s.counts) {
      if (!seen.insert(split).second) bad("duplicate split " + split);
      if (n < 0) bad("count of split " + split + " is negative");
    }
  } else {
    if (s.episodes < 1) bad("length.episodes must be at least 1");
    if (s.samples_per_episode < 1) bad("samples_per_episode must be at least 1");
    if (s.split_fractions.empty()) bad("counts.splits must name at least one split");
    double total = 0;
    std::set<std::string> seen;
    for (const auto& [split, f] : s.split_fractions) {
      if (!seen.insert(split).second) bad("duplicate split " + split);
      if (!std::isfinite(f) || f < 0) bad("fraction of split " + split + " must be non-negative");
      total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) bad("split fractions must sum to 1");
  }
  for (const auto& d : s.domains)
    for (const auto& [split, path] : d.sources) {
      const auto sp = s.splits();
      if (std::find(sp.begin(), sp.end(), split) == sp.end())
        bad("domain '" + d.name + "' has a source for undeclared split " + split);
    }
  if (!std::isfinite(s.bias.self_loop_decay) || s.bias.self_loop_decay < 0) bad("self_loop_decay must be >= 0");
  if (!std::isfinite(s.bias.sink_decay) || s.bias.sink_decay < 0) bad("sink_decay must be >= 0");
  if (!(s.orphan_positive_ratio >= 0 && s.orphan_positive_ratio <= 1))
    bad("orphan_positive_ratio must lie in [0, 1]");
}

TaskSpec load_spec(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ParseError(e.byte, msg);
  }
  TaskSpec s = from_json(j);
  validate_spec(s);
  s.base_dir = base_dir;
  return s;
}

TaskSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read specification " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_spec(buf.str(), path.parent_path());
}

std::string serialize_spec(const TaskSpec& spec) { return to_json(spec).dump(2) + "\n"; }

std::optional<TaskSpec> bundled_task(std::string_view name) {
  for (auto& t : bundled_tasks())
    if (t.name == name) return t;
  return std::nullopt;
}

Problem resolve(const TaskSpec& spec, const CompileOptions& options) {
  validate_spec(spec);
  Problem p;
  p.spec = spec;
  p.universe = universe_of(spec);
  for (const auto& d : spec.domains) p.domains.emplace(d.name, make_domain(d, p.universe));

  std::set<std::string> cnames;
  for (const auto& c : spec.constraints) cnames.insert(c.name);
  const Formula original = parse_formula(spec.formula, cnames);
  const auto original_atoms = atoms_of(original);

  std::map<std::pair<std::string, int>, const StreamMap*> streams;
  for (const auto& st : spec.streams) streams[{st.atom, st.occurrence}] = &st;
  auto fresh_name = [](const std::string& atom, int k) { return atom + "_" + std::to_string(k); };
  p.formula = rename_atom_occurrences(original, [&](const std::string& atom, int k) {
    return streams.count({atom, k}) ? fresh_name(atom, k) : atom;
  });
  p.atoms = atoms_of(p.formula);

  p.variable_domains = spec.variables;
  auto domain_of_var = [&](const std::string& v) -> const std::string* {
    for (const auto& [name, d] : p.variable_domains)
      if (name == v) return &d;
    return nullptr;
  };

  std::vector<ConstraintDef> defs;
  auto add_def = [&](const std::string& name, const ConstraintSpec& c, const std::vector<std::string>& actuals) {
    if (std::any_of(defs.begin(), defs.end(), [&](const ConstraintDef& d) { return d.name == name; }))
      bad("stream substitution produces a duplicate constraint name " + name);
    std::vector<Domain> pd;
    for (const auto& v : actuals) pd.push_back(p.domains.at(*domain_of_var(v)));
    ConstraintDef def = ConstraintDef::make(name, c.params, c.body, pd, p.universe);
    def.params = actuals;
    defs.push_back(std::move(def));
  };
  for (const auto& c : spec.constraints) {
    const bool in_original = std::binary_search(original_atoms.begin(), original_atoms.end(), c.name);
    const bool still_used = std::binary_search(p.atoms.begin(), p.atoms.end(), c.name);
    if (still_used || !in_original) add_def(c.name, c, c.params);
    for (const auto& [key, st] : streams) {
      if (key.first != c.name) continue;
      std::vector<std::string> actuals;
      for (const auto& param : c.params) {
        auto b = st->bindings.find(param);
        if (b == st->bindings.end()) {
          actuals.push_back(param);
          continue;
        }
        std::string v = b->second.variable.empty() ? param + "_" + fresh_name(c.name, key.second) : b->second.variable;
        if (const std::string* d = domain_of_var(v)) {
          if (*d != b->second.domain) bad("stream variable " + v + " is already bound to domain " + *d);
        } else {
          p.variable_domains.emplace_back(v, b->second.domain);
        }
        actuals.push_back(v);
      }
      add_def(fresh_name(c.name, key.second), c, actuals);
    }
  }

  std::vector<Variable> vars;
  for (const auto& [v, d] : p.variable_domains) vars.push_back({v, p.domains.at(d)});
  p.model = CspModel(std::move(vars), std::move(defs));
  for (const auto& c : p.model.constraints())
    if (!std::binary_search(p.atoms.begin(), p.atoms.end(), c.name)) p.orphans.push_back(c.name);
  p.automaton = compile(p.formula, options);
  return p;
}

}  // namespace ltlfgen
