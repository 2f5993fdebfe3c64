#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"
#include "ltlfgen/datagen.hpp"
#include "ltlfgen/error.hpp"

namespace ltlfgen {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const fs::path& p) {
  try {
    return json::parse(slurp(p));
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  if (!csv::parse(slurp(p), rows)) throw IoError("unterminated quote in " + p.string());
  return rows;
}

std::optional<int> to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

std::optional<bool> to_bit(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  return std::nullopt;
}

/// Everything the checks need, rebuilt from spec.json alone.
struct Context {
  fs::path dir;
  Problem problem;
  DomainBinding binding;
  std::vector<int> atom_constraint;  // atoms[i] -> model constraint index
  ValidationReport report;

  void fail(std::string where, std::string message) {
    report.violations.push_back({std::move(where), std::move(message)});
  }

  std::vector<bool> truths(std::span<const int> values) const {
    const auto& cons = problem.model.constraints();
    std::vector<bool> out(cons.size());
    std::vector<int> args;
    for (std::size_t k = 0; k < cons.size(); ++k) {
      args.clear();
      for (int v : problem.model.bindings(static_cast<int>(k))) args.push_back(values[v]);
      out[k] = eval_constraint(cons[k], args);
    }
    return out;
  }

  std::uint32_t letter(const std::vector<bool>& truths) const {
    std::uint32_t l = 0;
    for (std::size_t i = 0; i < atom_constraint.size(); ++i)
      if (truths[atom_constraint[i]]) l |= 1u << i;
    return l;
  }

  Valuation valuation(std::uint32_t letter) const {
    Valuation v;
    for (std::size_t i = 0; i < problem.atoms.size(); ++i) v[problem.atoms[i]] = (letter >> i) & 1u;
    return v;
  }

  void check_image(const std::string& where, int var, const std::string& split, int value, const std::string& img) {
    const std::string& domain = problem.variable_domains[var].second;
    const auto* pool = binding.pool(domain, split, value);
    if (!pool) {
      if (img != "-") fail(where, "synthetic domain '" + domain + "' must use '-' as image, got '" + img + "'");
      return;
    }
    if (std::find(pool->begin(), pool->end(), img) == pool->end())
      fail(where, "image '" + img + "' is not a " + split + " image of label '" +
                      problem.model.variables()[var].domain.label_of(value) + "'");
  }
};

Context load_context(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a dataset directory: " + dir.string());
  const fs::path spec_path = dir / "spec.json";
  TaskSpec spec = load_spec(slurp(spec_path), dir);
  Context ctx{dir, resolve(spec), {}, {}, {}};
  ctx.binding = DomainBinding::load(ctx.problem);
  for (const auto& a : ctx.problem.atoms) ctx.atom_constraint.push_back(ctx.problem.model.constraint_index(a));
  return ctx;
}

void check_manifest(Context& ctx) {
  const fs::path p = ctx.dir / "manifest.json";
  if (!fs::exists(p)) {
    ctx.report.warnings.push_back("manifest.json missing; file digests not checked");
    return;
  }
  const json m = read_json(p);
  if (!m.contains("files") || !m["files"].is_object()) {
    ctx.fail("manifest.json", "no file digest table");
    return;
  }
  for (const auto& [name, digest] : m["files"].items()) {
    const fs::path f = ctx.dir / name;
    if (!fs::exists(f)) {
      ctx.fail("manifest.json", "listed file " + name + " is missing");
    } else if (sha256_file(f) != digest.get<std::string>()) {
      ctx.report.warnings.push_back("digest of " + name + " differs from manifest.json");
    }
  }
}

// Distinct manifests for two splits must not share image references.
void check_split_hygiene(Context& ctx) {
  for (const auto& d : ctx.problem.spec.domains) {
    std::map<std::string, std::set<std::string>> refs;
    for (const auto& [split, path] : d.sources) {
      fs::path f = path;
      if (f.is_relative()) f = ctx.problem.spec.base_dir / f;
      for (const auto& [label, image] : read_manifest(f)) refs[split].insert(image);
    }
    for (auto a = d.sources.begin(); a != d.sources.end(); ++a)
      for (auto b = std::next(a); b != d.sources.end(); ++b) {
        if (fs::path(a->second) == fs::path(b->second)) continue;
        const auto& ra = refs[a->first];
        for (const auto& img : refs[b->first])
          if (ra.count(img)) {
            ctx.fail("domain " + d.name, "image '" + img + "' appears in both the " + a->first + " and " + b->first +
                                             " manifests");
            break;
          }
      }
  }
}

void check_automaton(Context& ctx) {
  const fs::path p = ctx.dir / "automaton.json";
  if (!fs::exists(p)) {
    ctx.fail("automaton.json", "missing");
    return;
  }
  try {
    if (!(import_sfa_json(slurp(p)) == ctx.problem.automaton))
      ctx.fail("automaton.json", "does not match the automaton compiled from spec.json");
  } catch (const Error& e) {
    ctx.fail("automaton.json", e.what());
  }
}

/// Parsed CSV step row.
struct Row {
  int seq = 0, t = 0, from = 0, to = 0;
  bool label = false;
  std::vector<std::string> images;
  std::vector<int> values;
  std::vector<bool> vrel, truths, crel;
};

void check_sequences(Context& ctx) {
  const Problem& p = ctx.problem;
  const auto& vars = p.model.variables();
  const auto& cons = p.model.constraints();
  const Sfa& a = p.automaton;
  std::vector<std::string> header = {"seq_id", "t", "seq_label", "state_from", "state_to"};
  for (const auto& v : vars) {
    header.push_back("img_" + v.name);
    header.push_back("lbl_" + v.name);
    header.push_back("rel_" + v.name);
  }
  for (const auto& c : cons) {
    header.push_back("c_" + c.name);
    header.push_back("rel_" + c.name);
  }

  for (const auto& [split, expected] : p.spec.counts) {
    const fs::path csv_path = ctx.dir / (split + ".csv");
    if (!fs::exists(csv_path)) {
      ctx.fail(split + ".csv", "missing");
      continue;
    }
    const auto rows = read_csv(csv_path);
    if (rows.empty() || rows[0] != header) {
      ctx.fail(split + ".csv", "unexpected header");
      continue;
    }
    std::vector<std::vector<Row>> seqs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& cells = rows[r];
      const std::string where = split + ".csv row " + std::to_string(r);
      if (cells.size() != header.size()) {
        ctx.fail(where, "expected " + std::to_string(header.size()) + " cells");
        continue;
      }
      Row row;
      auto seq = to_int(cells[0]), t = to_int(cells[1]), from = to_int(cells[3]), to = to_int(cells[4]);
      auto label = to_bit(cells[2]);
      if (!seq || !t || !from || !to || !label) {
        ctx.fail(where, "malformed index columns");
        continue;
      }
      row.seq = *seq, row.t = *t, row.from = *from, row.to = *to, row.label = *label;
      bool bad = false;
      std::size_t c = 5;
      for (std::size_t v = 0; v < vars.size(); ++v, c += 3) {
        auto value = vars[v].domain.value_of(cells[c + 1]);
        auto rel = to_bit(cells[c + 2]);
        if (!value || !rel) {
          ctx.fail(where, "bad label or relevance for " + vars[v].name);
          bad = true;
          break;
        }
        row.images.push_back(cells[c]);
        row.values.push_back(*value);
        row.vrel.push_back(*rel);
      }
      for (std::size_t k = 0; !bad && k < cons.size(); ++k, c += 2) {
        auto truth = to_bit(cells[c]), rel = to_bit(cells[c + 1]);
        if (!truth || !rel) {
          ctx.fail(where, "bad truth or relevance for " + cons[k].name);
          bad = true;
          break;
        }
        row.truths.push_back(*truth);
        row.crel.push_back(*rel);
      }
      if (bad) continue;
      if (row.seq < 0 || row.seq > static_cast<int>(rows.size())) {
        ctx.fail(where, "seq_id out of range");
        continue;
      }
      if (row.seq >= static_cast<int>(seqs.size())) seqs.resize(row.seq + 1);
      seqs[row.seq].push_back(std::move(row));
    }

    if (static_cast<int>(seqs.size()) != expected)
      ctx.fail(split + ".csv", "has " + std::to_string(seqs.size()) + " sequences, expected " + std::to_string(expected));
    int positives = 0;
    std::vector<bool> labels;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
      const auto& steps = seqs[s];
      const std::string where = split + " sequence " + std::to_string(s);
      if (steps.empty()) {
        ctx.fail(where, "has no steps");
        labels.push_back(false);
        continue;
      }
      const bool label = steps[0].label;
      labels.push_back(label);
      positives += label;
      const int len = static_cast<int>(steps.size());
      if (len < p.spec.length.min || len > p.spec.length.max)
        ctx.fail(where, "length " + std::to_string(len) + " outside [" + std::to_string(p.spec.length.min) + ", " +
                            std::to_string(p.spec.length.max) + "]");
      int state = a.initial();
      Trace trace;
      for (int t = 0; t < len; ++t) {
        const Row& row = steps[t];
        const std::string at = where + " t=" + std::to_string(t);
        if (row.t != t) ctx.fail(at, "steps out of order");
        if (row.label != label) ctx.fail(at, "sequence label changes within the sequence");
        const auto truths = ctx.truths(row.values);
        for (std::size_t k = 0; k < cons.size(); ++k)
          if (truths[k] != row.truths[k]) ctx.fail(at, "truth of " + cons[k].name + " disagrees with the labels");
        const std::uint32_t letter = ctx.letter(truths);
        trace.push_back(ctx.valuation(letter));
        const int next = a.step(state, letter);
        if (row.from != state || row.to != next)
          ctx.fail(at, "states " + std::to_string(row.from) + "->" + std::to_string(row.to) + " but the run gives " +
                           std::to_string(state) + "->" + std::to_string(next));
        const Guard& g = a.transitions(state)[a.transition_index(state, next)].guard;
        std::vector<bool> vrel(vars.size(), false);
        for (std::size_t k = 0; k < cons.size(); ++k) {
          const bool rel = g.mentions(cons[k].name);
          if (rel != row.crel[k]) ctx.fail(at, "relevance flag of " + cons[k].name + " is wrong");
          if (rel)
            for (int v : p.model.bindings(static_cast<int>(k))) vrel[v] = true;
        }
        for (std::size_t v = 0; v < vars.size(); ++v) {
          if (vrel[v] != row.vrel[v]) ctx.fail(at, "relevance flag of " + vars[v].name + " is wrong");
          ctx.check_image(at, static_cast<int>(v), split, row.values[v], row.images[v]);
        }
        state = next;
      }
      if (a.is_accepting(state) != label) ctx.fail(where, "label disagrees with the automaton run");
      if (eval_trace(p.formula, trace) != label) ctx.fail(where, "label disagrees with the formula");
      ctx.report.steps += steps.size();
    }
    ctx.report.sequences += seqs.size();
    const int n = static_cast<int>(seqs.size());
    const int want = p.spec.balance == Balance::AllPositive ? n : (n + 1) / 2;
    if (positives != want)
      ctx.fail(split, std::to_string(positives) + " positive sequences, expected " + std::to_string(want));

    const fs::path jl = ctx.dir / (split + ".jsonl");
    if (!fs::exists(jl)) {
      ctx.fail(split + ".jsonl", "missing");
      continue;
    }
    std::istringstream lines(slurp(jl));
    std::string line;
    std::size_t i = 0;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const std::string where = split + ".jsonl line " + std::to_string(i + 1);
      try {
        const json j = json::parse(line);
        if (i >= seqs.size()) {
          ctx.fail(where, "more sequences than in the CSV");
        } else {
          std::vector<int> states{seqs[i].empty() ? 0 : seqs[i][0].from};
          for (const auto& r : seqs[i]) states.push_back(r.to);
          if (j.at("label").get<bool>() != labels[i] || j.at("states").get<std::vector<int>>() != states ||
              j.at("steps").size() != seqs[i].size())
            ctx.fail(where, "disagrees with the CSV");
        }
      } catch (const json::exception& e) {
        ctx.fail(where, e.what());
      }
      ++i;
    }
    if (i != seqs.size()) ctx.fail(split + ".jsonl", "sequence count differs from the CSV");
  }
}

void check_curriculum(Context& ctx) {
  const Problem& p = ctx.problem;
  const Sfa& a = p.automaton;
  const auto& vars = p.model.variables();
  const fs::path cpath = ctx.dir / "curriculum.json";
  if (!fs::exists(cpath)) {
    ctx.fail("curriculum.json", "missing");
    return;
  }
  json cur;
  std::vector<int> states;
  std::vector<std::string> guards;
  std::vector<std::uint32_t> minterms;
  std::map<int, std::string> orphan_at;
  try {
    cur = read_json(cpath);
    states = cur.at("states").get<std::vector<int>>();
    guards = cur.at("guards").get<std::vector<std::string>>();
    for (const auto& t : cur.at("constraint_truths")) {
      std::uint32_t m = 0;
      for (std::size_t i = 0; i < p.atoms.size(); ++i)
        if (t.at(p.atoms[i]).get<bool>()) m |= 1u << i;
      minterms.push_back(m);
    }
    for (const auto& [orphan, e] : cur.at("orphan_schedule").items()) {
      if (std::find(p.orphans.begin(), p.orphans.end(), orphan) == p.orphans.end())
        ctx.fail("curriculum.json", "'" + orphan + "' is not an orphan constraint");
      if (e.is_null()) continue;
      const int idx = e.get<int>();
      if (orphan_at.count(idx)) ctx.fail("curriculum.json", "two orphans scheduled in episode " + std::to_string(idx));
      orphan_at[idx] = orphan;
    }
  } catch (const json::exception& e) {
    ctx.fail("curriculum.json", e.what());
    return;
  }

  const int T = p.spec.episodes;
  if (static_cast<int>(states.size()) != T + 1 || static_cast<int>(guards.size()) != T ||
      static_cast<int>(minterms.size()) != T) {
    ctx.fail("curriculum.json", "expected " + std::to_string(T) + " episodes");
    return;
  }
  if (states[0] != a.initial()) ctx.fail("curriculum.json", "does not start in the initial state");
  Trace trace;
  for (int e = 0; e < T; ++e) {
    const std::string where = "curriculum episode " + std::to_string(e);
    const int s = states[e], next = states[e + 1];
    if (s < 0 || s >= a.num_states() || next < 0 || next >= a.num_states()) {
      ctx.fail(where, "state out of range");
      return;
    }
    const int ti = a.transition_index(s, next);
    if (ti < 0) {
      ctx.fail(where, "no transition " + std::to_string(s) + "->" + std::to_string(next));
      continue;
    }
    const Guard& g = a.transitions(s)[ti].guard;
    if (g.to_string() != guards[e]) ctx.fail(where, "guard text differs from the automaton");
    if (!g.eval(minterms[e])) ctx.fail(where, "constraint truths do not satisfy the guard");
    trace.push_back(ctx.valuation(minterms[e]));
  }
  if (!a.is_accepting(states[T])) ctx.fail("curriculum.json", "the run does not end in an accepting state");
  if (!eval_trace(p.formula, trace)) ctx.fail("curriculum.json", "the curriculum does not satisfy the formula");

  const auto sizes = episode_split_sizes(p.spec);
  std::vector<std::string> header = {"sample_id"};
  if (vars.size() == 1) {
    header.push_back("img");
    header.push_back("label");
  } else {
    for (const auto& v : vars) {
      header.push_back("img_" + v.name);
      header.push_back("label_" + v.name);
    }
  }
  const json& episodes = cur.contains("episodes") ? cur["episodes"] : json::array();
  const double ratio = p.spec.orphan_positive_ratio;
  for (int e = 0; e < T; ++e) {
    std::string name;
    if (e < static_cast<int>(episodes.size()) && episodes[e].contains("directory"))
      name = episodes[e]["directory"].get<std::string>();
    if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
      ctx.fail("curriculum.json", "episode " + std::to_string(e) + " has no valid directory");
      continue;
    }
    const auto orphan = orphan_at.find(e);
    const int orphan_k = orphan == orphan_at.end() ? -1 : p.model.constraint_index(orphan->second);
    ++ctx.report.episodes;
    for (const auto& [split, n] : sizes) {
      const fs::path f = ctx.dir / name / (split + ".csv");
      const std::string file = name + "/" + split + ".csv";
      if (!fs::exists(f)) {
        ctx.fail(file, "missing");
        continue;
      }
      const auto rows = read_csv(f);
      if (rows.empty() || rows[0] != header) {
        ctx.fail(file, "unexpected header");
        continue;
      }
      if (static_cast<int>(rows.size()) - 1 != n)
        ctx.fail(file, "has " + std::to_string(rows.size() - 1) + " samples, expected " + std::to_string(n));
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::string where = file + " row " + std::to_string(r);
        const auto& cells = rows[r];
        if (cells.size() != header.size()) {
          ctx.fail(where, "expected " + std::to_string(header.size()) + " cells");
          continue;
        }
        if (to_int(cells[0]) != static_cast<int>(r) - 1) ctx.fail(where, "sample_id out of order");
        std::vector<int> values;
        for (std::size_t v = 0; v < vars.size(); ++v) {
          auto value = vars[v].domain.value_of(cells[2 + 2 * v]);
          if (!value) break;
          values.push_back(*value);
        }
        if (values.size() != vars.size()) {
          ctx.fail(where, "label outside its domain");
          continue;
        }
        for (std::size_t v = 0; v < vars.size(); ++v)
          ctx.check_image(where, static_cast<int>(v), split, values[v], cells[1 + 2 * v]);
        const auto truths = ctx.truths(values);
        if (ctx.letter(truths) != minterms[e]) ctx.fail(where, "constraint truths differ from the episode pattern");
        if (orphan_k >= 0 && ratio >= 1.0 && !truths[orphan_k])
          ctx.fail(where, "scheduled orphan " + orphan->second + " is false");
        ++ctx.report.samples;
      }
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const fs::path& dir) {
  Context ctx = load_context(dir);
  check_manifest(ctx);
  check_automaton(ctx);
  check_split_hygiene(ctx);
  if (ctx.problem.spec.mode == Mode::Sequential)
    check_sequences(ctx);
  else
    check_curriculum(ctx);
  return std::move(ctx.report);
}

std::string dataset_stats(const fs::path& dir, bool as_json) {
  Context ctx = load_context(dir);
  const Problem& p = ctx.problem;
  const auto& vars = p.model.variables();
  const auto& cons = p.model.constraints();
  json out;
  out["name"] = p.spec.name;
  out["mode"] = p.spec.mode == Mode::Sequential ? "sequential" : "incremental";
  out["automaton_states"] = p.automaton.num_states();

  // Per split: totals, truth frequencies and label histograms.
  auto tally = [&](const std::vector<std::vector<std::string>>& rows, std::size_t label_col, std::size_t stride,
                   json& hist) {
    for (std::size_t r = 1; r < rows.size(); ++r)
      for (std::size_t v = 0; v < vars.size(); ++v) {
        const std::size_t c = label_col + v * stride;
        if (c >= rows[r].size()) continue;
        json& n = hist[vars[v].name][rows[r][c]];
        n = n.is_null() ? 1 : n.get<int>() + 1;
      }
  };

  json splits = json::object();
  if (p.spec.mode == Mode::Sequential) {
    for (const auto& split : p.spec.splits()) {
      const fs::path f = dir / (split + ".csv");
      if (!fs::exists(f)) continue;
      const auto rows = read_csv(f);
      std::map<std::string, std::pair<int, bool>> seqs;  // id -> (length, label)
      std::vector<int> truth_counts(cons.size(), 0);
      std::map<int, int> visits;
      const std::size_t first_c = 5 + 3 * vars.size();
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < first_c + 2 * cons.size()) continue;
        auto& s = seqs[rows[r][0]];
        ++s.first;
        s.second = rows[r][2] == "1";
        if (auto to = to_int(rows[r][4])) ++visits[*to];
        for (std::size_t k = 0; k < cons.size(); ++k) truth_counts[k] += rows[r][first_c + 2 * k] == "1";
      }
      int positives = 0, lmin = 0, lmax = 0;
      double lsum = 0;
      bool first = true;
      for (const auto& [id, s] : seqs) {
        positives += s.second;
        lsum += s.first;
        lmin = first ? s.first : std::min(lmin, s.first);
        lmax = first ? s.first : std::max(lmax, s.first);
        first = false;
      }
      const std::size_t steps = rows.empty() ? 0 : rows.size() - 1;
      json sj;
      sj["sequences"] = seqs.size();
      sj["positives"] = positives;
      sj["steps"] = steps;
      sj["length"] = {{"min", lmin}, {"max", lmax}, {"mean", seqs.empty() ? 0.0 : lsum / seqs.size()}};
      std::map<int, int> lengths;
      for (const auto& [id, sq] : seqs) ++lengths[sq.first];
      json lh = json::object();
      for (const auto& [len, n] : lengths) lh[std::to_string(len)] = n;
      sj["length_histogram"] = lh;
      json tf = json::object();
      for (std::size_t k = 0; k < cons.size(); ++k)
        tf[cons[k].name] = steps ? static_cast<double>(truth_counts[k]) / steps : 0.0;
      sj["truth_frequency"] = tf;
      json vj = json::object();
      for (const auto& [s, n] : visits) vj[std::to_string(s)] = n;
      sj["state_visits"] = vj;
      json hist = json::object();
      tally(rows, 6, 3, hist);
      sj["labels"] = hist;
      splits[split] = sj;
    }
  } else {
    const json cur = read_json(dir / "curriculum.json");
    out["states"] = cur.value("states", json::array());
    out["orphan_schedule"] = cur.value("orphan_schedule", json::object());
    json eps = json::array();
    for (const auto& e : cur.value("episodes", json::array())) {
      json ej;
      ej["index"] = e.value("index", 0);
      ej["guard"] = e.value("guard", "");
      ej["samples"] = e.value("samples", json::object());
      json hist = json::object();
      for (const auto& split : p.spec.splits()) {
        const fs::path f = dir / e.value("directory", "") / (split + ".csv");
        if (fs::exists(f)) tally(read_csv(f), 2, 2, hist);
      }
      ej["labels"] = hist;
      eps.push_back(ej);
    }
    out["episodes"] = eps;
  }
  if (!splits.empty()) out["splits"] = splits;
  if (as_json) return out.dump(2) + "\n";

  std::ostringstream s;
  s << "name: " << p.spec.name << "\nmode: " << out["mode"].get<std::string>()
    << "\nautomaton states: " << p.automaton.num_states() << "\n";
  if (p.spec.mode == Mode::Sequential) {
    for (const auto& [split, sj] : splits.items()) {
      s << split << ": " << sj["sequences"] << " sequences (" << sj["positives"] << " positive), " << sj["steps"]
        << " steps, length " << sj["length"]["min"] << ".." << sj["length"]["max"] << " mean " << std::fixed
        << std::setprecision(2) << sj["length"]["mean"].get<double>() << "\n";
      s << "  lengths:";
      for (const auto& [len, n] : sj["length_histogram"].items()) s << " " << len << "x" << n;
      s << "\n";
      for (const auto& [c, f] : sj["truth_frequency"].items())
        s << "  " << c << " true in " << std::setprecision(3) << f.get<double>() << " of steps\n";
    }
  } else {
    s << "states: " << out["states"].dump() << "\n";
    for (const auto& e : out["episodes"]) {
      s << "episode " << e["index"] << ": " << e["guard"].get<std::string>();
      for (const auto& [split, n] : e["samples"].items()) s << " " << split << "=" << n;
      s << "\n";
    }
    for (const auto& [o, e] : out["orphan_schedule"].items())
      s << "orphan " << o << ": " << (e.is_null() ? std::string("unplaced") : "episode " + e.dump()) << "\n";
  }
  return s.str();
}

}  // namespace ltlfgen
