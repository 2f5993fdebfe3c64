#include "ltlfgen/datagen.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"
#include "ltlfgen/error.hpp"

namespace ltlfgen {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out) throw IoError("failed writing " + p.string());
}

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::vector<std::pair<std::string, std::string>> read_manifest(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  if (!csv::parse(read_file(path), rows)) throw IoError("malformed manifest " + path.string());
  if (rows.empty() || rows[0] != std::vector<std::string>{"label", "image"})
    throw IoError("manifest " + path.string() + " must start with the header label,image");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw IoError("manifest " + path.string() + " row " + std::to_string(i) + " needs 2 cells");
    out.emplace_back(rows[i][0], rows[i][1]);
  }
  return out;
}

DomainBinding DomainBinding::load(const Problem& problem) {
  DomainBinding b;
  b.domains_ = problem.domains;
  std::map<fs::path, std::vector<std::pair<std::string, std::string>>> manifests;
  for (const auto& d : problem.spec.domains) {
    if (d.sources.empty()) continue;
    const Domain& dom = problem.domains.at(d.name);
    auto& per_split = b.pools_[d.name];
    for (const auto& split : problem.spec.splits()) {
      auto src = d.sources.find(split);
      auto& pools = per_split[split];
      if (src == d.sources.end()) continue;
      fs::path path = src->second;
      if (path.is_relative()) path = problem.spec.base_dir / path;
      auto it = manifests.find(path);
      if (it == manifests.end()) it = manifests.emplace(path, read_manifest(path)).first;
      // Labels outside the domain (e.g. a subset of a larger dataset) are skipped.
      for (const auto& [label, image] : it->second)
        if (auto v = dom.value_of(label)) pools[*v].push_back(image);
    }
  }
  return b;
}

bool DomainBinding::synthetic(const std::string& domain) const { return !pools_.count(domain); }

const std::vector<std::string>* DomainBinding::pool(const std::string& domain, const std::string& split,
                                                    int value) const {
  static const std::vector<std::string> kEmpty;
  auto d = pools_.find(domain);
  if (d == pools_.end()) return nullptr;
  auto s = d->second.find(split);
  if (s == d->second.end()) return &kEmpty;
  auto v = s->second.find(value);
  return v == s->second.end() ? &kEmpty : &v->second;
}

std::string DomainBinding::draw(const std::string& domain, const std::string& split, int value, Rng& rng) const {
  const auto* p = pool(domain, split, value);
  if (!p) return "-";
  if (p->empty()) {
    const auto& dom = domains_.at(domain);
    throw DomainError("label '" + dom.label_of(value) + "' of domain '" + domain + "' has no images in split " + split);
  }
  return rng.pick(*p);
}

std::vector<SplitRecords> bind_sequences(const Problem& problem, const std::vector<SplitSequences>& data,
                                         const DomainBinding& binding) {
  const auto& vars = problem.variable_domains;
  std::vector<SplitRecords> out;
  for (const auto& split : data) {
    SplitRecords rec{split.split, {}};
    for (std::size_t i = 0; i < split.sequences.size(); ++i) {
      const auto& seq = split.sequences[i];
      Rng rng = Rng::derive(problem.spec.seed, "bind/" + split.split, i);
      SequenceRecord r;
      r.seq_id = static_cast<int>(i);
      r.label = seq.walk.target_label;
      for (std::size_t t = 0; t < seq.steps.size(); ++t) {
        const auto& a = seq.steps[t];
        StepRecord st;
        st.state_from = seq.walk.steps[t].from;
        st.state_to = seq.walk.steps[t].to;
        st.values = a.values;
        st.variable_relevant = a.variable_relevant;
        st.truths = a.truths;
        st.constraint_relevant = a.constraint_relevant;
        for (std::size_t v = 0; v < vars.size(); ++v)
          st.images.push_back(binding.draw(vars[v].second, split.split, a.values[v], rng));
        r.steps.push_back(std::move(st));
      }
      rec.sequences.push_back(std::move(r));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EpisodeSplitRecords> bind_episode(const Problem& problem, const std::vector<EpisodeSplit>& data,
                                              const DomainBinding& binding, int episode) {
  const auto& vars = problem.variable_domains;
  std::vector<EpisodeSplitRecords> out;
  for (const auto& split : data) {
    Rng rng = Rng::derive(problem.spec.seed, "bind/episode/" + split.split, static_cast<std::uint64_t>(episode));
    EpisodeSplitRecords rec{split.split, {}};
    for (std::size_t i = 0; i < split.samples.size(); ++i) {
      SampleRecord s;
      s.sample_id = static_cast<int>(i);
      s.values = split.samples[i].assignment.values;
      for (std::size_t v = 0; v < vars.size(); ++v)
        s.images.push_back(binding.draw(vars[v].second, split.split, s.values[v], rng));
      rec.samples.push_back(std::move(s));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

const char* bit(bool b) { return b ? "1" : "0"; }

std::vector<std::string> sequence_header(const Problem& p) {
  std::vector<std::string> h = {"seq_id", "t", "seq_label", "state_from", "state_to"};
  for (const auto& v : p.model.variables()) {
    h.push_back("img_" + v.name);
    h.push_back("lbl_" + v.name);
    h.push_back("rel_" + v.name);
  }
  for (const auto& c : p.model.constraints()) {
    h.push_back("c_" + c.name);
    h.push_back("rel_" + c.name);
  }
  return h;
}

void emit_sequences(const Problem& p, const SplitRecords& split, const fs::path& dir) {
  const auto& vars = p.model.variables();
  const auto& cons = p.model.constraints();
  std::string table = csv::row(sequence_header(p));
  std::string lines;
  for (const auto& seq : split.sequences) {
    json j;
    j["seq_id"] = seq.seq_id;
    j["label"] = seq.label;
    j["length"] = seq.steps.size();
    json states = json::array();
    if (!seq.steps.empty()) states.push_back(seq.steps.front().state_from);
    json steps = json::array();
    for (std::size_t t = 0; t < seq.steps.size(); ++t) {
      const auto& st = seq.steps[t];
      std::vector<std::string> cells = {std::to_string(seq.seq_id), std::to_string(t), bit(seq.label),
                                        std::to_string(st.state_from), std::to_string(st.state_to)};
      json sj;
      json images = json::object(), labels = json::object(), vrel = json::object();
      for (std::size_t v = 0; v < vars.size(); ++v) {
        const std::string label = vars[v].domain.label_of(st.values[v]);
        cells.push_back(st.images[v]);
        cells.push_back(label);
        cells.push_back(bit(st.variable_relevant[v]));
        images[vars[v].name] = st.images[v];
        labels[vars[v].name] = label;
        vrel[vars[v].name] = static_cast<bool>(st.variable_relevant[v]);
      }
      json truths = json::object(), crel = json::object();
      for (std::size_t k = 0; k < cons.size(); ++k) {
        cells.push_back(bit(st.truths[k]));
        cells.push_back(bit(st.constraint_relevant[k]));
        truths[cons[k].name] = static_cast<bool>(st.truths[k]);
        crel[cons[k].name] = static_cast<bool>(st.constraint_relevant[k]);
      }
      table += csv::row(cells);
      sj["images"] = images;
      sj["labels"] = labels;
      sj["variable_relevant"] = vrel;
      sj["truths"] = truths;
      sj["constraint_relevant"] = crel;
      steps.push_back(sj);
      states.push_back(st.state_to);
    }
    j["states"] = states;
    j["steps"] = steps;
    lines += j.dump() + "\n";
  }
  write_file(dir / (split.split + ".csv"), table);
  write_file(dir / (split.split + ".jsonl"), lines);
}

std::vector<std::string> sample_header(const Problem& p) {
  std::vector<std::string> h = {"sample_id"};
  const auto& vars = p.model.variables();
  if (vars.size() == 1) {
    h.push_back("img");
    h.push_back("label");
  } else {
    for (const auto& v : vars) {
      h.push_back("img_" + v.name);
      h.push_back("label_" + v.name);
    }
  }
  return h;
}

std::string episode_dir_name(int e, int episodes) {
  int width = 2;
  for (int n = episodes - 1; n >= 100; n /= 10) ++width;
  std::ostringstream out;
  out << "episode_" << std::setw(width) << std::setfill('0') << e;
  return out.str();
}

json truths_json(const Problem& p, std::uint32_t minterm) {
  json t = json::object();
  for (std::size_t i = 0; i < p.atoms.size(); ++i) t[p.atoms[i]] = static_cast<bool>((minterm >> i) & 1u);
  return t;
}

void collect_digests(const fs::path& root, const fs::path& dir, std::map<std::string, std::string>& out) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) {
      collect_digests(root, entry.path(), out);
    } else if (entry.path().filename() != "manifest.json") {
      out[fs::relative(entry.path(), root).generic_string()] = sha256_file(entry.path());
    }
  }
}

}  // namespace

GenerateReport generate(const TaskSpec& input, const fs::path& out_dir, const GenerateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  TaskSpec spec = input;
  if (options.seed_override) spec.seed = *options.seed_override;
  // The copy stored with the data must locate the manifests on its own.
  for (auto& d : spec.domains)
    for (auto& [split, path] : d.sources) {
      fs::path p = path;
      if (p.is_relative()) path = fs::absolute(spec.base_dir / p).lexically_normal().string();
    }

  const Problem problem = resolve(spec);
  SolutionCache cache(problem.model);
  const DomainBinding binding = DomainBinding::load(problem);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  write_file(out_dir / "spec.json", serialize_spec(spec));
  write_file(out_dir / "automaton.json", export_sfa(problem.automaton, ExportFormat::Json));
  write_file(out_dir / "automaton.dot", export_sfa(problem.automaton, ExportFormat::Dot));

  if (spec.mode == Mode::Sequential) {
    SamplerOptions so;
    so.workers = options.workers;
    const auto data = sample_sequential_dataset(problem, cache, so);
    for (const auto& split : bind_sequences(problem, data, binding)) emit_sequences(problem, split, out_dir);
  } else {
    Rng rng = Rng::derive(spec.seed, "curriculum");
    const Curriculum cur = sample_curriculum(problem, cache, rng);
    const auto header = csv::row(sample_header(problem));
    const auto& vars = problem.model.variables();
    json episodes = json::array(), guards = json::array(), truths = json::array();
    for (int e = 0; e < static_cast<int>(cur.episodes.size()); ++e) {
      const Episode& ep = cur.episodes[e];
      const std::string name = episode_dir_name(e, spec.episodes);
      fs::create_directories(out_dir / name, ec);
      if (ec) throw IoError("cannot create " + (out_dir / name).string());
      const auto bound = bind_episode(problem, sample_episode(problem, cache, cur, e), binding, e);
      json counts = json::object();
      for (const auto& split : bound) {
        std::string table = header;
        for (const auto& s : split.samples) {
          std::vector<std::string> cells = {std::to_string(s.sample_id)};
          for (std::size_t v = 0; v < vars.size(); ++v) {
            cells.push_back(s.images[v]);
            cells.push_back(vars[v].domain.label_of(s.values[v]));
          }
          table += csv::row(cells);
        }
        write_file(out_dir / name / (split.split + ".csv"), table);
        counts[split.split] = split.samples.size();
      }
      json ej;
      ej["index"] = e;
      ej["directory"] = name;
      ej["from"] = ep.from;
      ej["to"] = ep.to;
      ej["guard"] = ep.guard.to_string();
      ej["constraint_truths"] = truths_json(problem, ep.minterm);
      ej["orphans"] = ep.orphans;
      ej["samples"] = counts;
      episodes.push_back(ej);
      guards.push_back(ep.guard.to_string());
      truths.push_back(truths_json(problem, ep.minterm));
    }
    json schedule = json::object();
    for (const auto& [orphan, e] : cur.orphan_schedule) schedule[orphan] = e >= 0 ? json(e) : json(nullptr);
    json cj;
    cj["atoms"] = problem.atoms;
    cj["orphans"] = problem.orphans;
    cj["orphan_positive_ratio"] = spec.orphan_positive_ratio;
    cj["states"] = cur.states;
    cj["guards"] = guards;
    cj["constraint_truths"] = truths;
    cj["orphan_schedule"] = schedule;
    cj["episodes"] = episodes;
    write_file(out_dir / "curriculum.json", cj.dump(2) + "\n");
  }

  GenerateReport report;
  report.out_dir = out_dir;
  report.automaton_states = static_cast<std::size_t>(problem.automaton.num_states());
  collect_digests(out_dir, out_dir, report.digests);
  report.cache = cache.stats();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json m;
  m["tool"] = "ltlfgen";
  m["version"] = LTLFGEN_VERSION;
  m["name"] = spec.name;
  m["mode"] = spec.mode == Mode::Sequential ? "sequential" : "incremental";
  m["seed"] = spec.seed;
  m["spec_digest"] = report.digests.at("spec.json");
  m["image_sampling"] = "uniform with replacement";
  m["files"] = report.digests;
  m["wall_clock_seconds"] = report.seconds;
  m["cache"] = {{"hits", report.cache.hits},
                {"misses", report.cache.misses},
                {"pools", report.cache.pools},
                {"solutions", report.cache.solutions}};
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");

  report.validation = validate_dataset(out_dir);
  return report;
}

}  // namespace ltlfgen
