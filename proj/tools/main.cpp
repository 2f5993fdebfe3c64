// ltlfgen command-line entry point.
//
// Exit codes: 0 ok, 1 validation failure, 2 parse/compile error,
// 3 infeasible request, 4 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ltlfgen/datagen.hpp"
#include "ltlfgen/error.hpp"
#include "ltlfgen/probeval.hpp"
#include "ltlfgen/sfa.hpp"
#include "ltlfgen/spec.hpp"

namespace fs = std::filesystem;
using namespace ltlfgen;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Compile:
      return 2;
    case ErrorKind::Infeasible:
      return 3;
    case ErrorKind::Io:
      return 4;
    case ErrorKind::Validation:
    case ErrorKind::Domain:
      return 1;
  }
  return 1;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << s)) throw IoError("cannot write " + p.string());
}

// A path to a spec file, or the name of a bundled task.
TaskSpec spec_from(const std::string& arg) {
  if (fs::exists(arg)) return load_spec_file(arg);
  if (auto t = bundled_task(arg)) return *t;
  throw IoError("no spec file or bundled task named '" + arg + "'");
}

std::vector<std::string> split_atoms(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string a; std::getline(in, a, ',');)
    if (!a.empty()) out.push_back(a);
  return out;
}

void print_report(const ValidationReport& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& v : r.violations) std::cout << "violation: " << v.where << ": " << v.message << "\n";
  std::cout << (r.ok() ? "valid" : "INVALID") << ": " << r.violations.size() << " violations";
  if (r.sequences) std::cout << ", " << r.sequences << " sequences, " << r.steps << " steps";
  if (r.episodes) std::cout << ", " << r.episodes << " episodes, " << r.samples << " samples";
  std::cout << "\n";
}

nlohmann::ordered_json report_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["ok"] = r.ok();
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) j["violations"].push_back({{"where", v.where}, {"message", v.message}});
  j["warnings"] = r.warnings;
  j["sequences"] = r.sequences;
  j["steps"] = r.steps;
  j["episodes"] = r.episodes;
  j["samples"] = r.samples;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate relational-temporal benchmark datasets from LTLf specifications"};
  app.set_version_flag("--version", std::string(LTLFGEN_VERSION));
  app.require_subcommand(1);

  auto* compile_cmd = app.add_subcommand("compile", "Compile a formula or spec to its minimal automaton");
  std::string compile_input, formula, atoms, compile_out;
  compile_cmd->add_option("input", compile_input, "Spec file or bundled task name");
  compile_cmd->add_option("--formula", formula, "LTLf formula");
  compile_cmd->add_option("--atoms", atoms, "Comma-separated alphabet (defaults to the formula atoms)");
  compile_cmd->add_option("-o,--out", compile_out, "Directory for automaton.json and automaton.dot");

  auto* gen_cmd = app.add_subcommand("generate", "Sample, write and validate a dataset");
  std::string gen_spec, gen_out;
  unsigned workers = 1;
  std::uint64_t seed_override = 0;
  gen_cmd->add_option("spec", gen_spec, "Spec file or bundled task name")->required();
  gen_cmd->add_option("out", gen_out, "Output directory")->required();
  gen_cmd->add_option("-w,--workers", workers, "Worker threads")->check(CLI::Range(1u, 256u));
  auto* seed_opt = gen_cmd->add_option("--seed-override", seed_override, "Replace the spec seed");

  auto* val_cmd = app.add_subcommand("validate", "Re-check a dataset from its files");
  std::string val_dir;
  bool val_json = false;
  val_cmd->add_option("dir", val_dir, "Dataset directory")->required();
  val_cmd->add_flag("--json", val_json, "JSON report");

  auto* stats_cmd = app.add_subcommand("stats", "Describe a dataset");
  std::string stats_dir;
  bool stats_json = false;
  stats_cmd->add_option("dir", stats_dir, "Dataset directory")->required();
  stats_cmd->add_flag("--json", stats_json, "JSON report");

  auto* probe_cmd = app.add_subcommand("probe", "Constraint and transition probabilities");
  std::string probe_file;
  bool probe_json = false;
  probe_cmd->add_option("file", probe_file, "Probe JSON")->required();
  probe_cmd->add_flag("--json", probe_json, "JSON report");

  auto* bundled_cmd = app.add_subcommand("bundled", "List or export the bundled task specs");
  std::string bundled_dir;
  bundled_cmd->add_option("--write", bundled_dir, "Write every spec as <dir>/<name>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*compile_cmd) {
      Sfa a;
      if (!formula.empty()) {
        CompileOptions co;
        co.extra_atoms = split_atoms(atoms);
        a = compile(parse_formula(formula), co);
      } else if (!compile_input.empty()) {
        a = resolve(spec_from(compile_input)).automaton;
      } else {
        throw ValidationError("compile needs --formula or a spec");
      }
      std::cout << "states: " << a.num_states() << "\naccepting: " << a.accepting_states().size()
                << "\ntransitions: " << a.num_transitions() << "\n";
      if (!compile_out.empty()) {
        fs::create_directories(compile_out);
        write_text(fs::path(compile_out) / "automaton.json", export_sfa(a, ExportFormat::Json));
        write_text(fs::path(compile_out) / "automaton.dot", export_sfa(a, ExportFormat::Dot));
      }
      return 0;
    }
    if (*gen_cmd) {
      GenerateOptions opts;
      opts.workers = workers;
      if (*seed_opt) opts.seed_override = seed_override;
      const auto r = generate(spec_from(gen_spec), gen_out, opts);
      std::cout << "wrote " << r.digests.size() << " files to " << r.out_dir.string() << " in " << r.seconds
                << " s (automaton states: " << r.automaton_states << ", cache pools: " << r.cache.pools << ")\n";
      print_report(r.validation);
      return r.validation.ok() ? 0 : 1;
    }
    if (*val_cmd) {
      const auto r = validate_dataset(val_dir);
      if (val_json)
        std::cout << report_json(r).dump(2) << "\n";
      else
        print_report(r);
      return r.ok() ? 0 : 1;
    }
    if (*stats_cmd) {
      std::cout << dataset_stats(stats_dir, stats_json);
      return 0;
    }
    if (*probe_cmd) {
      std::cout << format_probe(run_probe(load_probe(read_text(probe_file))), probe_json);
      return 0;
    }
    if (*bundled_cmd) {
      if (!bundled_dir.empty()) fs::create_directories(bundled_dir);
      for (const auto& t : bundled_tasks()) {
        if (bundled_dir.empty()) {
          std::cout << t.name << "\n";
        } else {
          write_text(fs::path(bundled_dir) / (t.name + ".json"), serialize_spec(t));
          std::cout << "wrote " << (fs::path(bundled_dir) / (t.name + ".json")).string() << "\n";
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
