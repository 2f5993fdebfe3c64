#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ltlfgen/error.hpp"
#include "ltlfgen/spec.hpp"

using namespace ltlfgen;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"js({
  "name": "small",
  "mode": "sequential",
  "seed": 5,
  "domains": [{"name": "d", "range": [0, 3]}, {"name": "pets", "labels": ["cat", "dog"]}],
  "variables": {"A": "d", "B": "d", "P": "pets"},
  "constraints": {"lt": {"params": ["A", "B"], "body": "A < B"}, "c": {"params": ["P"], "body": "P = cat"}},
  "formula": "G (lt -> X c)",
  "length": {"min": 2, "max": 4},
  "counts": {"train": 6, "test": 2}
})js";

nlohmann::json small() { return nlohmann::json::parse(kSmall); }

std::string with(const std::function<void(nlohmann::json&)>& edit) {
  auto j = small();
  edit(j);
  return j.dump();
}

}  // namespace

TEST_CASE("loading fills defaults") {
  const TaskSpec s = load_spec(kSmall);
  CHECK(s.name == "small");
  CHECK(s.mode == Mode::Sequential);
  CHECK(s.seed == 5);
  CHECK(s.balance == Balance::Balanced);
  CHECK(s.bias.self_loop_decay == 0);
  CHECK(s.splits() == std::vector<std::string>{"train", "test"});
  CHECK(s.variables.size() == 3);
  CHECK(s.variables[0].first == "A");
}

TEST_CASE("serialization round-trips") {
  const TaskSpec s = load_spec(kSmall);
  CHECK(load_spec(serialize_spec(s)) == s);
  for (const auto& t : bundled_tasks()) CHECK_MESSAGE(load_spec(serialize_spec(t)) == t, t.name);
}

TEST_CASE("invalid specifications are rejected") {
  using J = nlohmann::json;
  const std::vector<std::pair<std::string, std::function<void(J&)>>> cases = {
      {"unknown key", [](J& j) { j["colour"] = 1; }},
      {"bad mode", [](J& j) { j["mode"] = "batch"; }},
      {"negative seed", [](J& j) { j["seed"] = -1; }},
      {"unknown domain", [](J& j) { j["variables"]["A"] = "nope"; }},
      {"duplicate label", [](J& j) { j["domains"][1]["labels"] = {"cat", "cat"}; }},
      {"empty range", [](J& j) { j["domains"][0]["range"] = {3, 1}; }},
      {"unknown param", [](J& j) { j["constraints"]["lt"]["params"] = {"A", "Q"}; }},
      {"min above max", [](J& j) { j["length"] = {{"min", 5}, {"max", 4}}; }},
      {"zero min", [](J& j) { j["length"] = {{"min", 0}, {"max", 4}}; }},
      {"negative count", [](J& j) { j["counts"]["train"] = -1; }},
      {"bad decay", [](J& j) { j["bias"] = {{"self_loop_decay", -0.5}}; }},
      {"source for undeclared split", [](J& j) { j["domains"][0]["sources"] = {{"val", "x.csv"}}; }},
      {"bad identifier", [](J& j) { j["variables"] = {{"1A", "d"}}; }},
      {"unknown label in body", [](J& j) { j["constraints"]["c"]["body"] = "P = cow"; }},
  };
  for (const auto& [what, edit] : cases) CHECK_THROWS_AS_MESSAGE(load_spec(with(edit)), ValidationError, what);
  CHECK_THROWS_AS(load_spec(with([](J& j) { j["formula"] = "G (lt -> X"; })), ParseError);
  // Formula atoms that are not constraints are reported at their position.
  CHECK_THROWS_WITH_AS(load_spec(with([](J& j) { j["formula"] = "G (lt -> X zz)"; })),
                       "syntax error at position 11: unknown atom 'zz'", ParseError);
  CHECK_THROWS_AS(load_spec(with([](J& j) { j["constraints"]["lt"]["body"] = "A <"; })), ParseError);
  CHECK_THROWS_AS(load_spec("{ \"name\": "), ParseError);
}

TEST_CASE("incremental fields") {
  const TaskSpec t = *bundled_task("ccl_task1_mnist");
  CHECK(t.mode == Mode::Incremental);
  CHECK(t.episodes == 10);
  CHECK(t.samples_per_episode == 1000);
  CHECK(t.orphan_positive_ratio == 1.0);
  CHECK(t.balance == Balance::AllPositive);
  CHECK(t.bias.orphan_coverage == OrphanCoverage::BestEffort);
  CHECK(t.splits() == std::vector<std::string>{"train", "val", "test"});
  auto j = nlohmann::json::parse(serialize_spec(t));
  j["counts"]["splits"]["val"] = 0.2;
  CHECK_THROWS_AS(load_spec(j.dump()), ValidationError);
}

TEST_CASE("resolution derives the automaton alphabet and orphans") {
  const Problem p = resolve(*bundled_task("ccl_task2_mnist"));
  CHECK(p.atoms == std::vector<std::string>{"p", "q"});
  CHECK(p.orphans == std::vector<std::string>{"r", "s"});
  CHECK(p.model.constraints().size() == 4);
  CHECK(p.automaton.atoms() == p.atoms);
  const Problem q = resolve(load_spec(kSmall));
  CHECK(q.orphans.empty());
  CHECK(q.universe.labels() == std::vector<std::string>{"cat", "dog"});
}

TEST_CASE("streams give each occurrence its own variables") {
  auto j = small();
  j["formula"] = "G (lt -> X lt)";
  j["streams"] = nlohmann::json::array({
      {{"atom", "lt"}, {"occurrence", 1}, {"bindings", {{"B", "d"}}}},
  });
  const Problem p = resolve(load_spec(j.dump()));
  std::vector<std::string> vars;
  for (const auto& v : p.model.variables()) vars.push_back(v.name);
  CHECK(std::find(vars.begin(), vars.end(), "B_lt_1") != vars.end());
  CHECK(p.atoms == std::vector<std::string>{"lt", "lt_1"});
  const auto& c = p.model.constraints()[p.model.constraint_index("lt_1")];
  CHECK(c.params == std::vector<std::string>{"A", "B_lt_1"});
  // The first occurrence keeps the declared variables.
  CHECK(p.model.constraints()[p.model.constraint_index("lt")].params == std::vector<std::string>{"A", "B"});

  j["streams"][0]["bindings"]["B"] = {{"domain", "d"}, {"direction", "out"}, {"variable", "B2"}};
  const Problem named = resolve(load_spec(j.dump()));
  CHECK(named.model.constraints()[named.model.constraint_index("lt_1")].params == std::vector<std::string>{"A", "B2"});

  j["streams"][0]["occurrence"] = 4;
  CHECK_THROWS_AS(load_spec(j.dump()), ValidationError);
}

TEST_CASE("spec files resolve sources relative to their directory") {
  const fs::path dir = fs::temp_directory_path() / "ltlfgen_spec_test";
  fs::create_directories(dir);
  auto j = small();
  j["domains"][0]["sources"] = {{"train", "train.csv"}, {"test", "test.csv"}};
  std::ofstream(dir / "s.json") << j.dump();
  const TaskSpec s = load_spec_file(dir / "s.json");
  CHECK(s.base_dir == dir);
  CHECK(s.domains[0].sources.at("train") == "train.csv");
  CHECK_THROWS_AS(load_spec_file(dir / "missing.json"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("bundled spec files match the built-in tasks") {
  const fs::path specs = fs::path(LTLFGEN_SOURCE_DIR) / "specs";
  const auto tasks = bundled_tasks();
  CHECK(tasks.size() == 16);
  for (const auto& t : tasks) {
    const fs::path f = specs / (t.name + ".json");
    REQUIRE_MESSAGE(fs::exists(f), f.string());
    CHECK_MESSAGE(load_spec_file(f) == t, t.name);
    std::ifstream in(f);
    std::stringstream text;
    text << in.rdbuf();
    CHECK_MESSAGE(text.str() == serialize_spec(t), t.name);
  }
  CHECK_FALSE(bundled_task("task7_short").has_value());
}
