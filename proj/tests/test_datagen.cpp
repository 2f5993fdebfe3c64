#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ltlfgen/datagen.hpp"
#include "ltlfgen/error.hpp"

using namespace ltlfgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ltlfgen_dg_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Rows of a CSV without quoting, header included.
std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    out.push_back(cells);
  }
  return out;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  FAIL("no column " << name);
  return -1;
}

// Three images per digit 0..3; test images are disjoint from train ones.
void write_manifests(const fs::path& dir, bool drop_three = false) {
  std::ofstream train(dir / "train.csv"), test(dir / "test.csv");
  train << "label,image\n";
  test << "label,image\n";
  for (int d = 0; d < 4; ++d) {
    if (drop_three && d == 3) continue;
    for (int k = 0; k < 3; ++k) {
      train << d << ",train/" << d << "_" << k << ".png\n";
      test << d << ",test/" << d << "_" << k << ".png\n";
    }
  }
  // A label outside the domain is ignored.
  train << "7,train/7_0.png\n";
}

TaskSpec image_spec(const fs::path& dir) {
  const char* text = R"js({
  "name": "digits",
  "mode": "sequential",
  "seed": 9,
  "domains": [{"name": "d", "range": [0, 3],
               "sources": {"train": "train.csv", "val": "train.csv", "test": "test.csv"}}],
  "variables": {"A": "d", "B": "d", "C": "d"},
  "constraints": {
    "p": {"params": ["A", "B"], "body": "A < B"},
    "q": {"params": ["C"], "body": "C = 3"},
    "r": {"params": ["A", "C"], "body": "A + C = 3"}
  },
  "formula": "F q & G (p -> WX !p)",
  "length": {"min": 3, "max": 6},
  "counts": {"train": 20, "val": 6, "test": 6}
})js";
  return load_spec(text, dir);
}

std::map<std::string, std::string> manifest_labels(const fs::path& p) {
  std::map<std::string, std::string> out;
  for (const auto& [label, image] : read_manifest(p)) out[image] = label;
  return out;
}

// Every regular file under dir, relative path -> contents.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("manifests") {
  TempDir tmp("manifest");
  write_manifests(tmp.path);
  const auto rows = read_manifest(tmp.path / "train.csv");
  CHECK(rows.size() == 13);
  CHECK(rows[0] == std::pair<std::string, std::string>{"0", "train/0_0.png"});
  std::ofstream(tmp.path / "bad.csv") << "image,label\n0,x\n";
  CHECK_THROWS_AS(read_manifest(tmp.path / "bad.csv"), IoError);
  CHECK_THROWS_AS(read_manifest(tmp.path / "missing.csv"), IoError);
}

TEST_CASE("images come from the pool of their label and split") {
  TempDir tmp("bind");
  write_manifests(tmp.path);
  const TaskSpec spec = image_spec(tmp.path);
  const auto report = generate(spec, tmp.path / "out");
  CHECK(report.validation.ok());
  const auto train = manifest_labels(tmp.path / "train.csv");
  const auto test = manifest_labels(tmp.path / "test.csv");
  for (const char* split : {"train", "val", "test"}) {
    const auto rows = rows_of(tmp.path / "out" / (std::string(split) + ".csv"));
    REQUIRE(rows.size() > 1);
    const auto& pool = std::string(split) == "test" ? test : train;
    for (const char* v : {"A", "B", "C"}) {
      const int img = column(rows[0], std::string("img_") + v), lbl = column(rows[0], std::string("lbl_") + v);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        REQUIRE(pool.count(rows[r][img]));
        CHECK(pool.at(rows[r][img]) == rows[r][lbl]);
      }
    }
  }
  const Problem p = resolve(spec);
  const DomainBinding b = DomainBinding::load(p);
  CHECK_FALSE(b.synthetic("d"));
  CHECK(b.pool("d", "test", 2)->size() == 3);
  Rng rng(1);
  CHECK(b.draw("d", "val", 1, rng).rfind("train/1_", 0) == 0);
}

TEST_CASE("a label without images is a domain error") {
  TempDir tmp("empty_pool");
  write_manifests(tmp.path, true);
  const TaskSpec spec = image_spec(tmp.path);
  const Problem p = resolve(spec);
  const DomainBinding b = DomainBinding::load(p);
  Rng rng(0);
  CHECK_THROWS_WITH_AS(b.draw("d", "train", 3, rng), "label '3' of domain 'd' has no images in split train", DomainError);
  // Every positive sequence needs q, which needs C = 3.
  CHECK_THROWS_AS(generate(spec, tmp.path / "out"), DomainError);
}

TEST_CASE("synthetic domains emit placeholders") {
  TempDir tmp("synthetic");
  TaskSpec spec = *bundled_task("task5_short");
  spec.counts = {{"train", 8}, {"val", 2}, {"test", 2}};
  const auto report = generate(spec, tmp.path);
  CHECK(report.validation.ok());
  for (const char* f : {"train.csv", "val.csv", "test.csv", "train.jsonl", "automaton.json", "automaton.dot",
                        "spec.json", "manifest.json"})
    CHECK_MESSAGE(fs::exists(tmp.path / f), f);
  const auto rows = rows_of(tmp.path / "train.csv");
  const int img = column(rows[0], "img_" + resolve(spec).model.variables()[0].name);
  for (std::size_t r = 1; r < rows.size(); ++r) CHECK(rows[r][img] == "-");
  const json m = json::parse(slurp(tmp.path / "manifest.json"));
  CHECK(m["seed"] == spec.seed);
  CHECK(m["files"]["train.csv"] == sha256_file(tmp.path / "train.csv"));
}

TEST_CASE("validation pinpoints a flipped truth cell") {
  TempDir tmp("flip");
  write_manifests(tmp.path);
  generate(image_spec(tmp.path), tmp.path / "out");
  const fs::path f = tmp.path / "out" / "train.csv";
  auto rows = rows_of(f);
  const int c = column(rows[0], "c_r");
  const int seq = std::stoi(rows[3][0]), t = std::stoi(rows[3][1]);
  rows[3][c] = rows[3][c] == "1" ? "0" : "1";
  std::string text;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + r[i];
    text += "\n";
  }
  std::ofstream(f, std::ios::binary) << text;
  const ValidationReport v = validate_dataset(tmp.path / "out");
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].where == "train sequence " + std::to_string(seq) + " t=" + std::to_string(t));
  CHECK(v.violations[0].message.find(" r ") != std::string::npos);
  CHECK(v.warnings.size() == 1);
  CHECK_THROWS_AS(validate_dataset(tmp.path / "nowhere"), IoError);
}

TEST_CASE("split hygiene catches shared images") {
  TempDir tmp("hygiene");
  write_manifests(tmp.path);
  generate(image_spec(tmp.path), tmp.path / "out");
  // Make the test manifest overlap with the training one.
  std::ofstream(tmp.path / "test.csv", std::ios::app) << "0,train/0_0.png\n";
  const ValidationReport v = validate_dataset(tmp.path / "out");
  CHECK_FALSE(v.ok());
}

TEST_CASE("output is independent of the worker count") {
  TempDir tmp("workers");
  write_manifests(tmp.path);
  const TaskSpec spec = image_spec(tmp.path);
  generate(spec, tmp.path / "one", {1, std::nullopt});
  generate(spec, tmp.path / "four", {4, std::nullopt});
  auto a = tree(tmp.path / "one"), b = tree(tmp.path / "four");
  REQUIRE(a.size() == b.size());
  for (auto& [name, text] : a) {
    if (name == "manifest.json") {
      auto ja = json::parse(text), jb = json::parse(b.at(name));
      ja.erase("wall_clock_seconds");
      jb.erase("wall_clock_seconds");
      CHECK(ja == jb);
    } else {
      CHECK_MESSAGE(text == b.at(name), name);
    }
  }
  generate(spec, tmp.path / "other", {1, 77});
  CHECK(tree(tmp.path / "other").at("train.csv") != a.at("train.csv"));
}

TEST_CASE("class-continual layout and marginals") {
  TempDir tmp("ccl");
  const auto report = generate(*bundled_task("ccl_task1_mnist"), tmp.path);
  CHECK(report.validation.ok());
  CHECK(report.validation.episodes == 10);
  const json cur = json::parse(slurp(tmp.path / "curriculum.json"));
  CHECK(cur["states"].size() == 11);
  CHECK(cur["guards"].size() == 10);
  int zero_episodes = 0;
  for (int e = 0; e < 10; ++e) {
    const fs::path dir = tmp.path / ("episode_0" + std::to_string(e));
    std::size_t total = 0;
    std::map<std::string, std::size_t> labels;
    for (const char* split : {"train", "val", "test"}) {
      const auto rows = rows_of(dir / (std::string(split) + ".csv"));
      CHECK(rows[0] == std::vector<std::string>{"sample_id", "img", "label"});
      for (std::size_t r = 1; r < rows.size(); ++r) ++labels[rows[r][2]];
      total += rows.size() - 1;
    }
    CHECK(total == 1000);
    if (cur["constraint_truths"][e]["zero"].get<bool>()) {
      ++zero_episodes;
      CHECK(labels["0"] == 1000);
    } else {
      CHECK(labels["0"] == 0);
    }
    for (const auto& o : cur["episodes"][e]["orphans"]) {
      const std::set<std::string> members =
          o == "even" ? std::set<std::string>{"2", "4", "6", "8"} : std::set<std::string>{"1", "3", "5", "7", "9"};
      std::size_t in = 0;
      for (const auto& [l, n] : labels) in += members.count(l) * n;
      CHECK(in == 1000);
    }
  }
  CHECK(zero_episodes == 1);
}

TEST_CASE("half of an orphan episode is forced") {
  TempDir tmp("ccl2");
  const auto report = generate(*bundled_task("ccl_task2_mnist"), tmp.path);
  CHECK(report.validation.ok());
  const json cur = json::parse(slurp(tmp.path / "curriculum.json"));
  int checked = 0;
  for (const auto& ep : cur["episodes"]) {
    if (ep["orphans"].empty()) continue;
    const std::string o = ep["orphans"][0];
    const std::set<std::string> members =
        o == "r" ? std::set<std::string>{"6", "7", "8"} : std::set<std::string>{"9"};
    std::size_t in = 0, total = 0;
    for (const char* split : {"train", "val", "test"}) {
      const auto rows = rows_of(tmp.path / ep["directory"].get<std::string>() / (std::string(split) + ".csv"));
      for (std::size_t r = 1; r < rows.size(); ++r) in += members.count(rows[r][2]);
      total += rows.size() - 1;
    }
    // 1000 draws at p = 0.5: four standard deviations is 0.064.
    CHECK(static_cast<double>(in) / total == doctest::Approx(0.5).epsilon(0.128));
    ++checked;
  }
  CHECK(checked == 2);
}

TEST_CASE("dataset statistics") {
  TempDir tmp("stats");
  TaskSpec spec = *bundled_task("task2_short");
  spec.counts = {{"train", 10}, {"val", 4}, {"test", 4}};
  generate(spec, tmp.path);
  const json s = json::parse(dataset_stats(tmp.path, true));
  CHECK(!s.empty());
  CHECK(dataset_stats(tmp.path).find("train") != std::string::npos);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
