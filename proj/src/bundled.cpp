// The predefined benchmark tasks.  Every domain is label-only (synthetic);
// attach manifests through `sources` to bind real images.

#include <string>
#include <vector>

#include "ltlfgen/spec.hpp"

namespace ltlfgen {

namespace {

const std::vector<std::string> kFmnist10 = {"bag",      "boot",  "coat",  "dress",   "pullover",
                                            "sandal",   "shirt", "sneaker", "top",   "trouser"};
const std::vector<std::string> kFmnist5 = {"sandal", "shirt", "sneaker", "top", "trouser"};

struct Superclass {
  const char* name;
  std::vector<std::string> classes;
};

const std::vector<Superclass>& cifar100_superclasses() {
  static const std::vector<Superclass> kTable = {
      {"aquatic_mammals", {"beaver", "dolphin", "otter", "seal", "whale"}},
      {"fish", {"aquarium_fish", "flatfish", "ray", "shark", "trout"}},
      {"flowers", {"orchid", "poppy", "rose", "sunflower", "tulip"}},
      {"food_containers", {"bottle", "bowl", "can", "cup", "plate"}},
      {"fruit_and_vegetables", {"apple", "mushroom", "orange", "pear", "sweet_pepper"}},
      {"household_electrical_devices", {"clock", "keyboard", "lamp", "telephone", "television"}},
      {"household_furniture", {"bed", "chair", "couch", "table", "wardrobe"}},
      {"insects", {"bee", "beetle", "butterfly", "caterpillar", "cockroach"}},
      {"large_carnivores", {"bear", "leopard", "lion", "tiger", "wolf"}},
      {"large_man_made_outdoor_things", {"bridge", "castle", "house", "road", "skyscraper"}},
      {"large_natural_outdoor_scenes", {"cloud", "forest", "mountain", "plain", "sea"}},
      {"large_omnivores_and_herbivores", {"camel", "cattle", "chimpanzee", "elephant", "kangaroo"}},
      {"medium_mammals", {"fox", "porcupine", "possum", "raccoon", "skunk"}},
      {"non_insect_invertebrates", {"crab", "lobster", "snail", "spider", "worm"}},
      {"people", {"baby", "boy", "girl", "man", "woman"}},
      {"reptiles", {"crocodile", "dinosaur", "lizard", "snake", "turtle"}},
      {"small_mammals", {"hamster", "mouse", "rabbit", "shrew", "squirrel"}},
      {"trees", {"maple_tree", "oak_tree", "palm_tree", "pine_tree", "willow_tree"}},
      {"vehicles_1", {"bicycle", "bus", "motorcycle", "pickup_truck", "train"}},
      {"vehicles_2", {"lawn_mower", "rocket", "streetcar", "tank", "tractor"}},
  };
  return kTable;
}

std::vector<std::string> cifar100_classes() {
  std::vector<std::string> out;
  for (const auto& s : cifar100_superclasses()) out.insert(out.end(), s.classes.begin(), s.classes.end());
  return out;
}

// "Y in {...}" over the union of the named superclasses.
std::string membership(const std::vector<std::string>& superclasses) {
  std::string body = "Y in {";
  bool first = true;
  for (const auto& name : superclasses)
    for (const auto& s : cifar100_superclasses())
      if (name == s.name)
        for (const auto& c : s.classes) {
          if (!first) body += ", ";
          first = false;
          body += c;
        }
  return body + "}";
}

const std::vector<std::string> kAnimals = {"aquatic_mammals",
                                           "fish",
                                           "insects",
                                           "large_carnivores",
                                           "large_omnivores_and_herbivores",
                                           "medium_mammals",
                                           "non_insect_invertebrates",
                                           "people",
                                           "reptiles",
                                           "small_mammals"};
const std::vector<std::string> kPlants = {"flowers", "fruit_and_vegetables", "trees"};
const std::vector<std::string> kInside = {"food_containers", "household_electrical_devices", "household_furniture"};
const std::vector<std::string> kOutside = {"large_man_made_outdoor_things", "large_natural_outdoor_scenes",
                                           "vehicles_1", "vehicles_2"};

DomainDef range_domain(std::string name, int lo, int hi) {
  DomainDef d;
  d.name = std::move(name);
  d.lo = lo;
  d.hi = hi;
  return d;
}

DomainDef label_domain(std::string name, std::vector<std::string> labels) {
  DomainDef d;
  d.name = std::move(name);
  d.integer = false;
  d.labels = std::move(labels);
  return d;
}

TaskSpec sequential(std::string name, std::uint64_t seed, bool long_variant) {
  TaskSpec s;
  s.name = std::move(name);
  s.mode = Mode::Sequential;
  s.seed = seed;
  s.length = long_variant ? LengthRange{50, 100} : LengthRange{10, 20};
  s.counts = {{"train", 320}, {"val", 40}, {"test", 40}};
  s.balance = Balance::Balanced;
  s.bias.self_loop_decay = 0.1;
  s.bias.sink_decay = 0.01;
  return s;
}

std::vector<TaskSpec> sequential_tasks() {
  std::vector<TaskSpec> out;
  for (int variant = 0; variant < 2; ++variant) {
    const bool lng = variant == 1;
    const std::string suffix = lng ? "_long" : "_short";
    const std::uint64_t base = lng ? 2000 : 1000;

    for (int task = 1; task <= 2; ++task) {
      TaskSpec s = sequential("task" + std::to_string(task) + suffix, base + task, lng);
      s.domains = {label_domain("fmnist10", kFmnist10), label_domain("fmnist5", kFmnist5)};
      s.variables = {{"V", "fmnist5"}, {"W", "fmnist5"}, {"X", "fmnist5"}, {"Y", "fmnist10"}, {"Z", "fmnist10"}};
      s.constraints = {{"p", {"Y", "Z"}, "Y < Z"}, {"q", {"V", "W", "X"}, "all_equal([V, W, X])"}};
      if (task == 1) {
        s.formula = "G (p <-> X X q)";
        s.bias.sink_decay = 0.0;
      } else {
        s.formula = "G ((p & X p & X X p) -> X X X q)";
      }
      out.push_back(std::move(s));
    }
    for (int task = 3; task <= 4; ++task) {
      TaskSpec s = sequential("task" + std::to_string(task) + suffix, base + task, lng);
      if (task == 3) {
        s.domains = {range_domain("mnist", 0, 9)};
        s.variables = {{"X", "mnist"}, {"Y", "mnist"}, {"Z", "mnist"}};
      } else {
        s.domains = {range_domain("mnist", 0, 9), range_domain("fmnist", 0, 9)};
        s.variables = {{"X", "mnist"}, {"Y", "fmnist"}, {"Z", "fmnist"}};
      }
      s.constraints = {{"p", {"X", "Y", "Z"}, "all_different([X, Y, Z])"}, {"q", {"X", "Y", "Z"}, "X < Y + Z"}};
      s.formula = "F p & (q U X p)";
      out.push_back(std::move(s));
    }
    {
      TaskSpec s = sequential("task5" + suffix, base + 5, lng);
      s.domains = {range_domain("mnist", 0, 9)};
      s.variables = {{"W", "mnist"}, {"X", "mnist"}, {"Y", "mnist"}, {"Z", "mnist"}};
      s.constraints = {{"p", {"W", "X", "Y", "Z"}, "W + X = Y + Z"}};
      s.formula = "G (p <-> WX !p)";
      out.push_back(std::move(s));
    }
    {
      TaskSpec s = sequential("task6" + suffix, base + 6, lng);
      s.domains = {range_domain("mnist", 0, 9)};
      s.variables = {{"X", "mnist"}, {"Y", "mnist"}, {"Z", "mnist"}};
      s.constraints = {{"p", {"X", "Y", "Z"}, "X + Y = Z"}, {"q", {"X", "Y", "Z"}, "X + Y = 2 * Z"}};
      s.formula = "G (p <-> WX !q)";
      out.push_back(std::move(s));
    }
  }
  return out;
}

TaskSpec incremental(std::string name, std::uint64_t seed, int episodes, double ratio) {
  TaskSpec s;
  s.name = std::move(name);
  s.mode = Mode::Incremental;
  s.seed = seed;
  s.episodes = episodes;
  s.samples_per_episode = 1000;
  s.split_fractions = {{"train", 0.8}, {"val", 0.1}, {"test", 0.1}};
  s.balance = Balance::AllPositive;
  s.bias.orphan_coverage = OrphanCoverage::BestEffort;
  s.orphan_positive_ratio = ratio;
  return s;
}

std::vector<TaskSpec> incremental_tasks() {
  std::vector<TaskSpec> out;
  {
    TaskSpec s = incremental("ccl_task1_mnist", 3001, 10, 1.0);
    s.domains = {range_domain("mnist", 0, 9)};
    s.variables = {{"Y", "mnist"}};
    s.constraints = {{"even", {"Y"}, "Y in {2, 4, 6, 8}"}, {"odd", {"Y"}, "Y in {1, 3, 5, 7, 9}"},
                     {"zero", {"Y"}, "Y = 0"}};
    s.formula = "!zero & (!zero U (zero & WX G !zero))";
    out.push_back(std::move(s));
  }
  {
    TaskSpec s = incremental("ccl_task1_cifar100", 3002, 50, 1.0);
    s.domains = {label_domain("cifar100", cifar100_classes())};
    s.variables = {{"Y", "cifar100"}};
    std::vector<std::string> inanimate = kInside;
    inanimate.insert(inanimate.end(), kOutside.begin(), kOutside.end());
    s.constraints = {{"animals", {"Y"}, membership(kAnimals)},
                     {"plants", {"Y"}, membership(kPlants)},
                     {"inanimate", {"Y"}, membership(inanimate)}};
    s.formula = "!plants & (!plants U (plants & WX G !plants))";
    out.push_back(std::move(s));
  }
  {
    TaskSpec s = incremental("ccl_task2_mnist", 3003, 20, 0.5);
    s.domains = {range_domain("mnist", 0, 9)};
    s.variables = {{"Y", "mnist"}};
    s.constraints = {{"p", {"Y"}, "Y in {0, 1, 2}"}, {"q", {"Y"}, "Y in {3, 4, 5}"},
                     {"r", {"Y"}, "Y in {6, 7, 8}"}, {"s", {"Y"}, "Y = 9"}};
    s.formula = "G (p <-> (X !q & X WX q))";
    out.push_back(std::move(s));
  }
  {
    TaskSpec s = incremental("ccl_task2_cifar100", 3004, 50, 0.5);
    s.domains = {label_domain("cifar100", cifar100_classes())};
    s.variables = {{"Y", "cifar100"}};
    s.constraints = {{"animals", {"Y"}, membership(kAnimals)},
                     {"plants", {"Y"}, membership(kPlants)},
                     {"inside", {"Y"}, membership(kInside)},
                     {"outside", {"Y"}, membership(kOutside)}};
    s.formula = "G (inside <-> (X !outside & X WX outside))";
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<TaskSpec> bundled_tasks() {
  std::vector<TaskSpec> out = sequential_tasks();
  for (auto& t : incremental_tasks()) out.push_back(std::move(t));
  return out;
}

}  // namespace ltlfgen
