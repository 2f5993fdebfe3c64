#pragma once

// Binding symbolic samples to image references, writing datasets to disk and
// re-checking them from the files alone.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ltlfgen/csp.hpp"
#include "ltlfgen/rng.hpp"
#include "ltlfgen/sampler.hpp"
#include "ltlfgen/spec.hpp"

namespace ltlfgen {

/// Image pools per (domain, split, value), read from `label,image` manifests.
class DomainBinding {
 public:
  static DomainBinding load(const Problem& problem);

  bool synthetic(const std::string& domain) const;
  /// Empty pointer when the domain is synthetic.
  const std::vector<std::string>* pool(const std::string& domain, const std::string& split, int value) const;
  /// Uniform with replacement; "-" for synthetic domains.  Throws DomainError
  /// when the label has no images in that split.
  std::string draw(const std::string& domain, const std::string& split, int value, Rng& rng) const;

 private:
  // domain -> split -> value -> image refs
  std::map<std::string, std::map<std::string, std::map<int, std::vector<std::string>>>> pools_;
  std::map<std::string, Domain> domains_;
};

/// Parses a manifest CSV with header `label,image`.
std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path);

struct StepRecord {
  int state_from = 0;
  int state_to = 0;
  std::vector<std::string> images;  // per model variable
  std::vector<int> values;          // per model variable
  std::vector<bool> variable_relevant;
  std::vector<bool> truths;  // per model constraint
  std::vector<bool> constraint_relevant;
};

struct SequenceRecord {
  int seq_id = 0;
  bool label = true;
  std::vector<StepRecord> steps;
};

struct SplitRecords {
  std::string split;
  std::vector<SequenceRecord> sequences;
};

std::vector<SplitRecords> bind_sequences(const Problem& problem, const std::vector<SplitSequences>& data,
                                         const DomainBinding& binding);

struct SampleRecord {
  int sample_id = 0;
  std::vector<std::string> images;  // per model variable
  std::vector<int> values;
};

struct EpisodeSplitRecords {
  std::string split;
  std::vector<SampleRecord> samples;
};

std::vector<EpisodeSplitRecords> bind_episode(const Problem& problem, const std::vector<EpisodeSplit>& data,
                                              const DomainBinding& binding, int episode);

struct GenerateOptions {
  unsigned workers = 1;
  std::optional<std::uint64_t> seed_override;
};

struct Violation {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  std::size_t sequences = 0;
  std::size_t steps = 0;
  std::size_t episodes = 0;
  std::size_t samples = 0;

  bool ok() const noexcept { return violations.empty(); }
};

struct GenerateReport {
  std::filesystem::path out_dir;
  std::map<std::string, std::string> digests;  // relative path -> sha256
  std::size_t automaton_states = 0;
  CacheStats cache;
  double seconds = 0;
  ValidationReport validation;
};

/// Samples, binds and writes a dataset, then validates it.
GenerateReport generate(const TaskSpec& spec, const std::filesystem::path& out_dir, const GenerateOptions& options = {});

/// Re-derives every annotation from the emitted files.  Throws IoError when
/// the directory cannot be read.
ValidationReport validate_dataset(const std::filesystem::path& dir);

/// Descriptive statistics; `json` selects machine-readable output.
std::string dataset_stats(const std::filesystem::path& dir, bool json = false);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ltlfgen
