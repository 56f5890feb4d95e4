// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlbp/harness.hpp"
#include "rlbp/predictor.hpp"
#include "rlbp/trace.hpp"

namespace rlbp {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Line-oriented config file: [section] headers followed by key = value
/// pairs. Sections are [trace], [trace.NAME], [predictor.NAME] and [sweep].
/// Full-line # comments and blank lines are ignored. Unknown sections,
/// unknown keys and duplicate keys are errors.
struct ConfigFile {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const;
  };

  std::vector<Section> sections;

  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin);

  const Section* find_section(const std::string& name) const;

  /// Canonical text form; parse(serialize(parse(x))) == parse(x).
  std::string serialize() const;
};

/// Synthetic recipe from a [trace] / [trace.NAME] section. Interleaved
/// specs resolve their `parts = A,B` references against other [trace.*]
/// sections of the same file.
SyntheticSpec synthetic_from_section(const ConfigFile& file,
                                     const ConfigFile::Section& section);

PredictorConfig predictor_from_section(const ConfigFile::Section& section);

struct SweepSpec {
  ExperimentConfig experiment;
  std::string out_path;  // empty when the [sweep] section names none
};

/// Experiment from the [sweep] section. `predictors` references
/// [predictor.NAME] sections; `traces` entries are file paths, or @NAME
/// references to [trace.NAME] sections.
SweepSpec sweep_from_config(const ConfigFile& file);

/// Strict whole-file check: every section well-formed, every key known,
/// every reference resolvable.
void validate_config_file(const ConfigFile& file);

}  // namespace rlbp
