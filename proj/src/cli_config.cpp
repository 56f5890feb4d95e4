// SPDX-License-Identifier: Apache-2.0
#include "rlbp/cli_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace rlbp {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

/// Tracks which keys a section consumer looked at, so leftovers can be
/// reported as unknown keys.
class SectionReader {
 public:
  explicit SectionReader(const ConfigFile::Section& section) : section_(section) {}

  bool has(const std::string& key) {
    if (const std::string* v = section_.find(key)) {
      used_.insert(key);
      (void)v;
      return true;
    }
    return false;
  }

  std::string get(const std::string& key, const std::string& fallback) {
    if (const std::string* v = section_.find(key)) {
      used_.insert(key);
      return *v;
    }
    return fallback;
  }

  std::string require(const std::string& key) {
    if (const std::string* v = section_.find(key)) {
      used_.insert(key);
      return *v;
    }
    fail(where(), "missing required key '" + key + "'");
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const std::string raw = get(key, "");
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      fail(where(), "key '" + key + "' is not a number: '" + raw + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string raw = get(key, "");
    std::uint64_t v = 0;
    const char* first = raw.data();
    const char* last = raw.data() + raw.size();
    int base = 10;
    if (raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X')) {
      first += 2;
      base = 16;
    }
    auto [ptr, ec] = std::from_chars(first, last, v, base);
    if (ec != std::errc{} || ptr != last)
      fail(where(), "key '" + key + "' is not an unsigned integer: '" + raw + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string raw = get(key, "");
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    fail(where(), "key '" + key + "' must be true/false: '" + raw + "'");
  }

  void finish() const {
    for (const auto& [key, value] : section_.entries)
      if (!used_.count(key)) fail(where(), "unknown key '" + key + "'");
  }

  std::string where() const { return "[" + section_.name + "]"; }

 private:
  const ConfigFile::Section& section_;
  std::set<std::string> used_;
};

}  // namespace

const std::string* ConfigFile::Section::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const ConfigFile::Section* ConfigFile::find_section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile file;
  Section* current = nullptr;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') fail(where, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) fail(where, "empty section name");
      if (file.find_section(name)) fail(where, "duplicate section [" + name + "]");
      file.sections.push_back(Section{name, {}});
      current = &file.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, "expected key = value");
    if (!current) fail(where, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(where, "empty key");
    if (current->find(key))
      fail(where, "duplicate key '" + key + "' in [" + current->name + "]");
    current->entries.emplace_back(key, value);
  }
  return file;
}

std::string ConfigFile::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out += '\n';
    out += '[' + sections[i].name + "]\n";
    for (const auto& [k, v] : sections[i].entries) out += k + " = " + v + '\n';
  }
  return out;
}

namespace {

SyntheticSpec synthetic_from_section_impl(const ConfigFile& file,
                                          const ConfigFile::Section& section,
                                          bool allow_interleaved) {
  SectionReader r(section);
  SyntheticSpec spec;
  spec.kind = synthetic_kind_from_name(r.require("kind"));
  if (section.name.rfind("trace.", 0) == 0)
    spec.name = section.name.substr(6);
  else
    spec.name = "trace";
  spec.length = r.get_u64("length", 0);
  spec.seed = r.get_u64("seed", 1);
  spec.pc = r.get_u64("pc", 0x400000);
  switch (spec.kind) {
    case SyntheticKind::Pattern:
      spec.pattern = r.require("pattern");
      break;
    case SyntheticKind::XorOfHistory:
      spec.xor_i = r.get_u64("i", 1);
      spec.xor_j = r.get_u64("j", 2);
      break;
    case SyntheticKind::NoisyLinear: {
      for (const auto& w : split_list(r.require("weights")))
        spec.weights.push_back(std::stod(w));
      spec.bias = r.get_double("bias", 0.0);
      spec.flip_prob = r.get_double("flip_prob", 0.0);
      break;
    }
    case SyntheticKind::RandomBias:
      spec.taken_prob = r.get_double("taken_prob", 0.5);
      break;
    case SyntheticKind::Interleaved: {
      if (!allow_interleaved)
        fail(r.where(), "interleaved parts cannot themselves be interleaved");
      for (const auto& part_name : split_list(r.require("parts"))) {
        const auto* part = file.find_section("trace." + part_name);
        if (!part)
          fail(r.where(), "parts references missing section [trace." + part_name + "]");
        spec.parts.push_back(synthetic_from_section_impl(file, *part, false));
      }
      break;
    }
  }
  r.has("out");  // consumed by gen-trace
  r.finish();
  return spec;
}

}  // namespace

SyntheticSpec synthetic_from_section(const ConfigFile& file,
                                     const ConfigFile::Section& section) {
  return synthetic_from_section_impl(file, section, true);
}

PredictorConfig predictor_from_section(const ConfigFile::Section& section) {
  SectionReader r(section);
  const PredictorKind kind = kind_from_name(r.require("kind"));
  PredictorConfig cfg = default_config(kind);
  if (section.name.rfind("predictor.", 0) == 0) cfg.name = section.name.substr(10);
  cfg.entries = r.get_u64("entries", cfg.entries);
  cfg.unbounded = r.get_bool("unbounded", cfg.unbounded);
  cfg.history_len = r.get_u64("history_len", cfg.history_len);
  cfg.counter_bits = static_cast<unsigned>(r.get_u64("counter_bits", cfg.counter_bits));
  cfg.alpha = r.get_double("alpha", cfg.alpha);
  cfg.gamma = r.get_double("gamma", cfg.gamma);
  cfg.epsilon = r.get_double("epsilon", cfg.epsilon);
  if (r.has("q_format")) {
    const std::string fmt = r.get("q_format", "");
    if (fmt == "q6")
      cfg.q_format = QFormat::Q6;
    else if (fmt == "full")
      cfg.q_format = QFormat::Full;
    else
      fail(r.where(), "q_format must be q6 or full");
  }
  if (r.has("weight_type"))
    cfg.weight_type = weight_type_from_name(r.get("weight_type", ""));
  if (r.has("theta"))
    cfg.perceptron_theta = static_cast<int>(r.get_u64("theta", 0));
  cfg.gehl_tables = r.get_u64("gehl_tables", cfg.gehl_tables);
  cfg.gehl_entries = r.get_u64("gehl_entries", cfg.gehl_entries);
  cfg.gehl_base_len = r.get_u64("gehl_base_len", cfg.gehl_base_len);
  cfg.gehl_ratio = r.get_double("gehl_ratio", cfg.gehl_ratio);
  if (r.has("gehl_theta"))
    cfg.gehl_theta = static_cast<int>(r.get_u64("gehl_theta", 0));
  if (r.has("mode")) {
    const std::string mode = r.get("mode", "");
    if (mode == "greedy")
      cfg.policy_mode = PolicyMode::Greedy;
    else if (mode == "sample")
      cfg.policy_mode = PolicyMode::Sample;
    else
      fail(r.where(), "mode must be greedy or sample");
  }
  cfg.seed = r.get_u64("seed", cfg.seed);
  r.finish();
  validate_config(cfg);
  return cfg;
}

SweepSpec sweep_from_config(const ConfigFile& file) {
  const auto* section = file.find_section("sweep");
  if (!section) throw ConfigError("config has no [sweep] section");
  SectionReader r(*section);
  SweepSpec spec;

  for (const auto& name : split_list(r.require("predictors"))) {
    const auto* psec = file.find_section("predictor." + name);
    if (!psec)
      fail(r.where(), "predictors references missing section [predictor." + name + "]");
    spec.experiment.predictors.push_back(predictor_from_section(*psec));
  }

  for (const auto& entry : split_list(r.require("traces"))) {
    TraceSource src;
    if (!entry.empty() && entry[0] == '@') {
      const std::string name = entry.substr(1);
      const auto* tsec = file.find_section("trace." + name);
      if (!tsec)
        fail(r.where(), "traces references missing section [trace." + name + "]");
      src.label = name;
      src.spec = synthetic_from_section(file, *tsec);
    } else {
      src.file = entry;
      src.label = std::filesystem::path(entry).stem().string();
    }
    spec.experiment.traces.push_back(std::move(src));
  }

  for (const auto& l : split_list(r.require("history_lengths")))
    spec.experiment.history_lengths.push_back(std::stoull(l));

  if (r.has("budget_bits"))
    spec.experiment.budget_bits = r.get_u64("budget_bits", 0);
  spec.experiment.metric = metric_from_name(r.get("metric", "auto"));
  spec.experiment.warmup = r.get_u64("warmup", spec.experiment.warmup);
  spec.experiment.master_seed = r.get_u64("seed", spec.experiment.master_seed);
  spec.experiment.threads =
      static_cast<unsigned>(r.get_u64("threads", spec.experiment.threads));
  spec.out_path = r.get("out", "");
  r.finish();
  validate_experiment(spec.experiment);
  return spec;
}

void validate_config_file(const ConfigFile& file) {
  for (const auto& section : file.sections) {
    if (section.name == "trace" || section.name.rfind("trace.", 0) == 0) {
      SyntheticSpec spec = synthetic_from_section(file, section);
      // Sections used only as interleaved parts may omit length.
      if (spec.length == 0) spec.length = 1;
      validate_spec(spec);
    } else if (section.name.rfind("predictor.", 0) == 0) {
      predictor_from_section(section);
    } else if (section.name == "sweep") {
      sweep_from_config(file);
    } else {
      throw ConfigError("unknown section [" + section.name + "]");
    }
  }
}

}  // namespace rlbp
