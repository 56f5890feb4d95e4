// SPDX-License-Identifier: Apache-2.0
#include "rlbp/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "rlbp/history.hpp"

namespace rlbp {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
  throw TraceFormatError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::uint64_t parse_pc(const std::string& field, const std::filesystem::path& path,
                       std::size_t line_no) {
  if (field.size() < 3 || field[0] != '0' || (field[1] != 'x' && field[1] != 'X'))
    fail_line(path, line_no, "pc must be hex with 0x prefix, got '" + field + "'");
  std::uint64_t pc = 0;
  const char* first = field.data() + 2;
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, pc, 16);
  if (ec != std::errc{} || ptr != last)
    fail_line(path, line_no, "pc is not valid hex: '" + field + "'");
  return pc;
}

}  // namespace

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open trace file: " + path.string());

  std::string line;
  if (!std::getline(in, line))
    throw TraceFormatError(path.string() + ": missing header");
  line = strip_cr(line);

  bool has_gap_column;
  if (line == "pc_hex,taken,inst_gap") {
    has_gap_column = true;
  } else if (line == "pc_hex,taken") {
    has_gap_column = false;
  } else {
    throw TraceFormatError(path.string() +
                           ": missing or malformed header, expected "
                           "'pc_hex,taken,inst_gap', got '" + line + "'");
  }

  Trace trace;
  trace.name = path.stem().string();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
      fail_line(path, line_no, "blank line");
    }
    const auto fields = split_csv(line);
    const std::size_t expected = has_gap_column ? 3 : 2;
    if (fields.size() != expected)
      fail_line(path, line_no, "expected " + std::to_string(expected) + " fields, got " +
                                   std::to_string(fields.size()));

    BranchRecord rec;
    rec.pc = parse_pc(fields[0], path, line_no);

    if (fields[1] == "0") {
      rec.outcome = Direction::NT;
    } else if (fields[1] == "1") {
      rec.outcome = Direction::T;
    } else {
      fail_line(path, line_no, "taken must be 0 or 1, got '" + fields[1] + "'");
    }

    if (has_gap_column) {
      std::uint32_t gap = 0;
      const char* first = fields[2].data();
      const char* last = fields[2].data() + fields[2].size();
      auto [ptr, ec] = std::from_chars(first, last, gap);
      if (ec != std::errc{} || ptr != last)
        fail_line(path, line_no, "inst_gap is not a valid count: '" + fields[2] + "'");
      if (gap == 0) fail_line(path, line_no, "inst_gap must be >= 1");
      rec.inst_gap = gap;
    }

    trace.total_instructions += rec.inst_gap;
    trace.records.push_back(rec);
  }

  if (trace.records.empty())
    throw TraceFormatError(path.string() + ": empty trace");
  return trace;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TraceFormatError("cannot write trace file: " + path.string());
  out << "pc_hex,taken,inst_gap\n";
  char buf[64];
  for (const auto& rec : trace.records) {
    std::snprintf(buf, sizeof buf, "0x%llx,%d,%u\n",
                  static_cast<unsigned long long>(rec.pc),
                  rec.outcome == Direction::T ? 1 : 0, rec.inst_gap);
    out << buf;
  }
  if (!out) throw TraceFormatError("write failed: " + path.string());
}

const char* synthetic_kind_name(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Pattern: return "pattern";
    case SyntheticKind::XorOfHistory: return "xor_of_history";
    case SyntheticKind::NoisyLinear: return "noisy_linear";
    case SyntheticKind::RandomBias: return "random_bias";
    case SyntheticKind::Interleaved: return "interleaved";
  }
  return "?";
}

SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "pattern") return SyntheticKind::Pattern;
  if (name == "xor_of_history") return SyntheticKind::XorOfHistory;
  if (name == "noisy_linear") return SyntheticKind::NoisyLinear;
  if (name == "random_bias") return SyntheticKind::RandomBias;
  if (name == "interleaved") return SyntheticKind::Interleaved;
  throw std::invalid_argument("unknown synthetic kind: '" + name + "'");
}

namespace {

void validate_part(const SyntheticSpec& spec, bool is_part) {
  if (!is_part && spec.length == 0)
    throw std::invalid_argument("synthetic spec needs length > 0");
  switch (spec.kind) {
    case SyntheticKind::Pattern:
      if (spec.pattern.empty())
        throw std::invalid_argument("pattern spec needs a non-empty pattern");
      for (char c : spec.pattern)
        if (c != 'T' && c != 'N')
          throw std::invalid_argument("pattern may contain only 'T' and 'N'");
      break;
    case SyntheticKind::XorOfHistory:
      if (spec.xor_i < 1 || spec.xor_j < 1)
        throw std::invalid_argument("xor_of_history offsets must be >= 1");
      if (spec.xor_i == spec.xor_j)
        throw std::invalid_argument("xor_of_history offsets must differ");
      break;
    case SyntheticKind::NoisyLinear:
      if (spec.flip_prob < 0.0 || spec.flip_prob > 1.0)
        throw std::invalid_argument("flip_prob must be in [0, 1]");
      break;
    case SyntheticKind::RandomBias:
      if (spec.taken_prob < 0.0 || spec.taken_prob > 1.0)
        throw std::invalid_argument("taken_prob must be in [0, 1]");
      break;
    case SyntheticKind::Interleaved: {
      if (is_part)
        throw std::invalid_argument("interleaved parts cannot themselves be interleaved");
      if (spec.parts.empty())
        throw std::invalid_argument("interleaved spec needs at least one part");
      std::set<std::uint64_t> pcs;
      for (const auto& part : spec.parts) {
        validate_part(part, true);
        if (!pcs.insert(part.pc).second)
          throw std::invalid_argument("interleaved parts must use distinct PCs");
      }
      break;
    }
  }
}

double unit_double(std::mt19937_64& rng) {
  // 53 random bits; avoids distribution objects so output is portable.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool coin(std::mt19937_64& rng, double p_true) { return unit_double(rng) < p_true; }

std::size_t history_need(const SyntheticSpec& spec) {
  switch (spec.kind) {
    case SyntheticKind::XorOfHistory: return std::max(spec.xor_i, spec.xor_j);
    case SyntheticKind::NoisyLinear: return spec.weights.size();
    default: return 0;
  }
}

Direction next_outcome(const SyntheticSpec& part, std::size_t& pattern_cursor,
                       const GlobalHistory& hist, std::mt19937_64& rng) {
  switch (part.kind) {
    case SyntheticKind::Pattern: {
      const char c = part.pattern[pattern_cursor % part.pattern.size()];
      ++pattern_cursor;
      return c == 'T' ? Direction::T : Direction::NT;
    }
    case SyntheticKind::XorOfHistory: {
      const std::size_t warm = std::max(part.xor_i, part.xor_j);
      if (hist.size() < warm) return direction_of(coin(rng, 0.5));
      const bool a = hist.bit(part.xor_i - 1) == Direction::T;
      const bool b = hist.bit(part.xor_j - 1) == Direction::T;
      return direction_of(a != b);
    }
    case SyntheticKind::NoisyLinear: {
      double acc = part.bias;
      for (std::size_t k = 0; k < part.weights.size(); ++k)
        acc += part.weights[k] * hist.signed_bit(k);
      bool taken = acc >= 0.0;
      if (part.flip_prob > 0.0 && coin(rng, part.flip_prob)) taken = !taken;
      return direction_of(taken);
    }
    case SyntheticKind::RandomBias:
      return direction_of(coin(rng, part.taken_prob));
    case SyntheticKind::Interleaved:
      break;  // unreachable, parts are validated flat
  }
  throw std::logic_error("unhandled synthetic kind");
}

}  // namespace

void validate_spec(const SyntheticSpec& spec) { validate_part(spec, false); }

Trace generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);

  const bool interleaved = spec.kind == SyntheticKind::Interleaved;
  const std::vector<SyntheticSpec> single{spec};
  const std::vector<SyntheticSpec>& parts = interleaved ? spec.parts : single;

  std::size_t need = 1;
  for (const auto& part : parts) need = std::max(need, history_need(part));

  std::mt19937_64 rng(spec.seed);
  GlobalHistory hist(need);
  std::vector<std::size_t> pattern_cursors(parts.size(), 0);

  Trace trace;
  trace.name = spec.name;
  trace.records.reserve(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const std::size_t pi = t % parts.size();
    const Direction out = next_outcome(parts[pi], pattern_cursors[pi], hist, rng);
    trace.records.push_back(BranchRecord{parts[pi].pc, out, 1});
    trace.total_instructions += 1;
    hist.push(out);
  }
  return trace;
}

}  // namespace rlbp
