#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tkge/errors.hpp"

namespace tkge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;
using Year = std::int32_t;

// A fact (h, r, t) valid over the year range [t_s, t_e].
struct Quadruple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  Year t_s = 0;
  Year t_e = 0;

  bool operator==(const Quadruple&) const = default;
};

// Time endpoints as they appear in the input file, before normalization.
struct TimeSpanRaw {
  std::string start_token;
  std::string end_token;
};

// Bidirectional name <-> dense id map. Ids are assigned contiguously from 0
// in first-seen order.
class Vocab {
 public:
  int add_or_get(std::string_view name);
  std::optional<int> find(std::string_view name) const;
  const std::string& name(int id) const;
  int size() const { return static_cast<int>(names_.size()); }

  // One "<id>\t<name>" row per entry, sorted by id.
  void dump(std::ostream& out) const;
  void dump_file(const std::filesystem::path& path) const;
  static Vocab parse_dump(std::istream& in);
  static Vocab load_file(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

enum class VocabMode { build, frozen };

// One input line with ids resolved but times still raw.
struct ParsedLine {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;
  TimeSpanRaw span;
};

// Splits a "head\trelation\ttail\tstart\tend" line. In build mode unseen
// names get fresh ids; in frozen mode they raise unknown_symbol_error.
ParsedLine parse_quadruple_line(std::string_view line, Vocab& entities, Vocab& relations,
                                VocabMode mode);

struct ResolvedSpan {
  Year t_s = 0;
  Year t_e = 0;
  bool swapped = false;  // raw endpoints arrived in descending order
};

// True for tokens whose every non-delimiter character is '#', e.g. "####"
// or "####-##-##".
bool is_unknown_time_token(std::string_view token);

// Unknown start -> min_year, unknown end -> max_year; dated tokens truncate
// to their leading year; inverted endpoints are swapped and flagged.
ResolvedSpan resolve_time_span(const TimeSpanRaw& raw, Year min_year, Year max_year);

// End-of-validity sentinel for unknown end times.
inline constexpr Year kUnknownEndYear = 3000;

struct DatasetStats {
  std::size_t train_count = 0;
  std::size_t valid_count = 0;
  std::size_t test_count = 0;
  int entity_count = 0;
  int relation_count = 0;
  std::optional<Year> min_known_year;
  std::optional<Year> max_known_year;
  Year unknown_start_sentinel = 0;
  Year unknown_end_sentinel = kUnknownEndYear;
  std::size_t unknown_starts = 0;
  std::size_t unknown_ends = 0;
  std::size_t swapped_spans = 0;
  std::size_t cross_split_duplicates = 0;
};

struct Dataset {
  std::vector<Quadruple> train;
  std::vector<Quadruple> valid;
  std::vector<Quadruple> test;
  Vocab entity_vocab;
  Vocab relation_vocab;
  DatasetStats stats;

  const std::vector<Quadruple>& split(std::string_view name) const;
};

// Loads all three splits, building the vocabularies over their union so
// that test-time names always resolve. The unknown-start sentinel is the
// minimum year observed anywhere in the corpus. An empty path stands for an
// absent split.
Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& valid_path = {},
                     const std::filesystem::path& test_path = {},
                     Year unknown_end = kUnknownEndYear);

std::string format_dataset_stats(const DatasetStats& stats);

}  // namespace tkge
