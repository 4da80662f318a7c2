#include "tkge/dataset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace tkge {

int Vocab::add_or_get(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<int> Vocab::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::name(int id) const {
  if (id < 0 || id >= size()) throw index_error("vocab id " + std::to_string(id) + " out of range");
  return names_[static_cast<std::size_t>(id)];
}

void Vocab::dump(std::ostream& out) const {
  for (int id = 0; id < size(); ++id) out << id << '\t' << names_[static_cast<std::size_t>(id)] << '\n';
}

void Vocab::dump_file(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write vocab file " + path.string());
  dump(out);
}

Vocab Vocab::parse_dump(std::istream& in) {
  Vocab v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw malformed_line_error("vocab dump line " + std::to_string(line_no) + ": missing tab");
    int id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, id);
    if (ec != std::errc() || ptr != line.data() + tab || id != v.size())
      throw malformed_line_error("vocab dump line " + std::to_string(line_no) +
                                 ": ids must be dense and ascending from 0");
    v.add_or_get(std::string_view(line).substr(tab + 1));
  }
  return v;
}

Vocab Vocab::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open vocab file " + path.string());
  return parse_dump(in);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

int resolve_name(std::string_view name, Vocab& vocab, VocabMode mode, const char* what) {
  if (mode == VocabMode::build) return vocab.add_or_get(name);
  if (auto id = vocab.find(name)) return *id;
  throw unknown_symbol_error(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

// Leading year of a token: optional minus sign, then digits, terminated by
// end-of-token or a '-' date delimiter. "1990-01-01" -> 1990, "-431" -> -431.
std::optional<Year> parse_leading_year(std::string_view token) {
  std::size_t i = 0;
  bool negative = false;
  if (i < token.size() && token[i] == '-') {
    negative = true;
    ++i;
  }
  std::size_t digits_begin = i;
  while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i;
  std::size_t ndigits = i - digits_begin;
  if (ndigits == 0 || ndigits > 9) return std::nullopt;
  if (i < token.size() && token[i] != '-') return std::nullopt;
  Year year = 0;
  std::from_chars(token.data() + digits_begin, token.data() + i, year);
  return negative ? -year : year;
}

}  // namespace

ParsedLine parse_quadruple_line(std::string_view line, Vocab& entities, Vocab& relations,
                                VocabMode mode) {
  auto fields = split_tabs(line);
  if (fields.size() != 5)
    throw malformed_line_error("expected 5 tab-separated fields, got " +
                               std::to_string(fields.size()));
  for (auto f : fields)
    if (f.empty()) throw malformed_line_error("empty field");

  ParsedLine parsed;
  parsed.head = resolve_name(fields[0], entities, mode, "entity");
  parsed.relation = resolve_name(fields[1], relations, mode, "relation");
  parsed.tail = resolve_name(fields[2], entities, mode, "entity");
  parsed.span.start_token = std::string(fields[3]);
  parsed.span.end_token = std::string(fields[4]);
  return parsed;
}

bool is_unknown_time_token(std::string_view token) {
  bool saw_hash = false;
  for (char c : token) {
    if (c == '#')
      saw_hash = true;
    else if (c != '-')
      return false;
  }
  return saw_hash;
}

ResolvedSpan resolve_time_span(const TimeSpanRaw& raw, Year min_year, Year max_year) {
  if (min_year >= max_year)
    throw config_error("resolve_time_span: min_year must be below max_year");
  auto resolve_one = [](const std::string& token, Year sentinel) -> Year {
    if (is_unknown_time_token(token)) return sentinel;
    if (auto year = parse_leading_year(token)) return *year;
    throw time_parse_error("unparseable time token '" + token + "'");
  };
  ResolvedSpan out;
  out.t_s = resolve_one(raw.start_token, min_year);
  out.t_e = resolve_one(raw.end_token, max_year);
  if (out.t_s > out.t_e) {
    std::swap(out.t_s, out.t_e);
    out.swapped = true;
  }
  return out;
}

const std::vector<Quadruple>& Dataset::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "valid") return valid;
  if (name == "test") return test;
  throw config_error("unknown split '" + std::string(name) + "'");
}

namespace {

struct RawSplit {
  std::vector<ParsedLine> lines;
};

RawSplit read_split(const std::filesystem::path& path, Vocab& entities, Vocab& relations) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file " + path.string());
  RawSplit split;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      split.lines.push_back(parse_quadruple_line(line, entities, relations, VocabMode::build));
    } catch (const error& e) {
      throw malformed_line_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return split;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& valid_path,
                     const std::filesystem::path& test_path, Year unknown_end) {
  Dataset ds;
  std::array<RawSplit, 3> raw = {read_split(train_path, ds.entity_vocab, ds.relation_vocab),
                                 read_split(valid_path, ds.entity_vocab, ds.relation_vocab),
                                 read_split(test_path, ds.entity_vocab, ds.relation_vocab)};
  const std::array<const std::filesystem::path*, 3> paths = {&train_path, &valid_path, &test_path};

  // Corpus-wide bounds over every known endpoint in every split.
  DatasetStats& stats = ds.stats;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    int line_no = 0;
    for (const ParsedLine& parsed : raw[s].lines) {
      ++line_no;
      for (const std::string* token : {&parsed.span.start_token, &parsed.span.end_token}) {
        if (is_unknown_time_token(*token)) continue;
        auto year = parse_leading_year(*token);
        if (!year)
          throw time_parse_error(paths[s]->string() + ": record " + std::to_string(line_no) +
                                 ": unparseable time token '" + *token + "'");
        if (!stats.min_known_year || *year < *stats.min_known_year) stats.min_known_year = *year;
        if (!stats.max_known_year || *year > *stats.max_known_year) stats.max_known_year = *year;
      }
    }
  }

  stats.unknown_end_sentinel = unknown_end;
  // No known year anywhere is a degenerate corpus; fall back to year 0.
  stats.unknown_start_sentinel = stats.min_known_year.value_or(0);
  if (stats.unknown_start_sentinel >= unknown_end) stats.unknown_start_sentinel = unknown_end - 1;

  std::array<std::vector<Quadruple>*, 3> splits = {&ds.train, &ds.valid, &ds.test};
  std::set<std::array<std::int64_t, 5>> seen;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    splits[s]->reserve(raw[s].lines.size());
    for (const ParsedLine& parsed : raw[s].lines) {
      ResolvedSpan span =
          resolve_time_span(parsed.span, stats.unknown_start_sentinel, stats.unknown_end_sentinel);
      if (span.swapped) ++stats.swapped_spans;
      if (is_unknown_time_token(parsed.span.start_token)) ++stats.unknown_starts;
      if (is_unknown_time_token(parsed.span.end_token)) ++stats.unknown_ends;
      Quadruple q{parsed.head, parsed.relation, parsed.tail, span.t_s, span.t_e};
      std::array<std::int64_t, 5> key = {q.head, q.relation, q.tail, q.t_s, q.t_e};
      auto [it, inserted] = seen.emplace(key);
      if (!inserted && s > 0) ++stats.cross_split_duplicates;
      splits[s]->push_back(q);
    }
  }

  stats.train_count = ds.train.size();
  stats.valid_count = ds.valid.size();
  stats.test_count = ds.test.size();
  stats.entity_count = ds.entity_vocab.size();
  stats.relation_count = ds.relation_vocab.size();
  return ds;
}

std::string format_dataset_stats(const DatasetStats& stats) {
  std::ostringstream out;
  out << "train " << stats.train_count << "  valid " << stats.valid_count << "  test "
      << stats.test_count << '\n'
      << "entities " << stats.entity_count << "  relations " << stats.relation_count << '\n';
  if (stats.min_known_year)
    out << "known years [" << *stats.min_known_year << ", " << *stats.max_known_year << "]\n";
  out << "unknown-start sentinel " << stats.unknown_start_sentinel << "  unknown-end sentinel "
      << stats.unknown_end_sentinel << '\n'
      << "unknown starts " << stats.unknown_starts << "  unknown ends " << stats.unknown_ends
      << "  swapped spans " << stats.swapped_spans << "  cross-split duplicates "
      << stats.cross_split_duplicates << '\n';
  return out.str();
}

}  // namespace tkge
