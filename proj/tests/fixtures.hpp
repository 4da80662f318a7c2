#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tkge/buckets.hpp"
#include "tkge/dataset.hpp"
#include "tkge/model.hpp"
#include "tkge/rng.hpp"

namespace tkge::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tkge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Renders quadruples in the 5-column tab-separated input format using
// generated e<i>/r<i> names.
inline std::string render_split(const std::vector<Quadruple>& quads) {
  std::string out;
  for (const Quadruple& q : quads) {
    out += "e" + std::to_string(q.head) + "\tr" + std::to_string(q.relation) + "\te" +
           std::to_string(q.tail) + "\t" + std::to_string(q.t_s) + "\t" + std::to_string(q.t_e) +
           "\n";
  }
  return out;
}

// Independent oracle for fine-slice expansion: a per-span, per-year double
// loop over a plain map.
inline std::map<Year, std::int64_t> naive_slice_counts(
    const std::vector<std::pair<Year, Year>>& spans, int width) {
  std::map<Year, std::int64_t> counts;
  for (auto [s, e] : spans)
    for (std::int64_t t = s; t <= e; t += width) counts[static_cast<Year>(t)] += 1;
  return counts;
}

// Independent oracle for the threshold scan, written against the raw map.
inline std::vector<Year> naive_scan_boundaries(const std::map<Year, std::int64_t>& counts,
                                               int threshold) {
  std::vector<Year> cuts;
  std::int64_t running = 0;
  for (const auto& [year, count] : counts) {
    running += count;
    if (running > threshold) {
      cuts.push_back(year);
      running = 0;
    }
  }
  return cuts;
}

inline EmbeddingStore random_store(ModelKind kind, int entities, int relations, int buckets,
                                   int dim, std::uint64_t seed) {
  EmbeddingStore store(kind, entities, relations, buckets, dim);
  store.init_uniform(seed);
  return store;
}

// Random quadruples over a fixed id space with spans inside [year_lo, year_hi].
inline std::vector<Quadruple> random_quads(int count, int entities, int relations, Year year_lo,
                                           Year year_hi, int max_span, std::uint64_t seed) {
  Rng rng(mix64(seed));
  std::vector<Quadruple> quads;
  quads.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Quadruple q;
    q.head = static_cast<EntityId>(rng.below(static_cast<std::size_t>(entities)));
    q.relation = static_cast<RelationId>(rng.below(static_cast<std::size_t>(relations)));
    q.tail = static_cast<EntityId>(rng.below(static_cast<std::size_t>(entities)));
    q.t_s = year_lo + static_cast<Year>(rng.below(static_cast<std::size_t>(year_hi - year_lo)));
    q.t_e = q.t_s + static_cast<Year>(rng.below(static_cast<std::size_t>(max_span)));
    if (q.t_e > year_hi) q.t_e = year_hi;
    quads.push_back(q);
  }
  return quads;
}

// Learnable synthetic KG: every relation is a fixed entity permutation with
// two admissible shifts, facts cluster in 10-20 year spans. 50 entities,
// 4 relations, 300 facts.
inline std::vector<Quadruple> smoke_kg(std::uint64_t seed = 7) {
  constexpr int kEntities = 50;
  constexpr int kRelations = 4;
  constexpr int kFacts = 300;
  Rng rng(mix64(seed));
  std::vector<Quadruple> quads;
  quads.reserve(kFacts);
  for (int i = 0; i < kFacts; ++i) {
    Quadruple q;
    q.head = static_cast<EntityId>(rng.below(kEntities));
    q.relation = static_cast<RelationId>(rng.below(kRelations));
    int shift = 7 * (q.relation + 1) + static_cast<int>(rng.below(2));
    q.tail = static_cast<EntityId>((q.head + shift) % kEntities);
    q.t_s = 1900 + static_cast<Year>(rng.below(40));
    q.t_e = q.t_s + 10 + static_cast<Year>(rng.below(10));
    quads.push_back(q);
  }
  return quads;
}

}  // namespace tkge::testing
