#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tkge/buckets.hpp"
#include "tkge/dataset.hpp"
#include "tkge/model.hpp"
#include "tkge/sampling.hpp"

namespace tkge {

enum class Task { head, tail, relation };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

// Candidates ordered by ascending score, ties by ascending id. The gold
// rank is optimistic: 1 + the number of strictly cheaper candidates, so
// score ties never penalize the gold item.
struct RankedCandidates {
  std::int64_t rank = 0;
  std::vector<std::pair<int, double>> top;  // first top_k candidates
};

// Which bucket a query is scored on: the bucket holding the fact's start
// year (default protocol), or the best score across every bucket the span
// covers.
enum class TauMode { start_year, span_min };

// Scores every candidate substituted into the task's slot. When filter is
// given, known positives other than the gold item are dropped from the
// candidate list (diagnostic mode; raw ranking is the default elsewhere).
RankedCandidates rank_candidates(const Quadruple& q, Task task, const EmbeddingStore& store,
                                 ModelKind kind, Norm norm, const BucketIndex& index,
                                 int top_k = 0, const PositiveFilter* filter = nullptr,
                                 TauMode tau_mode = TauMode::start_year);

struct RankReport {
  Task task = Task::head;
  std::vector<std::int64_t> ranks;
  double mean_rank = 0.0;
  std::map<int, double> hit_at;
};

// Aggregates rank_candidates over a split. hit_at always carries k = 1 and
// k = 10 plus any extra ks requested.
std::vector<RankReport> evaluate_split(std::span<const Quadruple> split,
                                       std::span<const Task> tasks, const EmbeddingStore& store,
                                       ModelKind kind, Norm norm, const BucketIndex& index,
                                       std::span<const int> extra_ks = {},
                                       const PositiveFilter* filter = nullptr,
                                       TauMode tau_mode = TauMode::start_year);

std::string machine_line(const RankReport& report);
std::string format_rank_reports(std::span<const RankReport> reports);

// One completion attempt in the style of a per-query investigation table:
// relations judged at top-1, entities at top-10.
struct CompletionRecord {
  Quadruple quad;
  Task task = Task::head;
  std::vector<std::pair<int, double>> top;
  std::int64_t rank = 0;
  bool hit = false;
};

std::vector<CompletionRecord> fine_grained_report(std::span<const Quadruple> split,
                                                  const EmbeddingStore& store, ModelKind kind,
                                                  Norm norm, const BucketIndex& index,
                                                  std::size_t n_cases);

std::string completion_csv(std::span<const CompletionRecord> records, const Vocab& entities,
                           const Vocab& relations);
std::string format_completion_table(std::span<const CompletionRecord> records,
                                    const Vocab& entities, const Vocab& relations);

}  // namespace tkge
