#include "tkge/eval.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace tkge {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::head: return "head";
    case Task::tail: return "tail";
    case Task::relation: return "relation";
  }
  std::abort();
}

Task parse_task(std::string_view name) {
  if (name == "head") return Task::head;
  if (name == "tail") return Task::tail;
  if (name == "relation") return Task::relation;
  throw config_error("unknown task '" + std::string(name) +
                     "' (expected head, tail, relation)");
}

namespace {

int candidate_count(Task task, const EmbeddingStore& store) {
  return task == Task::relation ? store.num_relations() : store.num_entities();
}

int gold_id(const Quadruple& q, Task task) {
  switch (task) {
    case Task::head: return q.head;
    case Task::tail: return q.tail;
    case Task::relation: return q.relation;
  }
  std::abort();
}

void set_slot(Quadruple& q, Task task, int candidate) {
  switch (task) {
    case Task::head: q.head = candidate; break;
    case Task::tail: q.tail = candidate; break;
    case Task::relation: q.relation = candidate; break;
  }
}

void check_consistency(const EmbeddingStore& store, const BucketIndex& index) {
  if (uses_bucket_planes(store.kind()) && store.num_buckets() != index.num_buckets())
    throw error("store and bucket index disagree on bucket count");
}

// Simple slot-parallel map: query i writes only result slot i, so the
// outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& work) {
  unsigned hw = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("TKGE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) hw = static_cast<unsigned>(v);
  }
  std::size_t workers = std::min<std::size_t>(hw == 0 ? 1 : hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) work(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

RankedCandidates rank_candidates(const Quadruple& q, Task task, const EmbeddingStore& store,
                                 ModelKind kind, Norm norm, const BucketIndex& index, int top_k,
                                 const PositiveFilter* filter, TauMode tau_mode) {
  check_consistency(store, index);
  const auto [tau_lo, tau_hi] = tau_mode == TauMode::span_min
                                    ? index.buckets_covering(q.t_s, q.t_e)
                                    : std::pair<int, int>{index.bucket_of(q.t_s),
                                                          index.bucket_of(q.t_s)};
  const int total = candidate_count(task, store);
  const int gold = gold_id(q, task);

  auto best_score = [&](const Quadruple& probe) {
    double best = score(probe, tau_lo, kind, norm, store);
    for (int tau = tau_lo + 1; tau <= tau_hi; ++tau)
      best = std::min(best, score(probe, tau, kind, norm, store));
    return best;
  };

  RankedCandidates result;
  std::vector<std::pair<double, int>> collected;
  if (top_k > 0) collected.reserve(static_cast<std::size_t>(total));

  Quadruple probe = q;
  double gold_score = best_score(q);
  std::int64_t cheaper = 0;
  for (int cand = 0; cand < total; ++cand) {
    set_slot(probe, task, cand);
    if (filter && cand != gold && filter->contains(probe.head, probe.relation, probe.tail))
      continue;
    double s = best_score(probe);
    if (s < gold_score) ++cheaper;
    if (top_k > 0) collected.emplace_back(s, cand);
  }
  result.rank = cheaper + 1;

  if (top_k > 0) {
    std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(top_k), collected.size());
    std::partial_sort(collected.begin(), collected.begin() + static_cast<std::ptrdiff_t>(keep),
                      collected.end());
    result.top.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i)
      result.top.emplace_back(collected[i].second, collected[i].first);
  }
  return result;
}

std::vector<RankReport> evaluate_split(std::span<const Quadruple> split,
                                       std::span<const Task> tasks, const EmbeddingStore& store,
                                       ModelKind kind, Norm norm, const BucketIndex& index,
                                       std::span<const int> extra_ks,
                                       const PositiveFilter* filter, TauMode tau_mode) {
  if (split.empty()) throw error("evaluate_split: empty split");
  check_consistency(store, index);

  std::set<int> ks = {1, 10};
  for (int k : extra_ks) {
    if (k < 1) throw config_error("hit@k requires k >= 1");
    ks.insert(k);
  }

  std::vector<RankReport> reports;
  reports.reserve(tasks.size());
  for (Task task : tasks) {
    RankReport report;
    report.task = task;
    report.ranks.assign(split.size(), 0);
    parallel_for(split.size(), [&](std::size_t i) {
      report.ranks[i] =
          rank_candidates(split[i], task, store, kind, norm, index, 0, filter, tau_mode).rank;
    });
    std::int64_t sum = 0;
    for (std::int64_t r : report.ranks) sum += r;
    report.mean_rank = static_cast<double>(sum) / static_cast<double>(split.size());
    for (int k : ks) {
      std::size_t hits = 0;
      for (std::int64_t r : report.ranks)
        if (r <= k) ++hits;
      report.hit_at[k] = static_cast<double>(hits) / static_cast<double>(split.size());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

namespace {

std::string fixed4(double x) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << x;
  return out.str();
}

}  // namespace

std::string machine_line(const RankReport& report) {
  std::ostringstream out;
  out << "task=" << to_string(report.task) << " mr=" << fixed4(report.mean_rank)
      << " hit1=" << fixed4(report.hit_at.at(1)) << " hit10=" << fixed4(report.hit_at.at(10))
      << " n=" << report.ranks.size();
  return out.str();
}

std::string format_rank_reports(std::span<const RankReport> reports) {
  std::ostringstream out;
  out << "ties broken optimistically: rank = 1 + count of strictly cheaper candidates\n";
  out << std::left << std::setw(10) << "task" << std::setw(12) << "mean_rank";
  std::set<int> ks;
  for (const RankReport& r : reports)
    for (const auto& [k, frac] : r.hit_at) ks.insert(k);
  for (int k : ks) out << std::setw(10) << ("hit@" + std::to_string(k));
  out << "queries\n";
  for (const RankReport& r : reports) {
    out << std::left << std::setw(10) << to_string(r.task) << std::setw(12)
        << fixed4(r.mean_rank);
    for (int k : ks) {
      auto it = r.hit_at.find(k);
      out << std::setw(10) << (it == r.hit_at.end() ? std::string("-") : fixed4(it->second));
    }
    out << r.ranks.size() << '\n';
  }
  return out.str();
}

std::vector<CompletionRecord> fine_grained_report(std::span<const Quadruple> split,
                                                  const EmbeddingStore& store, ModelKind kind,
                                                  Norm norm, const BucketIndex& index,
                                                  std::size_t n_cases) {
  std::size_t n = std::min(n_cases, split.size());
  std::vector<CompletionRecord> records;
  records.reserve(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (Task task : {Task::head, Task::tail, Task::relation}) {
      int k = (task == Task::relation) ? 1 : 10;
      RankedCandidates ranked = rank_candidates(split[i], task, store, kind, norm, index, k);
      CompletionRecord rec;
      rec.quad = split[i];
      rec.task = task;
      rec.top = std::move(ranked.top);
      rec.rank = ranked.rank;
      rec.hit = ranked.rank <= k;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

const std::string& candidate_name(int id, Task task, const Vocab& entities,
                                  const Vocab& relations) {
  return task == Task::relation ? relations.name(id) : entities.name(id);
}

}  // namespace

std::string completion_csv(std::span<const CompletionRecord> records, const Vocab& entities,
                           const Vocab& relations) {
  std::ostringstream out;
  out << "task,head,relation,tail,t_s,t_e,gold,top_k,hit\n";
  for (const CompletionRecord& rec : records) {
    const Quadruple& q = rec.quad;
    int gold = rec.task == Task::head ? q.head : rec.task == Task::tail ? q.tail : q.relation;
    std::string top;
    for (std::size_t i = 0; i < rec.top.size(); ++i) {
      if (i > 0) top += ';';
      top += candidate_name(rec.top[i].first, rec.task, entities, relations);
    }
    out << to_string(rec.task) << ',' << csv_quote(entities.name(q.head)) << ','
        << csv_quote(relations.name(q.relation)) << ',' << csv_quote(entities.name(q.tail)) << ','
        << q.t_s << ',' << q.t_e << ','
        << csv_quote(candidate_name(gold, rec.task, entities, relations)) << ','
        << csv_quote(top) << ',' << (rec.hit ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string format_completion_table(std::span<const CompletionRecord> records,
                                    const Vocab& entities, const Vocab& relations) {
  std::ostringstream out;
  out << "completion judged at top-1 for relations, top-10 for entities; "
         "ties broken optimistically\n";
  for (const CompletionRecord& rec : records) {
    const Quadruple& q = rec.quad;
    std::string head = rec.task == Task::head ? "?" : entities.name(q.head);
    std::string rel = rec.task == Task::relation ? "?" : relations.name(q.relation);
    std::string tail = rec.task == Task::tail ? "?" : entities.name(q.tail);
    out << (rec.hit ? "[hit ] " : "[miss] ") << to_string(rec.task) << "  " << head << ", " << rel
        << ", " << tail << ", [" << q.t_s << ", " << q.t_e << "]"
        << "  rank " << rec.rank << "\n       candidates:";
    for (const auto& [id, s] : rec.top)
      out << ' ' << candidate_name(id, rec.task, entities, relations);
    out << '\n';
  }
  return out.str();
}

}  // namespace tkge
