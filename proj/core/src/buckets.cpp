#include "tkge/buckets.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace tkge {

void BucketConfig::validate() const {
  if (slice_width < 1) throw config_error("slice_width must be >= 1");
  if (threshold < 1) throw config_error("thr must be >= 1");
}

void SliceHistogram::add(Year slice, std::int64_t count) { counts_[slice] += count; }

std::int64_t SliceHistogram::total() const {
  std::int64_t sum = 0;
  for (const auto& [year, count] : counts_) sum += count;
  return sum;
}

Year SliceHistogram::min_year() const {
  if (counts_.empty()) throw error("empty slice histogram");
  return counts_.begin()->first;
}

Year SliceHistogram::max_year() const {
  if (counts_.empty()) throw error("empty slice histogram");
  return counts_.rbegin()->first;
}

std::int64_t SliceHistogram::expected_slice_count(const BucketConfig& config) const {
  if (counts_.empty()) return 0;
  std::int64_t range = static_cast<std::int64_t>(max_year()) - min_year();
  return (range + config.slice_width - 1) / config.slice_width;
}

std::vector<std::pair<Year, Year>> spans_of(std::span<const Quadruple> quads) {
  std::vector<std::pair<Year, Year>> spans;
  spans.reserve(quads.size());
  for (const Quadruple& q : quads) spans.emplace_back(q.t_s, q.t_e);
  return spans;
}

SliceHistogram expand_fine_slices(std::span<const std::pair<Year, Year>> spans,
                                  const BucketConfig& config) {
  config.validate();
  SliceHistogram hist;
  for (const auto& [t_s, t_e] : spans) {
    if (t_s > t_e) throw error("span with t_s > t_e reached expand_fine_slices");
    for (std::int64_t t = t_s; t <= t_e; t += config.slice_width)
      hist.add(static_cast<Year>(t));
  }
  return hist;
}

SliceHistogram expand_endpoints(std::span<const std::pair<Year, Year>> spans) {
  SliceHistogram hist;
  for (const auto& [t_s, t_e] : spans) {
    if (t_s > t_e) throw error("span with t_s > t_e reached expand_endpoints");
    hist.add(t_s);
    hist.add(t_e);
  }
  return hist;
}

BucketIndex::BucketIndex() = default;

BucketIndex::BucketIndex(std::vector<Year> boundaries, Year min_year, Year max_year)
    : boundaries_(std::move(boundaries)), min_year_(min_year), max_year_(max_year) {
  if (min_year_ > max_year_) throw error("bucket index with min_year > max_year");
  for (std::size_t i = 0; i < boundaries_.size(); ++i) {
    if (boundaries_[i] < min_year_ || boundaries_[i] > max_year_)
      throw error("bucket boundary outside corpus year range");
    if (i > 0 && boundaries_[i] <= boundaries_[i - 1])
      throw error("bucket boundaries must be strictly increasing");
  }
}

int BucketIndex::bucket_of(Year t) const {
  t = std::clamp(t, min_year_, max_year_);
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  return static_cast<int>(it - boundaries_.begin());
}

std::pair<int, int> BucketIndex::buckets_covering(Year t_s, Year t_e) const {
  if (t_s > t_e) throw error("buckets_covering called with t_s > t_e");
  return {bucket_of(t_s), bucket_of(t_e)};
}

std::pair<Year, Year> BucketIndex::bucket_range(int b) const {
  if (b < 0 || b >= num_buckets())
    throw index_error("bucket id " + std::to_string(b) + " out of range");
  Year first = (b == 0) ? min_year_ : boundaries_[static_cast<std::size_t>(b) - 1];
  Year last = (b == num_buckets() - 1) ? max_year_ : boundaries_[static_cast<std::size_t>(b)] - 1;
  return {first, last};
}

int BucketIndex::segment_of(Year t) const {
  auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), t);
  return static_cast<int>(it - boundaries_.begin());
}

BucketIndex build_boundaries(const SliceHistogram& hist, const BucketConfig& config) {
  config.validate();
  if (hist.empty()) throw error("build_boundaries: empty slice histogram");
  std::vector<Year> cuts;
  std::int64_t acc = 0;
  for (const auto& [year, count] : hist.counts()) {
    acc += count;
    if (acc > config.threshold) {
      cuts.push_back(year);
      acc = 0;
    }
  }
  return BucketIndex(std::move(cuts), hist.min_year(), hist.max_year());
}

BucketStatsReport bucket_stats(const Dataset& dataset, const BucketIndex& index,
                               const BucketConfig& config) {
  BucketStatsReport report;
  int n = index.num_buckets();
  report.rows.resize(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    auto [first, last] = index.bucket_range(b);
    report.rows[static_cast<std::size_t>(b)] = {b, first, last, 0, 0};
  }

  for (const Quadruple& q : dataset.train) {
    auto [lo, hi] = index.buckets_covering(q.t_s, q.t_e);
    for (int b = lo; b <= hi; ++b) ++report.rows[static_cast<std::size_t>(b)].covered_facts;
  }

  SliceHistogram hist = expand_fine_slices(spans_of(dataset.train), config);
  for (const auto& [year, count] : hist.counts())
    report.rows[static_cast<std::size_t>(index.segment_of(year))].segment_mass += count;

  report.min_covered = report.rows.empty() ? 0 : report.rows.front().covered_facts;
  std::int64_t sum = 0;
  for (const BucketStatsRow& row : report.rows) {
    report.min_covered = std::min(report.min_covered, row.covered_facts);
    report.max_covered = std::max(report.max_covered, row.covered_facts);
    sum += row.covered_facts;
  }
  report.mean_covered = report.rows.empty() ? 0.0 : static_cast<double>(sum) / n;
  return report;
}

std::string format_bucket_stats(const BucketStatsReport& report, const BucketIndex& index,
                                const BucketConfig& config) {
  std::ostringstream out;
  out << "buckets " << index.num_buckets() << "  slice_width " << config.slice_width << "  thr "
      << config.threshold << '\n';
  out << "boundaries:";
  for (Year b : index.boundaries()) out << ' ' << b;
  out << '\n';
  out << std::left << std::setw(8) << "bucket" << std::setw(14) << "years" << std::setw(14)
      << "facts" << "slice_mass\n";
  for (const BucketStatsRow& row : report.rows) {
    std::ostringstream years;
    if (row.first_year > row.last_year)
      years << "(empty)";
    else
      years << row.first_year << ".." << row.last_year;
    out << std::left << std::setw(8) << row.bucket << std::setw(14) << years.str() << std::setw(14)
        << row.covered_facts << row.segment_mass << '\n';
  }
  out << "covered facts per bucket: min " << report.min_covered << "  max " << report.max_covered
      << "  mean " << std::fixed << std::setprecision(2) << report.mean_covered << '\n';
  return out.str();
}

}  // namespace tkge
