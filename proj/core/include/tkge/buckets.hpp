#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/errors.hpp"

namespace tkge {

struct BucketConfig {
  int slice_width = 1;  // S: finest time granularity, in years
  int threshold = 300;  // THR: fact count that closes a bucket

  void validate() const;
};

// Frequency of facts per fine-grained time slice, keyed by slice start year.
class SliceHistogram {
 public:
  void add(Year slice, std::int64_t count = 1);
  bool empty() const { return counts_.empty(); }
  std::size_t num_slices() const { return counts_.size(); }
  std::int64_t total() const;
  Year min_year() const;
  Year max_year() const;
  const std::map<Year, std::int64_t>& counts() const { return counts_; }

  // Expected slice count n = ceil((max - min) / S); diagnostic only.
  std::int64_t expected_slice_count(const BucketConfig& config) const;

 private:
  std::map<Year, std::int64_t> counts_;
};

std::vector<std::pair<Year, Year>> spans_of(std::span<const Quadruple> quads);

// Every fine slice {t_s, t_s+S, ...} <= t_e of every span contributes one
// count to its slice year.
SliceHistogram expand_fine_slices(std::span<const std::pair<Year, Year>> spans,
                                  const BucketConfig& config);

// Legacy split used by the original hyperplane model: only the two span
// endpoints are counted, so long validity ranges carry no extra mass.
SliceHistogram expand_endpoints(std::span<const std::pair<Year, Year>> spans);

// Ordered bucket boundaries plus a total year -> bucket lookup. A boundary
// year closes the preceding bucket and starts the next one, so membership
// regions are half-open: [min_year, b0), [b0, b1), ..., [b_last, max_year].
class BucketIndex {
 public:
  BucketIndex();  // single bucket over [0, 0]
  BucketIndex(std::vector<Year> boundaries, Year min_year, Year max_year);

  int num_buckets() const { return static_cast<int>(boundaries_.size()) + 1; }
  const std::vector<Year>& boundaries() const { return boundaries_; }
  Year min_year() const { return min_year_; }
  Year max_year() const { return max_year_; }

  bool contains(Year t) const { return t >= min_year_ && t <= max_year_; }

  // Total on all years; out-of-range years clamp to the nearest bucket.
  int bucket_of(Year t) const;

  // Inclusive contiguous range [bucket_of(t_s), bucket_of(t_e)].
  std::pair<int, int> buckets_covering(Year t_s, Year t_e) const;

  // Inclusive year range owned by bucket b; may be empty when a boundary
  // was emitted at min_year.
  std::pair<Year, Year> bucket_range(int b) const;

  // Index of the scan segment (prev_boundary, boundary] a slice year falls
  // in; the trailing partial segment is num_buckets() - 1.
  int segment_of(Year t) const;

 private:
  std::vector<Year> boundaries_;
  Year min_year_ = 0;
  Year max_year_ = 0;
};

// Threshold scan over the histogram: accumulate slice counts in temporal
// order, emit the current year as a boundary once the accumulator exceeds
// THR, then reset it. A trailing partial bucket is kept.
BucketIndex build_boundaries(const SliceHistogram& hist, const BucketConfig& config);

struct BucketStatsRow {
  int bucket = 0;
  Year first_year = 0;
  Year last_year = 0;
  std::int64_t covered_facts = 0;  // train quadruples whose span covers the bucket
  std::int64_t segment_mass = 0;   // fine-slice counts of the scan segment closing the bucket
};

struct BucketStatsReport {
  std::vector<BucketStatsRow> rows;
  std::int64_t min_covered = 0;
  std::int64_t max_covered = 0;
  double mean_covered = 0.0;
};

BucketStatsReport bucket_stats(const Dataset& dataset, const BucketIndex& index,
                               const BucketConfig& config);

std::string format_bucket_stats(const BucketStatsReport& report, const BucketIndex& index,
                                const BucketConfig& config);

}  // namespace tkge
