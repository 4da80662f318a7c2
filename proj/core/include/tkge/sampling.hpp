#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "tkge/dataset.hpp"
#include "tkge/errors.hpp"
#include "tkge/model.hpp"
#include "tkge/rng.hpp"

namespace tkge {

// Exact (h, r, t) membership over a chosen corpus scope; corrupted triples
// are rejected while they collide with it.
class PositiveFilter {
 public:
  enum class Scope { train, all };

  void insert(EntityId head, RelationId relation, EntityId tail);
  bool contains(EntityId head, RelationId relation, EntityId tail) const;
  std::size_t size() const { return keys_.size(); }

  static PositiveFilter from_dataset(const Dataset& dataset, Scope scope);

 private:
  static std::uint64_t pack(EntityId head, RelationId relation, EntityId tail);
  std::unordered_set<std::uint64_t> keys_;
};

PositiveFilter::Scope parse_filter_scope(std::string_view name);
std::string_view to_string(PositiveFilter::Scope scope);

enum class CorruptionSlot { head, relation, tail };

enum class SamplingStrategy {
  entities_only,          // head/tail corruption, equal odds
  entities_and_relations  // adds relation corruption at a controlled weight
};

SamplingStrategy parse_strategy(std::string_view name);
std::string_view to_string(SamplingStrategy strategy);
SamplingStrategy default_strategy(ModelKind kind);

struct NegativeSample {
  Quadruple quad;
  int tau = 0;  // always the paired positive's bucket
  CorruptionSlot slot = CorruptionSlot::head;
};

using NegativeBatch = std::vector<NegativeSample>;

struct SamplerConfig {
  SamplingStrategy strategy = SamplingStrategy::entities_only;
  int count = 5;                // negatives per positive
  double relation_weight = 0.1; // probability of the relation slot
  int retry_cap = 100;
};

class NegativeSampler {
 public:
  NegativeSampler(SamplerConfig config, const PositiveFilter& filter, int num_entities,
                  int num_relations);

  // Uniform redraw of one entity slot until the triple leaves the filter;
  // after retry_cap failures the last draw is kept and counted.
  Quadruple corrupt_entity(const Quadruple& q, CorruptionSlot slot, Rng& rng);
  Quadruple corrupt_relation(const Quadruple& q, Rng& rng);

  NegativeBatch build_negatives(const Quadruple& q, int tau, Rng& rng);

  std::uint64_t retry_cap_escapes() const { return retry_cap_escapes_; }

 private:
  CorruptionSlot draw_slot(Rng& rng);

  SamplerConfig config_;
  const PositiveFilter* filter_;
  int num_entities_;
  int num_relations_;
  std::uint64_t retry_cap_escapes_ = 0;
};

}  // namespace tkge
