#include "tkge/sampling.hpp"

namespace tkge {

std::uint64_t PositiveFilter::pack(EntityId head, RelationId relation, EntityId tail) {
  constexpr std::int64_t kLimit = 1 << 21;
  if (head < 0 || head >= kLimit || relation < 0 || relation >= kLimit || tail < 0 ||
      tail >= kLimit)
    throw index_error("positive filter supports ids below 2^21");
  return (static_cast<std::uint64_t>(head) << 42) | (static_cast<std::uint64_t>(relation) << 21) |
         static_cast<std::uint64_t>(tail);
}

void PositiveFilter::insert(EntityId head, RelationId relation, EntityId tail) {
  keys_.insert(pack(head, relation, tail));
}

bool PositiveFilter::contains(EntityId head, RelationId relation, EntityId tail) const {
  return keys_.count(pack(head, relation, tail)) != 0;
}

PositiveFilter PositiveFilter::from_dataset(const Dataset& dataset, Scope scope) {
  PositiveFilter filter;
  for (const Quadruple& q : dataset.train) filter.insert(q.head, q.relation, q.tail);
  if (scope == Scope::all) {
    for (const Quadruple& q : dataset.valid) filter.insert(q.head, q.relation, q.tail);
    for (const Quadruple& q : dataset.test) filter.insert(q.head, q.relation, q.tail);
  }
  return filter;
}

PositiveFilter::Scope parse_filter_scope(std::string_view name) {
  if (name == "train") return PositiveFilter::Scope::train;
  if (name == "all" || name == "train+valid+test") return PositiveFilter::Scope::all;
  throw config_error("unknown filter_scope '" + std::string(name) + "' (expected train or all)");
}

std::string_view to_string(PositiveFilter::Scope scope) {
  return scope == PositiveFilter::Scope::train ? "train" : "all";
}

SamplingStrategy parse_strategy(std::string_view name) {
  if (name == "entities-only") return SamplingStrategy::entities_only;
  if (name == "entities+relations") return SamplingStrategy::entities_and_relations;
  throw config_error("unknown strategy '" + std::string(name) +
                     "' (expected entities-only or entities+relations)");
}

std::string_view to_string(SamplingStrategy strategy) {
  return strategy == SamplingStrategy::entities_only ? "entities-only" : "entities+relations";
}

SamplingStrategy default_strategy(ModelKind kind) {
  return kind == ModelKind::tr_hyte ? SamplingStrategy::entities_and_relations
                                    : SamplingStrategy::entities_only;
}

NegativeSampler::NegativeSampler(SamplerConfig config, const PositiveFilter& filter,
                                 int num_entities, int num_relations)
    : config_(config), filter_(&filter), num_entities_(num_entities),
      num_relations_(num_relations) {
  if (config_.count < 1) throw config_error("neg_sample must be >= 1");
  if (config_.retry_cap < 1) throw config_error("sampler retry cap must be >= 1");
  if (config_.relation_weight < 0.0 || config_.relation_weight > 1.0)
    throw config_error("rel_neg_weight must be within [0, 1]");
}

Quadruple NegativeSampler::corrupt_entity(const Quadruple& q, CorruptionSlot slot, Rng& rng) {
  if (num_entities_ < 2) throw error("cannot corrupt entities: vocabulary has fewer than 2");
  if (slot == CorruptionSlot::relation)
    throw error("corrupt_entity called with the relation slot");
  Quadruple out = q;
  EntityId& target = (slot == CorruptionSlot::head) ? out.head : out.tail;
  for (int attempt = 0; attempt < config_.retry_cap; ++attempt) {
    target = static_cast<EntityId>(rng.below(static_cast<std::size_t>(num_entities_)));
    if (!filter_->contains(out.head, out.relation, out.tail)) return out;
  }
  ++retry_cap_escapes_;
  return out;
}

Quadruple NegativeSampler::corrupt_relation(const Quadruple& q, Rng& rng) {
  if (num_relations_ < 2) throw error("cannot corrupt relations: vocabulary has fewer than 2");
  Quadruple out = q;
  for (int attempt = 0; attempt < config_.retry_cap; ++attempt) {
    out.relation = static_cast<RelationId>(rng.below(static_cast<std::size_t>(num_relations_)));
    if (!filter_->contains(out.head, out.relation, out.tail)) return out;
  }
  ++retry_cap_escapes_;
  return out;
}

CorruptionSlot NegativeSampler::draw_slot(Rng& rng) {
  if (config_.strategy == SamplingStrategy::entities_only)
    return rng.unit() < 0.5 ? CorruptionSlot::head : CorruptionSlot::tail;
  double u = rng.unit();
  if (u < config_.relation_weight) return CorruptionSlot::relation;
  double rest = (u - config_.relation_weight) / (1.0 - config_.relation_weight);
  return rest < 0.5 ? CorruptionSlot::head : CorruptionSlot::tail;
}

NegativeBatch NegativeSampler::build_negatives(const Quadruple& q, int tau, Rng& rng) {
  NegativeBatch batch;
  batch.reserve(static_cast<std::size_t>(config_.count));
  for (int k = 0; k < config_.count; ++k) {
    CorruptionSlot slot = draw_slot(rng);
    Quadruple neg = (slot == CorruptionSlot::relation) ? corrupt_relation(q, rng)
                                                       : corrupt_entity(q, slot, rng);
    batch.push_back({neg, tau, slot});
  }
  return batch;
}

}  // namespace tkge
