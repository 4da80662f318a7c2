#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tkge/buckets.hpp"
#include "tkge/dataset.hpp"
#include "tkge/eval.hpp"
#include "tkge/model.hpp"
#include "tkge/sampling.hpp"

namespace tkge {

struct TrainConfig {
  ModelKind model = ModelKind::bt_hyte;
  Norm norm = Norm::l1;
  double lr = 0.0001;
  int max_epoch = 4000;
  int testfreq = 5;
  int dim = 128;
  double margin = 10.0;
  int neg_sample = 5;
  int batch_size = 5000;
  BucketConfig bucket;  // slice_width 1, thr 300
  std::uint64_t seed = 1;
  // Negative sampling; strategy defaults by model kind, the relation slot
  // weight defaults to 1 / (2 * neg_sample).
  std::optional<SamplingStrategy> strategy;
  double rel_neg_weight = -1.0;
  PositiveFilter::Scope filter_scope = PositiveFilter::Scope::train;

  SamplingStrategy resolved_strategy() const;
  double resolved_rel_neg_weight() const;
  SamplerConfig sampler_config() const;

  // All violations at once, empty when valid.
  std::vector<std::string> validate() const;
};

// "key = value" lines, '#' comment lines, unknown keys are errors. Values
// land on top of `base` so file and flag layering composes.
TrainConfig parse_train_config(std::istream& in, TrainConfig base = {});
TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base = {});

std::string format_train_config(const TrainConfig& config);

// One training row: a positive fact bound to one bucket its span covers.
struct Instance {
  Quadruple quad;
  int tau = 0;
};

std::vector<Instance> expand_training_instances(const Dataset& dataset, const BucketIndex& index);

// Builds the bucket index the way the model kind prescribes: endpoint
// counting for the legacy hyperplane model, full-span fine slices for the
// balanced variants (and for the translation baselines, which only use the
// index to weight long-lived facts).
BucketIndex build_index_for(ModelKind kind, const Dataset& dataset, const BucketConfig& config);

// One pass over all instances in a seeded shuffled order: per instance
// draws negatives, applies per-pair SGD on the hinge loss, and enforces
// store constraints once per mini-batch. Returns the summed loss.
double train_epoch(const std::vector<Instance>& instances, EmbeddingStore& store,
                   NegativeSampler& sampler, const TrainConfig& config, int epoch);

struct ValidationPoint {
  int epoch = 0;
  double head_mr = 0.0;
  double tail_mr = 0.0;
  double rel_mr = 0.0;
  double loss = 0.0;
};

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config_lines;
  std::string dataset_line;
  std::string boundary_line;
  std::string init_line;
  std::vector<ValidationPoint> history;
  int best_entity_epoch = 0;
  int best_relation_epoch = 0;

  std::string to_text() const;
};

struct TrainResult {
  EmbeddingStore store;  // final parameters
  BucketIndex index;
  RunManifest manifest;
  double best_entity_mr = 0.0;
  double best_relation_mr = 0.0;
};

// Full training run; writes best-entity.ckpt, best-relation.ckpt,
// final.ckpt, manifest.txt and the vocabulary dumps into out_dir. Progress
// and wall-clock go to `log` (manifest content stays run-deterministic).
TrainResult run_training(const Dataset& dataset, const TrainConfig& config,
                         const std::filesystem::path& out_dir, std::ostream* log = nullptr);

}  // namespace tkge
