#pragma once

#include <filesystem>

#include "tkge/buckets.hpp"
#include "tkge/model.hpp"

namespace tkge {

// Text checkpoint, format "tkge-ckpt v1":
//   tkge-ckpt v1 <model-kind> <d> <num-entities> <num-relations> <num-buckets> <norm>
//   <min_year> <max_year> <boundary...>
//   one whitespace-separated row per vector: entities, relations, normals,
//   transh normals, 17 significant digits each (round-trip exact).
// The embedded boundary list keeps eval and predict on exactly the bucket
// index the model was trained with.
struct Checkpoint {
  EmbeddingStore store;
  Norm norm;
  BucketIndex index;
};

void save_checkpoint(const std::filesystem::path& path, const EmbeddingStore& store, Norm norm,
                     const BucketIndex& index);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tkge
