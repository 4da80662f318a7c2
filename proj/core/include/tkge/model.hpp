#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tkge/buckets.hpp"
#include "tkge/dataset.hpp"
#include "tkge/errors.hpp"
#include "tkge/rng.hpp"

namespace tkge {

enum class ModelKind { transe, transh, hyte, bt_hyte, tr_hyte };
enum class Norm { l1, l2 };

// The three hyperplane variants share the same scoring math; they differ in
// how their bucket index was built and how negatives are drawn.
bool uses_bucket_planes(ModelKind kind);

std::string_view to_string(ModelKind kind);
std::string_view to_string(Norm norm);
ModelKind parse_model_kind(std::string_view name);
Norm parse_norm(std::string_view name);

enum class ParamTable { entity, relation, normal, relation_normal };

// Dense d-dimensional vectors for entities, relations, and hyperplane
// normals (per time bucket for the hyperplane family, per relation for the
// relation-plane baseline).
class EmbeddingStore {
 public:
  EmbeddingStore(ModelKind kind, int num_entities, int num_relations, int num_buckets, int dim);

  // Uniform in [-6/sqrt(d), 6/sqrt(d)] per coordinate, then one constraint
  // pass so the store invariants hold from the start.
  void init_uniform(std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int num_entities() const { return num_entities_; }
  int num_relations() const { return num_relations_; }
  int num_buckets() const { return num_buckets_; }

  std::span<double> entity(int id) { return row(ParamTable::entity, id); }
  std::span<const double> entity(int id) const { return row(ParamTable::entity, id); }
  std::span<double> relation(int id) { return row(ParamTable::relation, id); }
  std::span<const double> relation(int id) const { return row(ParamTable::relation, id); }
  std::span<double> normal(int tau) { return row(ParamTable::normal, tau); }
  std::span<const double> normal(int tau) const { return row(ParamTable::normal, tau); }
  std::span<double> relation_normal(int id) { return row(ParamTable::relation_normal, id); }
  std::span<const double> relation_normal(int id) const {
    return row(ParamTable::relation_normal, id);
  }

  std::span<double> row(ParamTable table, int id);
  std::span<const double> row(ParamTable table, int id) const;
  int rows(ParamTable table) const;

  bool all_finite() const;

 private:
  ModelKind kind_;
  int num_entities_;
  int num_relations_;
  int num_buckets_;
  int dim_;
  std::vector<double> entities_;
  std::vector<double> relations_;
  std::vector<double> normals_;       // bucket hyperplanes; empty unless hyperplane family
  std::vector<double> rel_normals_;   // relation hyperplanes; transh only
};

// out = v - (n.v) n
void project_onto_plane(std::span<const double> v, std::span<const double> normal,
                        std::span<double> out);

// Projection onto bucket tau's hyperplane.
std::vector<double> project(std::span<const double> v, int tau, const EmbeddingStore& store);

double norm_value(std::span<const double> v, Norm norm);

// Translation residual length after the kind's projection. Lower is better.
double score(const Quadruple& q, int tau, ModelKind kind, Norm norm, const EmbeddingStore& store);

inline double margin_loss(double pos_score, double neg_score, double margin) {
  double loss = pos_score - neg_score + margin;
  return loss > 0.0 ? loss : 0.0;
}

struct ScoredTriple {
  Quadruple quad;
  int tau = 0;
  double score = 0.0;
};

struct ParamGrad {
  ParamTable table;
  int row;
  std::vector<double> grad;
};

// Analytic gradient of the hinge loss for one (positive, negative) pair,
// w.r.t. every involved entity, relation, and normal. Empty when the margin
// is satisfied. The l1 norm uses the sign subgradient with sign(0) = 0.
std::vector<ParamGrad> gradients(const ScoredTriple& pos, const ScoredTriple& neg, double margin,
                                 ModelKind kind, Norm norm, const EmbeddingStore& store);

// p -= lr * g for every entry.
void apply_gradients(EmbeddingStore& store, const std::vector<ParamGrad>& grads, double lr);

// Renormalizes hyperplane normals to unit length and rescales entities with
// norm > 1 back onto the unit sphere. A zero normal is reinitialized from
// rng (a fixed internal stream when rng is null); returns how many were.
int enforce_constraints(EmbeddingStore& store, Rng* rng = nullptr);

}  // namespace tkge
