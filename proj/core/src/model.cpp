#include "tkge/model.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>

namespace tkge {

bool uses_bucket_planes(ModelKind kind) {
  return kind == ModelKind::hyte || kind == ModelKind::bt_hyte || kind == ModelKind::tr_hyte;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::transe: return "transe";
    case ModelKind::transh: return "transh";
    case ModelKind::hyte: return "hyte";
    case ModelKind::bt_hyte: return "bt-hyte";
    case ModelKind::tr_hyte: return "tr-hyte";
  }
  std::abort();
}

std::string_view to_string(Norm norm) { return norm == Norm::l1 ? "l1" : "l2"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "transe") return ModelKind::transe;
  if (name == "transh") return ModelKind::transh;
  if (name == "hyte") return ModelKind::hyte;
  if (name == "bt-hyte") return ModelKind::bt_hyte;
  if (name == "tr-hyte") return ModelKind::tr_hyte;
  throw config_error("unknown model '" + std::string(name) +
                     "' (expected transe, transh, hyte, bt-hyte, tr-hyte)");
}

Norm parse_norm(std::string_view name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  throw config_error("unknown norm '" + std::string(name) + "' (expected l1 or l2)");
}

EmbeddingStore::EmbeddingStore(ModelKind kind, int num_entities, int num_relations,
                               int num_buckets, int dim)
    : kind_(kind),
      num_entities_(num_entities),
      num_relations_(num_relations),
      num_buckets_(num_buckets),
      dim_(dim) {
  if (num_entities < 1 || num_relations < 1 || dim < 1 || num_buckets < 1)
    throw config_error("embedding store requires positive entity/relation/bucket counts and dim");
  entities_.resize(static_cast<std::size_t>(num_entities) * dim);
  relations_.resize(static_cast<std::size_t>(num_relations) * dim);
  if (uses_bucket_planes(kind)) normals_.resize(static_cast<std::size_t>(num_buckets) * dim);
  if (kind == ModelKind::transh)
    rel_normals_.resize(static_cast<std::size_t>(num_relations) * dim);
}

void EmbeddingStore::init_uniform(std::uint64_t seed) {
  Rng rng(mix64(seed));
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim_));
  for (std::vector<double>* table : {&entities_, &relations_, &normals_, &rel_normals_})
    for (double& x : *table) x = rng.uniform(-bound, bound);
  enforce_constraints(*this, &rng);
}

std::span<double> EmbeddingStore::row(ParamTable table, int id) {
  auto konst = static_cast<const EmbeddingStore*>(this)->row(table, id);
  return {const_cast<double*>(konst.data()), konst.size()};
}

std::span<const double> EmbeddingStore::row(ParamTable table, int id) const {
  const std::vector<double>* data = nullptr;
  switch (table) {
    case ParamTable::entity: data = &entities_; break;
    case ParamTable::relation: data = &relations_; break;
    case ParamTable::normal: data = &normals_; break;
    case ParamTable::relation_normal: data = &rel_normals_; break;
  }
  int n = static_cast<int>(data->size() / static_cast<std::size_t>(dim_));
  if (id < 0 || id >= n)
    throw index_error("row " + std::to_string(id) + " out of range for table of " +
                      std::to_string(n));
  return {data->data() + static_cast<std::size_t>(id) * dim_, static_cast<std::size_t>(dim_)};
}

int EmbeddingStore::rows(ParamTable table) const {
  switch (table) {
    case ParamTable::entity: return static_cast<int>(entities_.size()) / dim_;
    case ParamTable::relation: return static_cast<int>(relations_.size()) / dim_;
    case ParamTable::normal: return static_cast<int>(normals_.size()) / dim_;
    case ParamTable::relation_normal: return static_cast<int>(rel_normals_.size()) / dim_;
  }
  std::abort();
}

bool EmbeddingStore::all_finite() const {
  for (const std::vector<double>* table : {&entities_, &relations_, &normals_, &rel_normals_})
    for (double x : *table)
      if (!std::isfinite(x)) return false;
  return true;
}

void project_onto_plane(std::span<const double> v, std::span<const double> normal,
                        std::span<double> out) {
  double dot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) dot += normal[i] * v[i];
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - dot * normal[i];
}

std::vector<double> project(std::span<const double> v, int tau, const EmbeddingStore& store) {
  std::vector<double> out(v.size());
  project_onto_plane(v, store.normal(tau), out);
  return out;
}

double norm_value(std::span<const double> v, Norm norm) {
  double acc = 0.0;
  if (norm == Norm::l1) {
    for (double x : v) acc += std::fabs(x);
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

namespace {

std::span<const double> plane_for(const Quadruple& q, int tau, ModelKind kind,
                                  const EmbeddingStore& store) {
  if (uses_bucket_planes(kind)) return store.normal(tau);
  if (kind == ModelKind::transh) return store.relation_normal(q.relation);
  return {};
}

// w = h + r - t, and u = w projected onto the kind's plane (or w itself for
// the plain translation model). Projection is linear, so projecting the
// residual equals the residual of the projections.
void residual(const Quadruple& q, int tau, ModelKind kind, const EmbeddingStore& store,
              std::vector<double>& u) {
  auto h = store.entity(q.head);
  auto r = store.relation(q.relation);
  auto t = store.entity(q.tail);
  u.resize(h.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = h[i] + r[i] - t[i];
  auto n = plane_for(q, tau, kind, store);
  if (!n.empty()) project_onto_plane(u, n, u);
}

}  // namespace

double score(const Quadruple& q, int tau, ModelKind kind, Norm norm,
             const EmbeddingStore& store) {
  thread_local std::vector<double> u;
  residual(q, tau, kind, store, u);
  return norm_value(u, norm);
}

namespace {

struct GradAccum {
  std::vector<ParamGrad>& out;

  std::vector<double>& slot(ParamTable table, int row, std::size_t dim) {
    for (ParamGrad& g : out)
      if (g.table == table && g.row == row) return g.grad;
    out.push_back({table, row, std::vector<double>(dim, 0.0)});
    return out.back().grad;
  }

  void add(ParamTable table, int row, std::span<const double> v, double scale) {
    std::vector<double>& g = slot(table, row, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) g[i] += scale * v[i];
  }
};

// Adds sign * dF/dtheta for one scored triple, F = ||P(h + r - t)||.
void accumulate_side(const ScoredTriple& st, double sign, ModelKind kind, Norm norm,
                     const EmbeddingStore& store, GradAccum& acc) {
  const Quadruple& q = st.quad;
  std::size_t dim = static_cast<std::size_t>(store.dim());
  std::vector<double> w(dim), u(dim), g(dim);

  auto h = store.entity(q.head);
  auto r = store.relation(q.relation);
  auto t = store.entity(q.tail);
  for (std::size_t i = 0; i < dim; ++i) w[i] = h[i] + r[i] - t[i];

  auto n = plane_for(q, st.tau, kind, store);
  if (n.empty())
    u = w;
  else
    project_onto_plane(w, n, u);

  if (norm == Norm::l1) {
    for (std::size_t i = 0; i < dim; ++i) g[i] = (u[i] > 0.0) ? 1.0 : (u[i] < 0.0 ? -1.0 : 0.0);
  } else {
    double len = norm_value(u, Norm::l2);
    if (len == 0.0) return;  // subgradient 0 at the apex
    for (std::size_t i = 0; i < dim; ++i) g[i] = u[i] / len;
  }

  if (n.empty()) {
    acc.add(ParamTable::entity, q.head, g, sign);
    acc.add(ParamTable::relation, q.relation, g, sign);
    acc.add(ParamTable::entity, q.tail, g, -sign);
    return;
  }

  // dF/dh = dF/dr = P g, dF/dt = -P g, and
  // dF/dn = -((g.n) w + (n.w) g).
  std::vector<double> pg(dim);
  project_onto_plane(g, n, pg);
  acc.add(ParamTable::entity, q.head, pg, sign);
  acc.add(ParamTable::relation, q.relation, pg, sign);
  acc.add(ParamTable::entity, q.tail, pg, -sign);

  double gn = 0.0, nw = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    gn += g[i] * n[i];
    nw += n[i] * w[i];
  }
  ParamTable table =
      uses_bucket_planes(kind) ? ParamTable::normal : ParamTable::relation_normal;
  int row = uses_bucket_planes(kind) ? st.tau : q.relation;
  std::vector<double> dn(dim);
  for (std::size_t i = 0; i < dim; ++i) dn[i] = -(gn * w[i] + nw * g[i]);
  acc.add(table, row, dn, sign);
}

}  // namespace

std::vector<ParamGrad> gradients(const ScoredTriple& pos, const ScoredTriple& neg, double margin,
                                 ModelKind kind, Norm norm, const EmbeddingStore& store) {
  std::vector<ParamGrad> out;
  if (margin_loss(pos.score, neg.score, margin) <= 0.0) return out;
  GradAccum acc{out};
  accumulate_side(pos, +1.0, kind, norm, store, acc);
  accumulate_side(neg, -1.0, kind, norm, store, acc);
  return out;
}

void apply_gradients(EmbeddingStore& store, const std::vector<ParamGrad>& grads, double lr) {
  for (const ParamGrad& g : grads) {
    auto p = store.row(g.table, g.row);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g.grad[i];
  }
}

int enforce_constraints(EmbeddingStore& store, Rng* rng) {
  Rng fallback(0x7b6ec5a9d3f01c42ull);
  Rng& r = rng ? *rng : fallback;
  int reinitialized = 0;
  const double bound = 6.0 / std::sqrt(static_cast<double>(store.dim()));

  for (ParamTable table : {ParamTable::normal, ParamTable::relation_normal}) {
    for (int id = 0; id < store.rows(table); ++id) {
      auto n = store.row(table, id);
      double sq = 0.0;
      for (double x : n) sq += x * x;
      if (sq < 1e-24) {
        for (double& x : n) x = r.uniform(-bound, bound);
        sq = 0.0;
        for (double x : n) sq += x * x;
        ++reinitialized;
      }
      // Skip when already unit so a constraint pass is bitwise idempotent.
      if (std::fabs(sq - 1.0) > 1e-12) {
        double inv = 1.0 / std::sqrt(sq);
        for (double& x : n) x *= inv;
      }
    }
  }

  for (int id = 0; id < store.rows(ParamTable::entity); ++id) {
    auto e = store.row(ParamTable::entity, id);
    double sq = 0.0;
    for (double x : e) sq += x * x;
    if (sq > 1.0 + 1e-12) {
      double inv = 1.0 / std::sqrt(sq);
      for (double& x : e) x *= inv;
    }
  }
  if (reinitialized > 0)
    std::cerr << "warning: reinitialized " << reinitialized << " zero hyperplane normal(s)\n";
  return reinitialized;
}

}  // namespace tkge
