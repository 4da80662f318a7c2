#include "doctest.h"

#include <limits>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "tkge/checkpoint.hpp"
#include "tkge/trainer.hpp"

using namespace tkge;
namespace fx = tkge::testing;

namespace {

Dataset toy_dataset(int entities, int relations, int facts, Year lo, Year hi, int max_span,
                    std::uint64_t seed, int valid_facts = 0, int test_facts = 0) {
  Dataset ds;
  ds.train = fx::random_quads(facts, entities, relations, lo, hi, max_span, seed);
  ds.valid = fx::random_quads(valid_facts, entities, relations, lo, hi, max_span, seed + 1);
  ds.test = fx::random_quads(test_facts, entities, relations, lo, hi, max_span, seed + 2);
  for (int e = 0; e < entities; ++e) ds.entity_vocab.add_or_get("e" + std::to_string(e));
  for (int r = 0; r < relations; ++r) ds.relation_vocab.add_or_get("r" + std::to_string(r));
  ds.stats.train_count = ds.train.size();
  ds.stats.valid_count = ds.valid.size();
  ds.stats.test_count = ds.test.size();
  ds.stats.entity_count = entities;
  ds.stats.relation_count = relations;
  return ds;
}

}  // namespace

TEST_CASE("config files parse, layer over a base, and reject unknown keys") {
  std::istringstream in(
      "# smoke settings\n"
      "model = tr-hyte\n"
      "lr = 0.001\n"
      "inpdim = 32\n"
      "thr = 25\n"
      "strategy = entities+relations\n"
      "\n"
      "seed = 9\n");
  TrainConfig base;
  base.margin = 4.0;
  TrainConfig parsed = parse_train_config(in, base);
  CHECK(parsed.model == ModelKind::tr_hyte);
  CHECK(parsed.lr == doctest::Approx(0.001));
  CHECK(parsed.dim == 32);
  CHECK(parsed.bucket.threshold == 25);
  CHECK(parsed.seed == 9);
  CHECK(parsed.margin == doctest::Approx(4.0));  // untouched base value survives

  std::istringstream bad("nonsense = 1\n");
  try {
    parse_train_config(bad);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("nonsense") != std::string::npos);
  }

  std::istringstream malformed("lr 0.1\n");
  CHECK_THROWS_AS(parse_train_config(malformed), config_error);
}

TEST_CASE("validate reports every violation at once") {
  TrainConfig config;
  config.lr = 0.0;
  config.margin = -1.0;
  config.neg_sample = 0;
  config.bucket.threshold = 0;
  auto problems = config.validate();
  CHECK(problems.size() == 4);
}

TEST_CASE("defaults follow the reference configuration") {
  TrainConfig config;
  CHECK(config.lr == doctest::Approx(0.0001));
  CHECK(config.testfreq == 5);
  CHECK(config.dim == 128);
  CHECK(config.margin == doctest::Approx(10.0));
  CHECK(config.norm == Norm::l1);
  CHECK(config.neg_sample == 5);
  CHECK(config.max_epoch == 4000);
  // the relation slot stays rare by default: 1 / (2 * neg_sample)
  CHECK(config.resolved_rel_neg_weight() == doctest::Approx(0.1));
  CHECK(config.resolved_strategy() == SamplingStrategy::entities_only);
  config.model = ModelKind::tr_hyte;
  CHECK(config.resolved_strategy() == SamplingStrategy::entities_and_relations);
}

TEST_CASE("expand_training_instances emits one instance per covered bucket") {
  Dataset ds;
  ds.train = {{0, 0, 1, 1900, 1960}};  // covers buckets 0..2
  BucketIndex index({1920, 1940}, 1900, 1960);
  auto instances = expand_training_instances(ds, index);
  REQUIRE(instances.size() == 3);
  CHECK(instances[0].tau == 0);
  CHECK(instances[2].tau == 2);

  // Single-bucket index: exactly one instance per fact.
  Dataset flat = toy_dataset(10, 2, 40, 1900, 1950, 10, 3);
  BucketIndex one({}, 1900, 1960);
  CHECK(expand_training_instances(flat, one).size() == flat.train.size());

  // Coverage sum recomputed independently.
  BucketIndex many({1910, 1920, 1930, 1940}, 1900, 1960);
  std::size_t expected = 0;
  for (const Quadruple& q : flat.train)
    expected += static_cast<std::size_t>(many.bucket_of(q.t_e) - many.bucket_of(q.t_s) + 1);
  CHECK(expand_training_instances(flat, many).size() == expected);
}

TEST_CASE("build_index_for: legacy endpoint split differs from the balanced one") {
  Dataset ds = toy_dataset(20, 3, 150, 1900, 1980, 40, 5);
  BucketConfig config{1, 60};
  BucketIndex balanced = build_index_for(ModelKind::bt_hyte, ds, config);
  BucketIndex legacy = build_index_for(ModelKind::hyte, ds, config);
  // Full-span counting accumulates far more mass than endpoint counting.
  CHECK(balanced.num_buckets() > legacy.num_buckets());
}

TEST_CASE("train_epoch with satisfied margins changes nothing") {
  Dataset ds;
  ds.train = {{0, 0, 1, 2000, 2000}};
  for (const char* n : {"a", "b"}) ds.entity_vocab.add_or_get(n);
  ds.relation_vocab.add_or_get("r");

  TrainConfig config;
  config.model = ModelKind::transe;
  config.norm = Norm::l2;
  config.margin = 0.4;
  config.lr = 0.1;
  config.neg_sample = 5;
  config.batch_size = 8;

  BucketIndex index({}, 2000, 2000);
  EmbeddingStore store(ModelKind::transe, 2, 1, 1, 2);
  // pos (a, r, b) scores 0; any corruption scores ||r|| = 0.5 >= margin
  store.entity(0)[0] = 0.25;
  store.entity(0)[1] = 0.5;
  store.entity(1)[0] = 0.75;
  store.entity(1)[1] = 0.5;
  store.relation(0)[0] = 0.5;
  EmbeddingStore before = store;

  PositiveFilter filter;
  filter.insert(0, 0, 1);
  NegativeSampler sampler(config.sampler_config(), filter, 2, 1);
  auto instances = expand_training_instances(ds, index);
  double loss = train_epoch(instances, store, sampler, config, 1);
  CHECK(loss == 0.0);
  for (ParamTable table : {ParamTable::entity, ParamTable::relation})
    for (int id = 0; id < store.rows(table); ++id) {
      auto a = store.row(table, id);
      auto b = before.row(table, id);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("lr = 0 leaves parameters bit-identical") {
  Dataset ds = toy_dataset(10, 2, 30, 1900, 1950, 10, 7);
  TrainConfig config;
  config.model = ModelKind::bt_hyte;
  config.dim = 8;
  config.bucket.threshold = 20;
  config.batch_size = 16;
  config.lr = 0.0;  // the epoch op itself accepts a null step
  BucketIndex index = build_index_for(config.model, ds, config.bucket);
  EmbeddingStore store(config.model, 10, 2, index.num_buckets(), config.dim);
  store.init_uniform(3);

  PositiveFilter filter = PositiveFilter::from_dataset(ds, PositiveFilter::Scope::train);
  NegativeSampler sampler(config.sampler_config(), filter, 10, 2);
  auto instances = expand_training_instances(ds, index);

  EmbeddingStore before = store;
  train_epoch(instances, store, sampler, config, 1);
  for (ParamTable table : {ParamTable::entity, ParamTable::relation, ParamTable::normal})
    for (int id = 0; id < store.rows(table); ++id) {
      auto a = store.row(table, id);
      auto b = before.row(table, id);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("toy-graph loss decreases over 50 epochs for nearly every seed") {
  // 5 entities, 2 relations, 20 facts, single bucket. Negatives are redrawn
  // every epoch, so the loss carries sampling noise on top of its trend; a
  // seed passes when the trend over the run is non-increasing.
  int decreasing = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Dataset ds = toy_dataset(5, 2, 20, 2000, 2001, 1, seed * 13);
    TrainConfig config;
    config.model = ModelKind::bt_hyte;
    config.dim = 16;
    config.margin = 1.0;
    config.lr = 0.002;
    config.neg_sample = 2;
    config.batch_size = 64;
    config.bucket.threshold = 1000;
    config.seed = seed;

    BucketIndex index = build_index_for(config.model, ds, config.bucket);
    REQUIRE(index.num_buckets() == 1);
    EmbeddingStore store(config.model, 5, 2, 1, config.dim);
    store.init_uniform(seed);
    PositiveFilter filter = PositiveFilter::from_dataset(ds, PositiveFilter::Scope::train);
    NegativeSampler sampler(config.sampler_config(), filter, 5, 2);
    auto instances = expand_training_instances(ds, index);

    std::vector<double> losses;
    for (int epoch = 1; epoch <= 50; ++epoch)
      losses.push_back(train_epoch(instances, store, sampler, config, epoch));
    double first = std::accumulate(losses.begin(), losses.begin() + 10, 0.0) / 10.0;
    double last = std::accumulate(losses.end() - 10, losses.end(), 0.0) / 10.0;
    if (last <= first && losses.back() <= losses.front()) ++decreasing;
  }
  CHECK(decreasing >= 18);  // stochasticity allows rare upticks
}

TEST_CASE("run_training writes checkpoints, vocab dumps, and a manifest") {
  fx::TempDir dir("run");
  Dataset ds = toy_dataset(12, 3, 60, 1900, 1960, 15, 11, 10, 10);
  TrainConfig config;
  config.model = ModelKind::bt_hyte;
  config.dim = 8;
  config.max_epoch = 6;
  config.testfreq = 2;
  config.margin = 2.0;
  config.lr = 0.01;
  config.neg_sample = 2;
  config.batch_size = 50;
  config.bucket.threshold = 30;
  config.seed = 5;

  TrainResult result = run_training(ds, config, dir.path());
  for (const char* name : {"final.ckpt", "best-entity.ckpt", "best-relation.ckpt",
                           "manifest.txt", "entity_vocab.txt", "relation_vocab.txt"})
    CHECK(std::filesystem::exists(dir.file(name)));

  std::string manifest = fx::read_file(dir.file("manifest.txt"));
  CHECK(manifest.find("config model = bt-hyte") != std::string::npos);
  CHECK(manifest.find("epoch 0 head_mr ") != std::string::npos);
  CHECK(manifest.find("epoch 6 ") != std::string::npos);
  CHECK(result.manifest.history.size() == 4);  // epochs 0, 2, 4, 6

  // Best slots never beat an evaluated epoch.
  for (const ValidationPoint& p : result.manifest.history) {
    CHECK(result.best_entity_mr <= (p.head_mr + p.tail_mr) / 2.0 + 1e-12);
    CHECK(result.best_relation_mr <= p.rel_mr + 1e-12);
  }

  Checkpoint final = load_checkpoint(dir.file("final.ckpt"));
  CHECK(final.store.num_entities() == 12);
  CHECK(final.index.num_buckets() == result.index.num_buckets());
}

TEST_CASE("run_training with max_epoch 0 emits the initialized model") {
  fx::TempDir dir("init");
  Dataset ds = toy_dataset(8, 2, 30, 1900, 1950, 10, 17, 5, 5);
  TrainConfig config;
  config.model = ModelKind::transe;
  config.dim = 8;
  config.max_epoch = 0;
  config.bucket.threshold = 25;
  TrainResult result = run_training(ds, config, dir.path());
  CHECK(std::filesystem::exists(dir.file("final.ckpt")));
  CHECK(result.manifest.history.size() == 1);  // the epoch-0 evaluation only

  Checkpoint ckpt = load_checkpoint(dir.file("final.ckpt"));
  EmbeddingStore fresh(ModelKind::transe, 8, 2, ckpt.index.num_buckets(), 8);
  fresh.init_uniform(config.seed);
  for (int e = 0; e < 8; ++e) {
    auto a = ckpt.store.entity(e);
    auto b = fresh.entity(e);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("a short run does not leave the best checkpoint worse than epoch 0") {
  fx::TempDir dir("improve");
  Dataset ds = toy_dataset(10, 2, 80, 1990, 2000, 5, 29, 20, 0);
  TrainConfig config;
  config.model = ModelKind::bt_hyte;
  config.dim = 16;
  config.max_epoch = 40;
  config.testfreq = 10;
  config.margin = 2.0;
  config.lr = 0.01;
  config.neg_sample = 2;
  config.batch_size = 200;
  config.bucket.threshold = 100;
  config.seed = 2;
  TrainResult result = run_training(ds, config, dir.path());
  const ValidationPoint& first = result.manifest.history.front();
  CHECK(result.best_entity_mr <= (first.head_mr + first.tail_mr) / 2.0 + 1e-12);
}

TEST_CASE("identical runs produce byte-identical artifacts") {
  fx::TempDir a("det-a"), b("det-b");
  Dataset ds = toy_dataset(10, 3, 50, 1900, 1950, 12, 19, 8, 8);
  TrainConfig config;
  config.model = ModelKind::tr_hyte;
  config.dim = 8;
  config.max_epoch = 4;
  config.testfreq = 2;
  config.margin = 2.0;
  config.lr = 0.05;
  config.neg_sample = 3;
  config.batch_size = 32;
  config.bucket.threshold = 40;
  config.seed = 77;

  run_training(ds, config, a.path());
  run_training(ds, config, b.path());
  for (const char* name : {"final.ckpt", "best-entity.ckpt", "best-relation.ckpt",
                           "manifest.txt"})
    CHECK(fx::read_file(a.file(name)) == fx::read_file(b.file(name)));
}

TEST_CASE("run_training surfaces all config violations") {
  Dataset ds = toy_dataset(5, 2, 10, 1900, 1910, 5, 23);
  TrainConfig config;
  config.lr = -1.0;
  config.neg_sample = 0;
  fx::TempDir dir("invalid");
  try {
    run_training(ds, config, dir.path());
    FAIL("expected config_error");
  } catch (const config_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("lr") != std::string::npos);
    CHECK(msg.find("neg_sample") != std::string::npos);
  }
}

TEST_CASE("a non-finite parameter aborts the epoch with diagnostics") {
  Dataset ds = toy_dataset(6, 2, 12, 1900, 1910, 5, 31);
  TrainConfig config;
  config.model = ModelKind::bt_hyte;
  config.dim = 4;
  config.margin = 1.0;
  config.lr = 0.01;
  config.neg_sample = 1;
  config.batch_size = 8;
  config.bucket.threshold = 100;
  BucketIndex index = build_index_for(config.model, ds, config.bucket);
  EmbeddingStore store(config.model, 6, 2, index.num_buckets(), config.dim);
  store.init_uniform(1);
  store.entity(2)[1] = std::numeric_limits<double>::quiet_NaN();

  PositiveFilter filter = PositiveFilter::from_dataset(ds, PositiveFilter::Scope::train);
  NegativeSampler sampler(config.sampler_config(), filter, 6, 2);
  auto instances = expand_training_instances(ds, index);
  try {
    train_epoch(instances, store, sampler, config, 3);
    FAIL("expected an abort on the NaN parameter");
  } catch (const error& e) {
    std::string msg = e.what();
    CHECK(msg.find("epoch 3") != std::string::npos);
    CHECK(msg.find("batch") != std::string::npos);
  }
}
