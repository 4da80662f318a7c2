#include "tkge/trainer.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tkge/checkpoint.hpp"

namespace tkge {

SamplingStrategy TrainConfig::resolved_strategy() const {
  return strategy.value_or(default_strategy(model));
}

double TrainConfig::resolved_rel_neg_weight() const {
  if (rel_neg_weight >= 0.0) return rel_neg_weight;
  return 1.0 / (2.0 * static_cast<double>(neg_sample));
}

SamplerConfig TrainConfig::sampler_config() const {
  SamplerConfig sc;
  sc.strategy = resolved_strategy();
  sc.count = neg_sample;
  sc.relation_weight = resolved_rel_neg_weight();
  return sc;
}

std::vector<std::string> TrainConfig::validate() const {
  std::vector<std::string> problems;
  if (!(lr > 0.0)) problems.push_back("lr must be > 0");
  if (max_epoch < 0) problems.push_back("max_epoch must be >= 0");
  if (testfreq < 1) problems.push_back("testfreq must be >= 1");
  if (dim < 1) problems.push_back("dim must be >= 1");
  if (!(margin > 0.0)) problems.push_back("margin must be > 0");
  if (neg_sample < 1) problems.push_back("neg_sample must be >= 1");
  if (batch_size < 1) problems.push_back("batch_size must be >= 1");
  if (bucket.slice_width < 1) problems.push_back("slice_width must be >= 1");
  if (bucket.threshold < 1) problems.push_back("thr must be >= 1");
  if (rel_neg_weight >= 0.0 && rel_neg_weight > 1.0)
    problems.push_back("rel_neg_weight must be within [0, 1]");
  return problems;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw config_error("bad value '" + value + "' for key '" + key + "'");
  return out;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    double out = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw config_error("bad value '" + value + "' for key '" + key + "'");
  }
}

}  // namespace

TrainConfig parse_train_config(std::istream& in, TrainConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty() || value.empty())
      throw config_error("config line " + std::to_string(line_no) + ": expected 'key = value'");

    if (key == "model") base.model = parse_model_kind(value);
    else if (key == "norm") base.norm = parse_norm(value);
    else if (key == "lr") base.lr = parse_double(value, key);
    else if (key == "max_epoch") base.max_epoch = parse_number<int>(value, key);
    else if (key == "testfreq") base.testfreq = parse_number<int>(value, key);
    else if (key == "dim" || key == "inpdim") base.dim = parse_number<int>(value, key);
    else if (key == "margin") base.margin = parse_double(value, key);
    else if (key == "neg_sample") base.neg_sample = parse_number<int>(value, key);
    else if (key == "batch_size") base.batch_size = parse_number<int>(value, key);
    else if (key == "slice_width") base.bucket.slice_width = parse_number<int>(value, key);
    else if (key == "thr") base.bucket.threshold = parse_number<int>(value, key);
    else if (key == "seed") base.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "strategy") base.strategy = parse_strategy(value);
    else if (key == "rel_neg_weight") base.rel_neg_weight = parse_double(value, key);
    else if (key == "filter_scope") base.filter_scope = parse_filter_scope(value);
    else throw config_error("unknown config key '" + key + "'");
  }
  return base;
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file " + path.string());
  return parse_train_config(in, std::move(base));
}

namespace {

std::string shortest(double x) {
  char tmp[40];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof(tmp), x);
  return std::string(tmp, ptr);
}

std::vector<std::pair<std::string, std::string>> config_pairs(const TrainConfig& c) {
  return {
      {"model", std::string(to_string(c.model))},
      {"norm", std::string(to_string(c.norm))},
      {"lr", shortest(c.lr)},
      {"max_epoch", std::to_string(c.max_epoch)},
      {"testfreq", std::to_string(c.testfreq)},
      {"dim", std::to_string(c.dim)},
      {"margin", shortest(c.margin)},
      {"neg_sample", std::to_string(c.neg_sample)},
      {"batch_size", std::to_string(c.batch_size)},
      {"slice_width", std::to_string(c.bucket.slice_width)},
      {"thr", std::to_string(c.bucket.threshold)},
      {"seed", std::to_string(c.seed)},
      {"strategy", std::string(to_string(c.resolved_strategy()))},
      {"rel_neg_weight", shortest(c.resolved_rel_neg_weight())},
      {"filter_scope", std::string(to_string(c.filter_scope))},
  };
}

}  // namespace

std::string format_train_config(const TrainConfig& config) {
  std::ostringstream out;
  for (const auto& [key, value] : config_pairs(config)) out << key << " = " << value << '\n';
  return out.str();
}

BucketIndex build_index_for(ModelKind kind, const Dataset& dataset, const BucketConfig& config) {
  auto spans = spans_of(dataset.train);
  SliceHistogram hist = (kind == ModelKind::hyte) ? expand_endpoints(spans)
                                                  : expand_fine_slices(spans, config);
  return build_boundaries(hist, config);
}

std::vector<Instance> expand_training_instances(const Dataset& dataset,
                                                const BucketIndex& index) {
  std::vector<Instance> instances;
  for (const Quadruple& q : dataset.train) {
    auto [lo, hi] = index.buckets_covering(q.t_s, q.t_e);
    for (int b = lo; b <= hi; ++b) instances.push_back({q, b});
  }
  return instances;
}

double train_epoch(const std::vector<Instance>& instances, EmbeddingStore& store,
                   NegativeSampler& sampler, const TrainConfig& config, int epoch) {
  if (instances.empty()) throw error("train_epoch: no training instances");

  std::vector<std::uint32_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0u);
  Rng shuffle_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch), ~0ull));
  shuffle(order, shuffle_rng);

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  const std::size_t num_batches = (instances.size() + batch_size - 1) / batch_size;
  double epoch_loss = 0.0;

  for (std::size_t batch = 0; batch < num_batches; ++batch) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch), batch));
    std::size_t begin = batch * batch_size;
    std::size_t end = std::min(instances.size(), begin + batch_size);
    for (std::size_t i = begin; i < end; ++i) {
      const Instance& ins = instances[order[i]];
      NegativeBatch negatives = sampler.build_negatives(ins.quad, ins.tau, rng);
      for (const NegativeSample& neg : negatives) {
        double pos_score = score(ins.quad, ins.tau, config.model, config.norm, store);
        double neg_score = score(neg.quad, neg.tau, config.model, config.norm, store);
        if (!std::isfinite(pos_score) || !std::isfinite(neg_score))
          throw error("non-finite score at epoch " + std::to_string(epoch) + ", batch " +
                      std::to_string(batch) + ", instance " + std::to_string(order[i]));
        double loss = margin_loss(pos_score, neg_score, config.margin);
        epoch_loss += loss;
        if (loss > 0.0) {
          ScoredTriple pos{ins.quad, ins.tau, pos_score};
          ScoredTriple negative{neg.quad, neg.tau, neg_score};
          apply_gradients(store,
                          gradients(pos, negative, config.margin, config.model, config.norm, store),
                          config.lr);
        }
      }
    }
    enforce_constraints(store, &rng);
    if (!store.all_finite())
      throw error("non-finite parameter after epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(batch));
  }
  return epoch_loss;
}

std::string RunManifest::to_text() const {
  std::ostringstream out;
  out << "tkge-manifest v1\n";
  for (const auto& [key, value] : config_lines) out << "config " << key << " = " << value << '\n';
  out << dataset_line << '\n' << boundary_line << '\n' << init_line << '\n';
  for (const ValidationPoint& p : history)
    out << "epoch " << p.epoch << " head_mr " << shortest(p.head_mr) << " tail_mr "
        << shortest(p.tail_mr) << " rel_mr " << shortest(p.rel_mr) << " loss " << shortest(p.loss)
        << '\n';
  out << "best_entity_epoch " << best_entity_epoch << '\n'
      << "best_relation_epoch " << best_relation_epoch << '\n';
  return out.str();
}

TrainResult run_training(const Dataset& dataset, const TrainConfig& config,
                         const std::filesystem::path& out_dir, std::ostream* log) {
  if (auto problems = config.validate(); !problems.empty()) {
    std::string joined = "invalid train config:";
    for (const std::string& p : problems) joined += "\n  - " + p;
    throw config_error(joined);
  }
  if (dataset.train.empty()) throw error("run_training: empty train split");
  std::filesystem::create_directories(out_dir);

  BucketIndex index = build_index_for(config.model, dataset, config.bucket);
  EmbeddingStore store(config.model, dataset.entity_vocab.size(), dataset.relation_vocab.size(),
                       index.num_buckets(), config.dim);
  store.init_uniform(config.seed);

  PositiveFilter filter = PositiveFilter::from_dataset(dataset, config.filter_scope);
  NegativeSampler sampler(config.sampler_config(), filter, store.num_entities(),
                          store.num_relations());
  std::vector<Instance> instances = expand_training_instances(dataset, index);

  RunManifest manifest;
  manifest.config_lines = config_pairs(config);
  {
    std::ostringstream ds;
    ds << "dataset train " << dataset.train.size() << " valid " << dataset.valid.size()
       << " test " << dataset.test.size() << " entities " << dataset.entity_vocab.size()
       << " relations " << dataset.relation_vocab.size() << " instances " << instances.size();
    manifest.dataset_line = ds.str();
    std::ostringstream bl;
    bl << "boundaries " << index.min_year() << ' ' << index.max_year();
    for (Year b : index.boundaries()) bl << ' ' << b;
    manifest.boundary_line = bl.str();
    std::ostringstream il;
    il << "init uniform " << shortest(6.0 / std::sqrt(static_cast<double>(config.dim)))
       << " seed " << config.seed;
    manifest.init_line = il.str();
  }

  const std::filesystem::path best_entity_path = out_dir / "best-entity.ckpt";
  const std::filesystem::path best_relation_path = out_dir / "best-relation.ckpt";
  double best_entity = std::numeric_limits<double>::infinity();
  double best_relation = std::numeric_limits<double>::infinity();

  const std::array<Task, 3> tasks = {Task::head, Task::tail, Task::relation};
  auto validate_epoch = [&](int epoch, double loss) {
    if (dataset.valid.empty()) return;
    auto reports = evaluate_split(dataset.valid, tasks, store, config.model, config.norm, index);
    ValidationPoint point{epoch, reports[0].mean_rank, reports[1].mean_rank,
                          reports[2].mean_rank, loss};
    manifest.history.push_back(point);
    double entity_mr = (point.head_mr + point.tail_mr) / 2.0;
    if (entity_mr < best_entity) {
      best_entity = entity_mr;
      manifest.best_entity_epoch = epoch;
      save_checkpoint(best_entity_path, store, config.norm, index);
    }
    if (point.rel_mr < best_relation) {
      best_relation = point.rel_mr;
      manifest.best_relation_epoch = epoch;
      save_checkpoint(best_relation_path, store, config.norm, index);
    }
    if (log)
      *log << "epoch " << epoch << " valid head_mr " << point.head_mr << " tail_mr "
           << point.tail_mr << " rel_mr " << point.rel_mr << " loss " << loss << '\n';
  };

  validate_epoch(0, 0.0);
  for (int epoch = 1; epoch <= config.max_epoch; ++epoch) {
    auto started = std::chrono::steady_clock::now();
    double loss = train_epoch(instances, store, sampler, config, epoch);
    if (log) {
      std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
      *log << "epoch " << epoch << " loss " << loss << " seconds " << took.count() << '\n';
    }
    if (epoch % config.testfreq == 0 || epoch == config.max_epoch) validate_epoch(epoch, loss);
  }

  save_checkpoint(out_dir / "final.ckpt", store, config.norm, index);
  if (dataset.valid.empty()) {
    // No selection signal; the final parameters are the best we have.
    save_checkpoint(best_entity_path, store, config.norm, index);
    save_checkpoint(best_relation_path, store, config.norm, index);
  }
  dataset.entity_vocab.dump_file(out_dir / "entity_vocab.txt");
  dataset.relation_vocab.dump_file(out_dir / "relation_vocab.txt");

  std::ofstream mf(out_dir / "manifest.txt");
  if (!mf) throw io_error("cannot write manifest in " + out_dir.string());
  mf << manifest.to_text();

  TrainResult result{std::move(store), std::move(index), std::move(manifest), best_entity,
                     best_relation};
  if (sampler.retry_cap_escapes() > 0 && log)
    *log << "warning: " << sampler.retry_cap_escapes() << " negative draws hit the retry cap\n";
  return result;
}

}  // namespace tkge
