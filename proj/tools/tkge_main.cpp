// Command-line front end: bucket-stats | train | eval | predict | inspect-ckpt.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tkge/buckets.hpp"
#include "tkge/checkpoint.hpp"
#include "tkge/dataset.hpp"
#include "tkge/eval.hpp"
#include "tkge/model.hpp"
#include "tkge/trainer.hpp"

namespace {

using namespace tkge;

struct DataPaths {
  std::string train;
  std::string valid;
  std::string test;
};

void add_data_options(CLI::App* cmd, DataPaths& paths, bool all_required) {
  auto* t = cmd->add_option("--train", paths.train, "train split file");
  auto* v = cmd->add_option("--valid", paths.valid, "valid split file");
  auto* s = cmd->add_option("--test", paths.test, "test split file");
  t->required();
  if (all_required) {
    v->required();
    s->required();
  }
}

// Flag values are optional so that only flags the user actually passed
// override the config file (resolution order: defaults < TKGE_SEED <
// config file < flags).
struct TrainFlags {
  std::optional<std::string> model;
  std::optional<std::string> norm;
  std::optional<double> lr;
  std::optional<int> max_epoch;
  std::optional<int> testfreq;
  std::optional<int> dim;
  std::optional<double> margin;
  std::optional<int> neg_sample;
  std::optional<int> batch_size;
  std::optional<int> slice_width;
  std::optional<int> thr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<double> rel_neg_weight;
  std::optional<std::string> filter_scope;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--model", flags.model, "transe|transh|hyte|bt-hyte|tr-hyte");
  cmd->add_option("--norm", flags.norm, "l1|l2");
  cmd->add_option("--lr", flags.lr, "SGD step size");
  cmd->add_option("--max_epoch", flags.max_epoch, "training epochs");
  cmd->add_option("--testfreq", flags.testfreq, "epochs between validation passes");
  cmd->add_option("--dim", flags.dim, "embedding dimension");
  cmd->add_option("--margin", flags.margin, "hinge margin");
  cmd->add_option("--neg_sample", flags.neg_sample, "negatives per positive");
  cmd->add_option("--batch_size", flags.batch_size, "instances per mini-batch");
  cmd->add_option("--slice_width", flags.slice_width, "finest time slice in years");
  cmd->add_option("--thr", flags.thr, "bucket fact-count threshold");
  cmd->add_option("--seed", flags.seed, "RNG seed (TKGE_SEED is the fallback)");
  cmd->add_option("--strategy", flags.strategy, "entities-only|entities+relations");
  cmd->add_option("--rel_neg_weight", flags.rel_neg_weight, "relation corruption probability");
  cmd->add_option("--filter_scope", flags.filter_scope, "train|all");
}

TrainConfig resolve_config(const std::string& config_path, const TrainFlags& flags) {
  TrainConfig config;
  if (const char* env = std::getenv("TKGE_SEED")) {
    try {
      config.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw config_error(std::string("TKGE_SEED is not a number: '") + env + "'");
    }
  }
  if (!config_path.empty()) config = load_train_config(config_path, config);
  if (flags.model) config.model = parse_model_kind(*flags.model);
  if (flags.norm) config.norm = parse_norm(*flags.norm);
  if (flags.lr) config.lr = *flags.lr;
  if (flags.max_epoch) config.max_epoch = *flags.max_epoch;
  if (flags.testfreq) config.testfreq = *flags.testfreq;
  if (flags.dim) config.dim = *flags.dim;
  if (flags.margin) config.margin = *flags.margin;
  if (flags.neg_sample) config.neg_sample = *flags.neg_sample;
  if (flags.batch_size) config.batch_size = *flags.batch_size;
  if (flags.slice_width) config.bucket.slice_width = *flags.slice_width;
  if (flags.thr) config.bucket.threshold = *flags.thr;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.strategy) config.strategy = parse_strategy(*flags.strategy);
  if (flags.rel_neg_weight) config.rel_neg_weight = *flags.rel_neg_weight;
  if (flags.filter_scope) config.filter_scope = parse_filter_scope(*flags.filter_scope);
  return config;
}

void check_vocab_match(const Dataset& ds, const EmbeddingStore& store) {
  if (ds.entity_vocab.size() != store.num_entities() ||
      ds.relation_vocab.size() != store.num_relations())
    throw error("checkpoint/dataset vocab mismatch: checkpoint has " +
                std::to_string(store.num_entities()) + " entities / " +
                std::to_string(store.num_relations()) + " relations, dataset has " +
                std::to_string(ds.entity_vocab.size()) + " / " +
                std::to_string(ds.relation_vocab.size()));
}

int cmd_bucket_stats(const DataPaths& paths, int slice_width, int thr) {
  Dataset ds = load_dataset(paths.train, paths.valid, paths.test);
  BucketConfig config{slice_width, thr};
  SliceHistogram hist = expand_fine_slices(spans_of(ds.train), config);
  BucketIndex index = build_boundaries(hist, config);
  std::cout << format_dataset_stats(ds.stats);
  std::cout << "fine slices " << hist.num_slices() << " (diagnostic n = "
            << hist.expected_slice_count(config) << "), total mass " << hist.total() << '\n';
  std::cout << format_bucket_stats(bucket_stats(ds, index, config), index, config);
  return 0;
}

int cmd_train(const std::string& config_path, const TrainFlags& flags, const DataPaths& paths,
              const std::string& out_dir) {
  TrainConfig config = resolve_config(config_path, flags);
  if (auto problems = config.validate(); !problems.empty()) {
    std::cerr << "error: invalid configuration:\n";
    for (const std::string& p : problems) std::cerr << "  - " << p << '\n';
    return 1;
  }
  Dataset ds = load_dataset(paths.train, paths.valid, paths.test);
  std::cout << format_dataset_stats(ds.stats);
  std::cout << format_train_config(config);
  run_training(ds, config, out_dir, &std::cout);
  std::cout << "wrote final.ckpt, best-entity.ckpt, best-relation.ckpt, manifest.txt to "
            << out_dir << '\n';
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const DataPaths& paths, const std::string& split_name,
             const std::vector<std::string>& task_names, const std::vector<int>& ks,
             bool filtered, const std::string& tau_mode_name, std::size_t fine_cases,
             const std::string& fine_csv, const std::string& report_out) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_dataset(paths.train, paths.valid, paths.test);
  check_vocab_match(ds, ckpt.store);
  const std::vector<Quadruple>& split = ds.split(split_name);
  if (split.empty()) throw error("split '" + split_name + "' is empty");

  std::vector<Task> tasks;
  for (const std::string& name : task_names) tasks.push_back(parse_task(name));

  std::optional<PositiveFilter> filter;
  if (filtered) filter = PositiveFilter::from_dataset(ds, PositiveFilter::Scope::all);
  TauMode tau_mode;
  if (tau_mode_name == "start") tau_mode = TauMode::start_year;
  else if (tau_mode_name == "span-min") tau_mode = TauMode::span_min;
  else throw config_error("unknown tau_mode '" + tau_mode_name + "' (expected start or span-min)");

  auto reports = evaluate_split(split, tasks, ckpt.store, ckpt.store.kind(), ckpt.norm,
                                ckpt.index, ks, filter ? &*filter : nullptr, tau_mode);
  std::string table = format_rank_reports(reports);
  std::string lines;
  for (const RankReport& r : reports) lines += machine_line(r) + '\n';
  std::cout << table << lines;

  if (!report_out.empty()) {
    std::ofstream out(report_out);
    if (!out) throw io_error("cannot write report " + report_out);
    out << table << lines;
  }
  if (fine_cases > 0) {
    auto records = fine_grained_report(split, ckpt.store, ckpt.store.kind(), ckpt.norm,
                                       ckpt.index, fine_cases);
    std::cout << format_completion_table(records, ds.entity_vocab, ds.relation_vocab);
    if (!fine_csv.empty()) {
      std::ofstream out(fine_csv);
      if (!out) throw io_error("cannot write csv " + fine_csv);
      out << completion_csv(records, ds.entity_vocab, ds.relation_vocab);
    }
  }
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const DataPaths& paths,
                const std::vector<std::string>& query, int top_n) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_dataset(paths.train, paths.valid, paths.test);
  check_vocab_match(ds, ckpt.store);

  int unknowns = 0;
  for (int slot = 0; slot < 3; ++slot)
    if (query[static_cast<std::size_t>(slot)] == "?") ++unknowns;
  if (unknowns != 1)
    throw config_error("exactly one of head/relation/tail must be '?', got " +
                       std::to_string(unknowns));

  auto entity_id = [&](const std::string& name) {
    if (auto id = ds.entity_vocab.find(name)) return static_cast<EntityId>(*id);
    throw unknown_symbol_error("unknown entity '" + name + "'");
  };
  auto relation_id = [&](const std::string& name) {
    if (auto id = ds.relation_vocab.find(name)) return static_cast<RelationId>(*id);
    throw unknown_symbol_error("unknown relation '" + name + "'");
  };
  auto year_of = [](const std::string& token) {
    try {
      std::size_t pos = 0;
      int year = std::stoi(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      return static_cast<Year>(year);
    } catch (const std::exception&) {
      throw time_parse_error("expected a year, got '" + token + "'");
    }
  };

  Task task = query[0] == "?" ? Task::head : (query[1] == "?" ? Task::relation : Task::tail);
  Quadruple q{};
  if (task != Task::head) q.head = entity_id(query[0]);
  if (task != Task::relation) q.relation = relation_id(query[1]);
  if (task != Task::tail) q.tail = entity_id(query[2]);
  q.t_s = year_of(query[3]);
  q.t_e = year_of(query[4]);
  if (q.t_s > q.t_e) std::swap(q.t_s, q.t_e);

  int candidates = task == Task::relation ? ckpt.store.num_relations()
                                          : ckpt.store.num_entities();
  int keep = std::min(top_n, candidates);
  RankedCandidates ranked = rank_candidates(q, task, ckpt.store, ckpt.store.kind(), ckpt.norm,
                                            ckpt.index, keep);
  std::cout << "task " << to_string(task) << ", bucket " << ckpt.index.bucket_of(q.t_s) << " of "
            << ckpt.index.num_buckets() << '\n';
  for (std::size_t i = 0; i < ranked.top.size(); ++i) {
    auto [id, s] = ranked.top[i];
    const std::string& name =
        task == Task::relation ? ds.relation_vocab.name(id) : ds.entity_vocab.name(id);
    std::cout << i + 1 << '\t' << name << '\t' << s << '\n';
  }
  return 0;
}

int cmd_inspect(const std::string& ckpt_path) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  const EmbeddingStore& store = ckpt.store;
  std::cout << "model " << to_string(store.kind()) << "  norm " << to_string(ckpt.norm)
            << "  dim " << store.dim() << '\n'
            << "entities " << store.num_entities() << "  relations " << store.num_relations()
            << "  buckets " << ckpt.index.num_buckets() << '\n'
            << "years [" << ckpt.index.min_year() << ", " << ckpt.index.max_year() << "], "
            << ckpt.index.boundaries().size() << " boundaries\n";
  for (ParamTable table : {ParamTable::entity, ParamTable::relation, ParamTable::normal,
                           ParamTable::relation_normal}) {
    int rows = store.rows(table);
    if (rows == 0) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int id = 0; id < rows; ++id) {
      double len = norm_value(store.row(table, id), Norm::l2);
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
    const char* label = table == ParamTable::entity     ? "entity"
                        : table == ParamTable::relation ? "relation"
                        : table == ParamTable::normal   ? "normal"
                                                        : "relation-normal";
    std::cout << label << " rows " << rows << "  l2 range [" << lo << ", " << hi << "]\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal knowledge-graph completion toolchain"};
  app.require_subcommand(1);

  auto* stats_cmd = app.add_subcommand("bucket-stats", "balanced timestamp distribution report");
  DataPaths stats_paths;
  add_data_options(stats_cmd, stats_paths, false);
  int stats_width = 1, stats_thr = 300;
  stats_cmd->add_option("--slice_width", stats_width, "finest time slice in years");
  stats_cmd->add_option("--thr", stats_thr, "bucket fact-count threshold");

  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoints");
  DataPaths train_paths;
  add_data_options(train_cmd, train_paths, true);
  std::string config_path, out_dir = "tkge-out";
  train_cmd->add_option("--config", config_path, "key = value config file");
  train_cmd->add_option("--out_dir", out_dir, "output directory");
  TrainFlags flags;
  add_train_flags(train_cmd, flags);

  auto* eval_cmd = app.add_subcommand("eval", "rank-based evaluation of a checkpoint");
  DataPaths eval_paths;
  add_data_options(eval_cmd, eval_paths, true);
  std::string eval_ckpt, eval_split = "test", fine_csv, report_out, tau_mode = "start";
  std::vector<std::string> eval_tasks = {"head", "tail", "relation"};
  std::vector<int> eval_ks;
  bool filtered = false;
  std::size_t fine_cases = 0;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--split", eval_split, "train|valid|test");
  eval_cmd->add_option("--tasks", eval_tasks, "head,tail,relation")->delimiter(',');
  eval_cmd->add_option("--k", eval_ks, "extra hit@k cutoffs")->delimiter(',');
  eval_cmd->add_flag("--filtered", filtered, "drop known positives from candidates (diagnostic)");
  eval_cmd->add_option("--tau_mode", tau_mode, "start|span-min: bucket(s) queries score on");
  eval_cmd->add_option("--fine_grained", fine_cases, "emit per-query completion records");
  eval_cmd->add_option("--fine_csv", fine_csv, "write completion records as CSV");
  eval_cmd->add_option("--report_out", report_out, "write the report to a file");

  auto* predict_cmd = app.add_subcommand("predict", "complete a partial fact");
  DataPaths predict_paths;
  add_data_options(predict_cmd, predict_paths, true);
  std::string predict_ckpt;
  std::vector<std::string> query;
  int top_n = 10;
  predict_cmd->add_option("--ckpt", predict_ckpt, "checkpoint file")->required();
  predict_cmd->add_option("query", query, "head relation tail t_s t_e, one slot '?'")
      ->expected(5);
  predict_cmd->add_option("--top_n", top_n, "candidates to print");

  auto* inspect_cmd = app.add_subcommand("inspect-ckpt", "print checkpoint metadata");
  std::string inspect_path;
  inspect_cmd->add_option("--ckpt", inspect_path, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (stats_cmd->parsed()) return cmd_bucket_stats(stats_paths, stats_width, stats_thr);
    if (train_cmd->parsed()) return cmd_train(config_path, flags, train_paths, out_dir);
    if (eval_cmd->parsed())
      return cmd_eval(eval_ckpt, eval_paths, eval_split, eval_tasks, eval_ks, filtered,
                      tau_mode, fine_cases, fine_csv, report_out);
    if (predict_cmd->parsed()) return cmd_predict(predict_ckpt, predict_paths, query, top_n);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path);
  } catch (const tkge::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
