#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/dataset.hpp"
#include "titlepress/exp/checkpoint.hpp"
#include "titlepress/exp/experiments.hpp"
#include "titlepress/model/model.hpp"
#include "titlepress/pretrain/corruption.hpp"
#include "titlepress/pretrain/skipgram.hpp"
#include "titlepress/text.hpp"
#include "titlepress/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace titlepress;

namespace {

struct CommonOpts {
  std::string config_path;
  uint64_t seed = 42;
  std::string outdir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key = value config file");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--outdir", opts.outdir, "output directory");
}

void check_device() {
  const char* dev = std::getenv("TITLEPRESS_DEVICE");
  if (!dev) return;
  std::string d(dev);
  std::transform(d.begin(), d.end(), d.begin(), ::tolower);
  if (d != "cpu")
    throw std::runtime_error("TITLEPRESS_DEVICE=" + std::string(dev) +
                             " is not available; only 'cpu' is supported");
}

std::pair<ModelConfig, TrainingConfig> load_configs(const CommonOpts& opts) {
  ModelConfig model;
  TrainingConfig train;
  if (!opts.config_path.empty()) apply_config_file(opts.config_path, model, train);
  train.seed = opts.seed;
  return {model, train};
}

std::vector<RawTitlePair> normalized_pairs(const std::string& path) {
  auto pairs = read_pairs_jsonl(path);
  for (auto& p : pairs) {
    p.long_title = normalize_text(p.long_title);
    if (p.short_title) p.short_title = normalize_text(*p.short_title);
  }
  return pairs;
}

std::vector<std::vector<std::string>> long_title_tokens(
    const std::vector<RawTitlePair>& pairs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(tokenize(p.long_title));
  return out;
}

double median_length(const std::vector<std::vector<std::string>>& titles) {
  std::vector<size_t> lens;
  lens.reserve(titles.size());
  for (const auto& t : titles) lens.push_back(t.size());
  std::sort(lens.begin(), lens.end());
  if (lens.empty()) throw std::runtime_error("no titles to take a median over");
  const size_t mid = lens.size() / 2;
  return lens.size() % 2 ? double(lens[mid]) : (lens[mid - 1] + lens[mid]) / 2.0;
}

void ensure_outdir(const std::string& dir) {
  if (!dir.empty() && dir != ".") fs::create_directories(dir);
}

model::Model load_model_checkpoint(const std::string& path, const Vocabulary& vocab) {
  auto loaded = exp::load_checkpoint(path, vocab.hash());
  return std::move(loaded.model);
}

// Assembles everything the ablation/sweep harness needs from one labeled
// pair file: splits, vocabulary, skip-gram model and the RTD corpus.
exp::ExperimentData build_experiment_data(const std::string& pairs_path,
                                          const ModelConfig& mc, uint64_t seed, double f,
                                          int sg_epochs) {
  auto pairs = normalized_pairs(pairs_path);
  auto splits = split_dataset(pairs, seed);
  auto train_tokens = long_title_tokens(splits.train);

  exp::ExperimentData data;
  data.seed = seed;
  data.vocab = Vocabulary::build(train_tokens);
  data.train = train::to_labeled(splits.train, data.vocab, mc);
  data.val = train::to_labeled(splits.val, data.vocab, mc);
  data.test = train::to_labeled(splits.test, data.vocab, mc);

  pretrain::SkipGramConfig sgc;
  sgc.dim = mc.e_word;
  sgc.epochs = sg_epochs;
  sgc.seed = seed;
  auto sg = pretrain::SkipGramModel::train(train_tokens, sgc);
  nn::Mat vectors = nn::Mat::Zero(data.vocab.word_count(), mc.e_word);
  for (int id = 2; id < data.vocab.word_count(); ++id) {
    const int sid = sg.token_id(data.vocab.word(id));
    if (sid >= 0) vectors.row(id) = sg.input_vectors().row(sid);
  }
  vectors.row(Vocabulary::kUnkId) =
      vectors.bottomRows(vectors.rows() - 2).colwise().mean();
  data.word_vectors = vectors;

  auto rtd = pretrain::build_pretraining_corpus(train_tokens, sg, f, seed, mc.n_max);
  auto rtd_labeled = train::to_labeled(rtd, data.vocab, mc);
  const size_t n_val = std::max<size_t>(1, rtd_labeled.size() / 20);
  data.pretrain_val.assign(rtd_labeled.begin(), rtd_labeled.begin() + n_val);
  data.pretrain_train.assign(rtd_labeled.begin() + n_val, rtd_labeled.end());
  data.pretrain_weights = pretrain::pretrain_class_weights(median_length(train_tokens), f,
                                                           mc.n_max);
  return data;
}

void save_ablation_results(const std::vector<exp::AblationResult>& results,
                           const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results)
    j.push_back({{"name", r.name},
                 {"f1", r.metrics.rouge1_f1},
                 {"em", r.metrics.em},
                 {"n", r.metrics.n},
                 {"pretrain_accuracy", r.pretrain_accuracy}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<exp::AblationResult> load_ablation_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  std::vector<exp::AblationResult> out;
  for (const auto& e : j) {
    exp::AblationResult r;
    r.name = e.at("name");
    r.metrics.rouge1_f1 = e.at("f1");
    r.metrics.em = e.at("em");
    r.metrics.n = e.at("n");
    r.pretrain_accuracy = e.at("pretrain_accuracy");
    out.push_back(std::move(r));
  }
  return out;
}

void save_sweep_results(const std::vector<exp::SweepPoint>& points, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : points)
    j.push_back({{"fraction", p.fraction}, {"variant", p.variant}, {"f1", p.f1},
                 {"em", p.em}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<exp::SweepPoint> load_sweep_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  std::vector<exp::SweepPoint> out;
  for (const auto& e : j)
    out.push_back({e.at("fraction"), e.at("variant"), e.at("f1"), e.at("em")});
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"extractive product-title compression toolkit"};
  app.require_subcommand(1);
  check_device();

  // --- normalize ---------------------------------------------------------
  auto* normalize = app.add_subcommand("normalize", "normalize title pairs in place");
  std::string norm_in, norm_out;
  normalize->add_option("--in", norm_in, "input pairs JSONL")->required();
  normalize->add_option("--out", norm_out, "output pairs JSONL")->required();
  normalize->callback([&]() { write_pairs_jsonl(norm_out, normalized_pairs(norm_in)); });

  // --- build-vocab -------------------------------------------------------
  auto* build_vocab = app.add_subcommand("build-vocab", "build the vocabulary");
  std::string bv_in, bv_out;
  build_vocab->add_option("--in", bv_in, "pairs JSONL")->required();
  build_vocab->add_option("--out", bv_out, "vocabulary JSON")->required();
  build_vocab->callback([&]() {
    auto vocab = Vocabulary::build(long_title_tokens(normalized_pairs(bv_in)));
    vocab.save(bv_out);
    std::cout << "vocabulary: " << vocab.word_count() << " words, " << vocab.char_count()
              << " chars\n";
  });

  // --- split -------------------------------------------------------------
  auto* split = app.add_subcommand("split", "deterministic 72/8/20 split");
  CommonOpts split_opts;
  std::string split_in;
  split->add_option("--in", split_in, "pairs JSONL")->required();
  add_common(split, split_opts);
  split->callback([&]() {
    ensure_outdir(split_opts.outdir);
    auto splits = split_dataset(normalized_pairs(split_in), split_opts.seed);
    const fs::path dir(split_opts.outdir);
    write_pairs_jsonl((dir / "train.jsonl").string(), splits.train);
    write_pairs_jsonl((dir / "val.jsonl").string(), splits.val);
    write_pairs_jsonl((dir / "test.jsonl").string(), splits.test);
    std::cout << "train=" << splits.train.size() << " val=" << splits.val.size()
              << " test=" << splits.test.size() << "\n";
  });

  // --- train-skipgram ----------------------------------------------------
  auto* sg_cmd = app.add_subcommand("train-skipgram", "train the context model");
  CommonOpts sg_opts;
  std::string sg_in, sg_out, sg_vectors;
  pretrain::SkipGramConfig sgc;
  sg_cmd->add_option("--in", sg_in, "pairs JSONL (long titles)")->required();
  sg_cmd->add_option("--out", sg_out, "skip-gram model JSON")->required();
  sg_cmd->add_option("--vectors", sg_vectors, "also write word vectors (text)");
  sg_cmd->add_option("--dim", sgc.dim, "embedding dimension");
  sg_cmd->add_option("--window", sgc.window, "context window radius");
  sg_cmd->add_option("--epochs", sgc.epochs, "training epochs");
  sg_cmd->add_option("--negatives", sgc.negatives, "negative samples per pair");
  add_common(sg_cmd, sg_opts);
  sg_cmd->callback([&]() {
    sgc.seed = sg_opts.seed;
    auto model = pretrain::SkipGramModel::train(long_title_tokens(normalized_pairs(sg_in)),
                                                sgc);
    model.save(sg_out);
    if (!sg_vectors.empty()) model.save_vectors(sg_vectors);
    std::cout << "skip-gram: |V|=" << model.vocab_size() << " dim=" << model.dim() << "\n";
  });

  // --- pretrain-gen ------------------------------------------------------
  auto* gen = app.add_subcommand("pretrain-gen", "generate the corrupted RTD corpus");
  CommonOpts gen_opts;
  std::string gen_in, gen_model, gen_out;
  double gen_f = 0.25;
  int gen_topk = 0;
  gen->add_option("--in", gen_in, "pairs JSONL (long titles)")->required();
  gen->add_option("--skipgram", gen_model, "trained skip-gram JSON")->required();
  gen->add_option("--out", gen_out, "output corpus JSONL")->required();
  gen->add_option("--f", gen_f, "corruption fraction per copy");
  gen->add_option("--top-k", gen_topk, "restrict candidates to top-k frequent tokens");
  add_common(gen, gen_opts);
  gen->callback([&]() {
    auto [mc, tc] = load_configs(gen_opts);
    auto model = pretrain::SkipGramModel::load(gen_model);
    auto corpus = pretrain::build_pretraining_corpus(
        long_title_tokens(normalized_pairs(gen_in)), model, gen_f, gen_opts.seed, mc.n_max,
        gen_topk);
    write_token_label_jsonl(gen_out, corpus);
    std::cout << "wrote " << corpus.size() << " records\n";
  });

  // --- pretrain ----------------------------------------------------------
  auto* pre = app.add_subcommand("pretrain", "train the encoder on the RTD corpus");
  CommonOpts pre_opts;
  std::string pre_corpus, pre_vocab, pre_out, pre_vectors;
  double pre_f = 0.25;
  pre->add_option("--corpus", pre_corpus, "RTD corpus JSONL")->required();
  pre->add_option("--vocab", pre_vocab, "vocabulary JSON")->required();
  pre->add_option("--out", pre_out, "output checkpoint")->required();
  pre->add_option("--word-vectors", pre_vectors, "frozen word vectors (text)");
  pre->add_option("--f", pre_f, "corruption fraction used for class weights");
  add_common(pre, pre_opts);
  pre->callback([&]() {
    auto [mc, tc] = load_configs(pre_opts);
    auto vocab = Vocabulary::load(pre_vocab);
    auto records = read_token_label_jsonl(pre_corpus);
    std::vector<std::vector<std::string>> tokens;
    for (const auto& r : records) tokens.push_back(r.tokens);
    tc.weights = pretrain::pretrain_class_weights(median_length(tokens), pre_f, mc.n_max);
    auto labeled = train::to_labeled(records, vocab, mc);
    const size_t n_val = std::max<size_t>(1, labeled.size() / 20);
    std::vector<train::LabeledExample> val(labeled.begin(), labeled.begin() + n_val);
    std::vector<train::LabeledExample> trn(labeled.begin() + n_val, labeled.end());
    model::Model m(mc, vocab.word_count(), vocab.char_count(), pre_opts.seed);
    if (!pre_vectors.empty())
      model::set_word_table(m.params(),
                            model::load_word_vectors(pre_vectors, vocab, mc.e_word), true);
    auto result = train::train(m, trn, val, tc, train::ValMetric::kTokenAccuracy);
    exp::save_checkpoint(pre_out, m, vocab.hash(), result.best_epoch);
    std::cout << "pretrain: best val accuracy " << result.best_val_f1 << " ("
              << result.stop_reason << ")\n";
  });

  // --- finetune ----------------------------------------------------------
  auto* fine = app.add_subcommand("finetune", "train or fine-tune the labeler");
  CommonOpts fine_opts;
  std::string ft_train, ft_val, ft_vocab, ft_init, ft_out, ft_vectors;
  bool ft_unfreeze = false;
  fine->add_option("--train", ft_train, "training pairs JSONL")->required();
  fine->add_option("--val", ft_val, "validation pairs JSONL")->required();
  fine->add_option("--vocab", ft_vocab, "vocabulary JSON")->required();
  fine->add_option("--init", ft_init, "initial checkpoint (pre-trained encoder)");
  fine->add_option("--out", ft_out, "output checkpoint")->required();
  fine->add_option("--word-vectors", ft_vectors, "frozen word vectors (text)");
  fine->add_flag("--gradual-unfreeze", ft_unfreeze, "unfreeze layer groups top-down");
  add_common(fine, fine_opts);
  fine->callback([&]() {
    auto [mc, tc] = load_configs(fine_opts);
    tc.gradual_unfreeze = ft_unfreeze;
    auto vocab = Vocabulary::load(ft_vocab);
    auto trn = train::to_labeled(normalized_pairs(ft_train), vocab, mc);
    auto val = train::to_labeled(normalized_pairs(ft_val), vocab, mc);
    model::Model m(mc, vocab.word_count(), vocab.char_count(), fine_opts.seed);
    if (!ft_vectors.empty())
      model::set_word_table(m.params(),
                            model::load_word_vectors(ft_vectors, vocab, mc.e_word), true);
    if (!ft_init.empty()) exp::load_checkpoint_into(ft_init, m, vocab.hash());
    auto result = train::train(m, trn, val, tc);
    exp::save_checkpoint(ft_out, m, vocab.hash(), result.best_epoch);
    const fs::path hist = fs::path(fine_opts.outdir) / "history.csv";
    ensure_outdir(fine_opts.outdir);
    result.save_history_csv(hist.string());
    std::cout << "finetune: best val F1 " << result.best_val_f1 << " ("
              << result.stop_reason << ")\n";
  });

  // --- evaluate ----------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a test split");
  CommonOpts eval_opts;
  std::string ev_test, ev_vocab, ev_ckpt, ev_out;
  eval->add_option("--test", ev_test, "test pairs JSONL")->required();
  eval->add_option("--vocab", ev_vocab, "vocabulary JSON")->required();
  eval->add_option("--ckpt", ev_ckpt, "model checkpoint")->required();
  eval->add_option("--out", ev_out, "metrics JSON output");
  add_common(eval, eval_opts);
  eval->callback([&]() {
    auto vocab = Vocabulary::load(ev_vocab);
    auto m = load_model_checkpoint(ev_ckpt, vocab);
    auto examples = train::to_labeled(normalized_pairs(ev_test), vocab, m.config());
    auto report = train::evaluate(m, examples);
    if (!ev_out.empty()) report.save_json(ev_out);
    std::cout << "rouge1_f1=" << report.rouge1_f1 << " em=" << report.em << "% n="
              << report.n << "\n";
  });

  // --- ablate ------------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "run the predefined ablation grid");
  CommonOpts ab_opts;
  std::string ab_in, ab_names;
  double ab_f = 0.25;
  int ab_sg_epochs = 5;
  ablate->add_option("--in", ab_in, "full pairs JSONL")->required();
  ablate->add_option("--names", ab_names, "comma-separated variant names (default: all)");
  ablate->add_option("--f", ab_f, "corruption fraction");
  ablate->add_option("--skipgram-epochs", ab_sg_epochs, "context model epochs");
  add_common(ablate, ab_opts);
  ablate->callback([&]() {
    auto [mc, tc] = load_configs(ab_opts);
    ensure_outdir(ab_opts.outdir);
    auto data = build_experiment_data(ab_in, mc, ab_opts.seed, ab_f, ab_sg_epochs);
    std::vector<exp::AblationSpec> specs;
    if (ab_names.empty()) {
      specs = exp::predefined_ablations();
    } else {
      std::stringstream ss(ab_names);
      std::string name;
      while (std::getline(ss, name, ',')) specs.push_back(exp::ablation_by_name(name));
    }
    std::vector<exp::AblationResult> results;
    for (const auto& spec : specs) {
      std::cout << "running " << spec.name << "...\n";
      results.push_back(exp::run_ablation(spec, data, mc, tc));
      std::cout << "  F1=" << results.back().metrics.rouge1_f1
                << " EM=" << results.back().metrics.em << "\n";
    }
    const fs::path dir(ab_opts.outdir);
    save_ablation_results(results, (dir / "ablation_results.json").string());
    exp::emit_report(results, {}, ab_opts.outdir);
  });

  // --- sweep -------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "low-resource fine-tuning sweep");
  CommonOpts sw_opts;
  std::string sw_in;
  std::vector<double> sw_fractions = {0.05, 0.10, 0.20, 0.40, 0.70, 1.0};
  double sw_f = 0.25;
  int sw_sg_epochs = 5;
  sweep->add_option("--in", sw_in, "full pairs JSONL")->required();
  sweep->add_option("--fractions", sw_fractions, "training fractions");
  sweep->add_option("--f", sw_f, "corruption fraction");
  sweep->add_option("--skipgram-epochs", sw_sg_epochs, "context model epochs");
  add_common(sweep, sw_opts);
  sweep->callback([&]() {
    auto [mc, tc] = load_configs(sw_opts);
    ensure_outdir(sw_opts.outdir);
    auto data = build_experiment_data(sw_in, mc, sw_opts.seed, sw_f, sw_sg_epochs);
    auto points = exp::low_resource_sweep(sw_fractions, data, mc, tc);
    const fs::path dir(sw_opts.outdir);
    save_sweep_results(points, (dir / "sweep_results.json").string());
    exp::emit_report({}, points, sw_opts.outdir);
    for (const auto& p : points)
      std::cout << p.variant << " @ " << p.fraction << ": F1=" << p.f1 << " EM=" << p.em
                << "\n";
  });

  // --- report ------------------------------------------------------------
  auto* report = app.add_subcommand("report", "render tables and plots from saved results");
  CommonOpts rep_opts;
  std::string rep_ablations, rep_sweep;
  report->add_option("--ablations", rep_ablations, "ablation_results.json");
  report->add_option("--sweep", rep_sweep, "sweep_results.json");
  add_common(report, rep_opts);
  report->callback([&]() {
    std::vector<exp::AblationResult> ab;
    std::vector<exp::SweepPoint> sw;
    if (!rep_ablations.empty()) ab = load_ablation_results(rep_ablations);
    if (!rep_sweep.empty()) sw = load_sweep_results(rep_sweep);
    ensure_outdir(rep_opts.outdir);
    exp::emit_report(ab, sw, rep_opts.outdir);
    std::cout << "report written to " << rep_opts.outdir << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
