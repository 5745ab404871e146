#include "titlepress/exp/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "titlepress/model/model.hpp"

namespace titlepress::exp {

std::vector<AblationSpec> predefined_ablations() {
  std::vector<AblationSpec> specs;
  specs.push_back({"CB3SA"});
  specs.push_back({"CB3SA+PT"});
  specs.back().pretrained = true;
  specs.push_back({"CB3SA-CharCNN"});
  specs.back().use_char_cnn = false;
  specs.push_back({"CB3SA-BLSTM1"});
  specs.back().num_recurrent_layers = 2;
  specs.push_back({"CB3SA-SA"});
  specs.back().attention = AttentionKind::kNone;
  specs.push_back({"CB3SA-SA+NWSA7"});
  specs.back().attention = AttentionKind::kNarrow;
  specs.back().attn_window = 7;
  specs.push_back({"CB3SA-SA+MHSA8"});
  specs.back().attention = AttentionKind::kMultiHead;
  specs.back().attn_heads = 8;
  return specs;
}

AblationSpec ablation_by_name(const std::string& name) {
  auto specs = predefined_ablations();
  for (const auto& s : specs)
    if (s.name == name) return s;
  std::string valid;
  for (const auto& s : specs) valid += (valid.empty() ? "" : ", ") + s.name;
  throw std::runtime_error("unknown ablation '" + name + "'; valid names: " + valid);
}

namespace {
ModelConfig variant_config(const AblationSpec& spec, ModelConfig base) {
  base.use_char_cnn = spec.use_char_cnn;
  base.lstm_layers = spec.num_recurrent_layers;
  base.attention = spec.attention;
  base.attn_window = spec.attn_window;
  base.attn_heads = spec.attn_heads;
  return base;
}

model::Model build_model(const ModelConfig& config, const ExperimentData& data) {
  model::Model m(config, data.vocab.word_count(), data.vocab.char_count(), data.seed);
  if (data.word_vectors.size() > 0) {
    model::set_word_table(m.params(), data.word_vectors, true);
  } else {
    // No pre-trained vectors supplied: seed a random frozen table so the
    // word path still carries signal.
    std::mt19937_64 rng(data.seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> dist(0.0, 0.1);
    nn::Mat t(data.vocab.word_count(), config.e_word);
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = dist(rng);
    model::set_word_table(m.params(), t, true);
  }
  return m;
}
}  // namespace

AblationResult run_ablation(const AblationSpec& spec, const ExperimentData& data,
                            const ModelConfig& base_model, const TrainingConfig& base_train) {
  ModelConfig mc = variant_config(spec, base_model);
  model::Model m = build_model(mc, data);
  AblationResult result;
  result.name = spec.name;

  TrainingConfig tc = base_train;
  tc.seed = data.seed;
  if (spec.pretrained) {
    if (data.pretrain_train.empty())
      throw std::runtime_error("ablation " + spec.name + " needs a pre-training corpus");
    TrainingConfig ptc = base_train;
    ptc.seed = data.seed;
    ptc.weights = data.pretrain_weights;
    ptc.gradual_unfreeze = false;
    train::train(m, data.pretrain_train, data.pretrain_val, ptc,
                 train::ValMetric::kTokenAccuracy);
    if (!data.pretrain_val.empty())
      result.pretrain_accuracy = train::token_accuracy(m, data.pretrain_val);
    tc.gradual_unfreeze = true;  // fine-tune with top-down unfreezing
  }
  train::train(m, data.train, data.val, tc, train::ValMetric::kRougeF1);
  result.metrics = train::evaluate(m, data.test);
  return result;
}

std::vector<train::LabeledExample> subsample(const std::vector<train::LabeledExample>& all,
                                             double fraction, uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::runtime_error("subsample: fraction must be in (0, 1]");
  const size_t count = static_cast<size_t>(std::llround(fraction * all.size()));
  if (count < 1) throw std::runtime_error("subsample: fraction yields no examples");
  std::vector<size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<train::LabeledExample> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(all[order[i]]);
  return out;
}

std::vector<SweepPoint> low_resource_sweep(const std::vector<double>& fractions,
                                           const ExperimentData& data,
                                           const ModelConfig& base_model,
                                           const TrainingConfig& base_train) {
  // Pre-train once; every fraction fine-tunes from the same snapshot.
  model::Model pretrained = build_model(base_model, data);
  TrainingConfig ptc = base_train;
  ptc.seed = data.seed;
  ptc.weights = data.pretrain_weights;
  if (data.pretrain_train.empty())
    throw std::runtime_error("low_resource_sweep: missing pre-training corpus");
  train::train(pretrained, data.pretrain_train, data.pretrain_val, ptc,
               train::ValMetric::kTokenAccuracy);
  const auto pretrained_snapshot = pretrained.snapshot();

  std::vector<SweepPoint> points;
  for (double fraction : fractions) {
    auto subset = subsample(data.train, fraction, data.seed);

    pretrained.restore(pretrained_snapshot);
    TrainingConfig ftc = base_train;
    ftc.seed = data.seed;
    ftc.gradual_unfreeze = true;
    train::train(pretrained, subset, data.val, ftc, train::ValMetric::kRougeF1);
    auto rep_pt = train::evaluate(pretrained, data.test);
    points.push_back({fraction, "pretrained", rep_pt.rouge1_f1, rep_pt.em});

    model::Model scratch = build_model(base_model, data);
    TrainingConfig stc = base_train;
    stc.seed = data.seed;
    train::train(scratch, subset, data.val, stc, train::ValMetric::kRougeF1);
    auto rep_s = train::evaluate(scratch, data.test);
    points.push_back({fraction, "scratch", rep_s.rouge1_f1, rep_s.em});
  }
  return points;
}

namespace {
void write_sweep_svg(const std::vector<SweepPoint>& sweep, const std::string& path) {
  const int width = 640, height = 420, margin = 60;
  std::vector<std::string> variants;
  for (const auto& p : sweep)
    if (std::find(variants.begin(), variants.end(), p.variant) == variants.end())
      variants.push_back(p.variant);
  double fmax = 0.0;
  for (const auto& p : sweep) fmax = std::max(fmax, p.fraction);
  if (fmax <= 0) fmax = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
      << height << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  auto xpix = [&](double f) {
    return margin + f / fmax * (width - 2 * margin);
  };
  auto ypix = [&](double f1) { return height - margin - f1 * (height - 2 * margin); };
  svg << "<line x1='" << margin << "' y1='" << height - margin << "' x2='"
      << width - margin << "' y2='" << height - margin << "' stroke='black'/>\n";
  svg << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
      << height - margin << "' stroke='black'/>\n";
  svg << "<text x='" << width / 2 << "' y='" << height - 15
      << "' text-anchor='middle'>fraction of training data</text>\n";
  svg << "<text x='18' y='" << height / 2 << "' transform='rotate(-90 18 " << height / 2
      << ")' text-anchor='middle'>test ROUGE-1 F1</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  int ci = 0;
  for (const auto& variant : variants) {
    std::vector<const SweepPoint*> pts;
    for (const auto& p : sweep)
      if (p.variant == variant) pts.push_back(&p);
    std::sort(pts.begin(), pts.end(),
              [](const auto* a, const auto* b) { return a->fraction < b->fraction; });
    const char* color = colors[ci % 4];
    std::ostringstream poly;
    for (const auto* p : pts) poly << xpix(p->fraction) << "," << ypix(p->f1) << " ";
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='"
        << poly.str() << "'/>\n";
    for (const auto* p : pts)
      svg << "<circle cx='" << xpix(p->fraction) << "' cy='" << ypix(p->f1)
          << "' r='3' fill='" << color << "'/>\n";
    svg << "<text x='" << width - margin + 5 << "' y='" << margin + 20 * ci << "' fill='"
        << color << "' font-size='12' text-anchor='end'>" << variant << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
}
}  // namespace

void emit_report(const std::vector<AblationResult>& ablations,
                 const std::vector<SweepPoint>& sweep, const std::string& outdir) {
  if (ablations.empty() && sweep.empty())
    throw std::runtime_error("emit_report: no results to report");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (!std::filesystem::is_directory(outdir))
    throw std::runtime_error("emit_report: cannot create output directory " + outdir);

  nlohmann::json j;
  for (const auto& a : ablations) {
    nlohmann::json e;
    e["name"] = a.name;
    e["rouge1_f1"] = a.metrics.rouge1_f1;
    e["em"] = a.metrics.em;
    e["n"] = a.metrics.n;
    if (a.pretrain_accuracy >= 0) e["pretrain_accuracy"] = a.pretrain_accuracy;
    j["ablations"].push_back(e);
  }
  for (const auto& p : sweep)
    j["sweep"].push_back({{"fraction", p.fraction},
                          {"variant", p.variant},
                          {"f1", p.f1},
                          {"em", p.em}});
  {
    std::ofstream out(outdir + "/metrics.json");
    if (!out) throw std::runtime_error("cannot write metrics.json in " + outdir);
    out << j.dump(2) << "\n";
  }
  if (!ablations.empty()) {
    std::ofstream out(outdir + "/ablations.csv");
    out << "Model,F1,EM\n";
    for (const auto& a : ablations)
      out << a.name << ',' << a.metrics.rouge1_f1 << ',' << a.metrics.em << "\n";
  }
  if (!sweep.empty()) {
    std::ofstream out(outdir + "/sweep.csv");
    out << "fraction,variant,F1,EM\n";
    for (const auto& p : sweep)
      out << p.fraction << ',' << p.variant << ',' << p.f1 << ',' << p.em << "\n";
    write_sweep_svg(sweep, outdir + "/sweep.svg");
  }
}

}  // namespace titlepress::exp
