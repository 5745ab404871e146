#include "titlepress/train/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "titlepress/text.hpp"

namespace titlepress::train {

double rouge1_f1(const std::string& predicted, const std::string& reference) {
  auto pred = tokenize(predicted);
  auto ref = tokenize(reference);
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;
  std::unordered_map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::unordered_map<std::string, int> pred_counts;
  for (const auto& t : pred) ++pred_counts[t];
  int overlap = 0;
  for (const auto& [tok, c] : pred_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / pred.size();
  const double r = static_cast<double>(overlap) / ref.size();
  return 2.0 * p * r / (p + r);
}

bool exact_match(const std::string& predicted, const std::string& reference) {
  return normalize_text(predicted) == normalize_text(reference);
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["rouge1_f1"] = rouge1_f1;
  j["em"] = em;
  j["n"] = n;
  auto& per = j["examples"] = nlohmann::json::array();
  for (const auto& ex : per_example)
    per.push_back({{"predicted", ex.predicted},
                   {"reference", ex.reference},
                   {"f1", ex.f1},
                   {"em", ex.em}});
  return j.dump(2);
}

void MetricsReport::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
}

}  // namespace titlepress::train
