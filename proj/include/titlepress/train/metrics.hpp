#pragma once

#include <string>
#include <vector>

#include "titlepress/dataset.hpp"

namespace titlepress::train {

/// ROUGE-1 F1 with clipped unigram counts (multiplicity-aware).
/// Both empty -> 1, exactly one empty -> 0.
double rouge1_f1(const std::string& predicted, const std::string& reference);

/// String equality after whitespace squeeze (normalize_text).
bool exact_match(const std::string& predicted, const std::string& reference);

struct ExampleResult {
  std::string predicted;
  std::string reference;
  double f1 = 0.0;
  bool em = false;
};

struct MetricsReport {
  double rouge1_f1 = 0.0;  // mean over examples
  double em = 0.0;         // percentage
  int n = 0;
  std::vector<ExampleResult> per_example;

  std::string to_json() const;
  void save_json(const std::string& path) const;
};

}  // namespace titlepress::train
