#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace temg {

// Average precision without interpolation: positives are visited in
// descending score order and contribute the precision measured after their
// whole tie group. Requires at least one positive and one negative.
double auc_prc(const std::vector<double>& scores, const std::vector<int>& labels);

// Fraction of positives inside the k highest-scoring entries; ties broken by
// ascending index so results are deterministic.
double recall_at_k(const std::vector<double>& scores, const std::vector<int>& labels,
                   size_t k);

// F1 of the decision score >= threshold; empty intersections give 0 (0/0 -> 0).
double f1_at_threshold(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold = 0.5);

struct EvalResult {
  double auc_prc = 0.0;
  double rec_at_k = 0.0;
  double f1 = 0.0;
  size_t k_used = 0;
  size_t n_pos = 0;
  size_t n_neg = 0;
};

// Standard bundle; k defaults to the number of positives when k == 0.
EvalResult evaluate(const std::vector<double>& scores,
                    const std::vector<int>& labels, size_t k = 0);

std::string to_json(const EvalResult& r);

}  // namespace temg
