#include "temg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "temg/common.hpp"

namespace temg {

namespace {

void check_inputs(const std::vector<double>& scores,
                  const std::vector<int>& labels, bool need_both_classes) {
  if (scores.size() != labels.size() || scores.empty())
    throw ConfigError("metric inputs must be non-empty and equally sized");
  for (double s : scores)
    if (!std::isfinite(s)) throw ConfigError("metric scores must be finite");
  if (need_both_classes) {
    size_t pos = 0;
    for (int y : labels) pos += static_cast<size_t>(y == 1);
    if (pos == 0 || pos == labels.size())
      throw ConfigError("metric needs at least one positive and one negative");
  }
}

}  // namespace

double auc_prc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_inputs(scores, labels, true);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<size_t>(y == 1);
  double ap = 0.0;
  size_t seen = 0, tp = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    size_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_pos += static_cast<size_t>(labels[order[j]] == 1);
      ++j;
    }
    seen += j - i;
    tp += group_pos;
    if (group_pos > 0)
      ap += static_cast<double>(group_pos) *
            (static_cast<double>(tp) / static_cast<double>(seen));
    i = j;
  }
  return ap / static_cast<double>(n_pos);
}

double recall_at_k(const std::vector<double>& scores, const std::vector<int>& labels,
                   size_t k) {
  check_inputs(scores, labels, false);
  size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<size_t>(y == 1);
  if (n_pos == 0) throw ConfigError("recall@k needs at least one positive");
  if (k == 0 || k > scores.size()) throw ConfigError("recall@k needs 1 <= k <= n");
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  size_t hit = 0;
  for (size_t i = 0; i < k; ++i) hit += static_cast<size_t>(labels[order[i]] == 1);
  return static_cast<double>(hit) / static_cast<double>(n_pos);
}

double f1_at_threshold(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold) {
  check_inputs(scores, labels, false);
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] >= threshold;
    bool pos = labels[i] == 1;
    tp += static_cast<size_t>(pred && pos);
    fp += static_cast<size_t>(pred && !pos);
    fn += static_cast<size_t>(!pred && pos);
  }
  size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

EvalResult evaluate(const std::vector<double>& scores,
                    const std::vector<int>& labels, size_t k) {
  EvalResult r;
  for (int y : labels) {
    r.n_pos += static_cast<size_t>(y == 1);
    r.n_neg += static_cast<size_t>(y == 0);
  }
  r.k_used = k == 0 ? r.n_pos : k;
  r.auc_prc = auc_prc(scores, labels);
  r.rec_at_k = recall_at_k(scores, labels, r.k_used);
  r.f1 = f1_at_threshold(scores, labels, 0.5);
  return r;
}

std::string to_json(const EvalResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"auc_prc\":" << r.auc_prc << ",\"rec_at_k\":" << r.rec_at_k
     << ",\"f1\":" << r.f1 << ",\"k\":" << r.k_used << ",\"n_pos\":" << r.n_pos
     << ",\"n_neg\":" << r.n_neg << "}";
  return os.str();
}

}  // namespace temg
