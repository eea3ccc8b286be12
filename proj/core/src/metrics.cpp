#include "saug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace saug {

F1Result f1_scores(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes) {
  if (pred.empty()) throw std::invalid_argument("f1_scores: empty input");
  if (pred.size() != truth.size()) throw std::invalid_argument("f1_scores: length mismatch");
  std::vector<std::int64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes)
      throw std::invalid_argument("f1_scores: label outside class range");
    if (p == t) {
      tp[p]++;
    } else {
      fp[p]++;
      fn[t]++;
    }
  }
  F1Result res;
  std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < num_classes; ++c) {
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    res.per_class.push_back(denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / denom);
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
  }
  res.macro = std::accumulate(res.per_class.begin(), res.per_class.end(), 0.0) /
              static_cast<double>(num_classes);
  const double denom = static_cast<double>(2 * tp_all + fp_all + fn_all);
  res.micro = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp_all) / denom;
  return res;
}

double auc_score(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc_score: length mismatch");
  std::int64_t npos = 0, nneg = 0;
  for (int y : labels) (y ? npos : nneg)++;
  if (npos == 0 || nneg == 0) throw std::invalid_argument("auc_score: single-class input");

  // average ranks over score ties, then the Mann-Whitney identity
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double rank_sum_pos = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k)
    if (labels[k]) rank_sum_pos += rank[k];
  const double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace saug
