#pragma once

#include <cstdint>
#include <vector>

namespace saug {

struct F1Result {
  double macro = 0.0;
  double micro = 0.0;
  std::vector<double> per_class;
};

/// Per-class F1 = 2PR/(P+R) with 0 when P+R = 0; macro = unweighted mean over
/// classes; micro = F1 over pooled counts, which equals accuracy for
/// single-label multiclass. Throws on empty or mismatched inputs.
F1Result f1_scores(const std::vector<int>& pred, const std::vector<int>& truth, int num_classes);

/// Probability that a random positive outranks a random negative, ties
/// counting one half; exact rank-statistic computation. Throws unless both
/// classes are present.
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) standard deviation, 0 for a single value
};

MeanStd mean_std(const std::vector<double>& xs);

}  // namespace saug
