#pragma once

#include <vector>

namespace chemception {

// Area under the ROC curve as the Mann-Whitney statistic: the probability a
// random positive outscores a random negative, ties counted half. Throws
// DegenerateClass unless both classes are present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Root-mean-square error. Throws EmptyInput on empty vectors.
double rmse(const std::vector<double>& pred, const std::vector<double>& measured);

}  // namespace chemception
