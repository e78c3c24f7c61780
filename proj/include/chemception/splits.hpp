#pragma once

#include <cstdint>
#include <vector>

#include "chemception/dataset.hpp"

namespace chemception {

inline constexpr int kFolds = 5;

struct SplitPlan {
  std::vector<int> test;
  std::vector<std::vector<int>> fold_train;  // kFolds entries
  std::vector<std::vector<int>> fold_val;    // kFolds entries
  std::uint64_t seed = 0;
};

// Carve the test set first (1/6 or 1/10 by dataset), then partition the
// remainder into 5 folds. Classification splits are stratified per class by
// round-robin dealing, which keeps every fold's positive count within one
// sample of the proportional share. Deterministic per (dataset, seed).
SplitPlan make_splits(const Dataset& d, std::uint64_t seed);

// Floor-ratio minority oversampling: every minority index ends up
// floor(majority/minority) times in the result. Balanced input comes back
// unchanged. Replication never leaves the given index set.
std::vector<int> oversample(const std::vector<int>& train_indices,
                            const std::vector<double>& labels);

}  // namespace chemception
