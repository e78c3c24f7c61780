#include "chemception/splits.hpp"

#include <algorithm>
#include <cmath>

#include "chemception/errors.hpp"
#include "chemception/rng.hpp"

namespace chemception {

namespace {

// test-set sizes per class by largest remainder, so the total is exact and
// every class is represented proportionally
std::vector<std::size_t> apportion(const std::vector<std::size_t>& class_sizes,
                                   std::size_t total_take) {
  double n = 0;
  for (auto s : class_sizes) n += static_cast<double>(s);
  std::vector<std::size_t> take(class_sizes.size(), 0);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    double exact = static_cast<double>(total_take) * class_sizes[c] / n;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    take[c] = std::min(take[c], class_sizes[c]);
    assigned += take[c];
    rema.push_back({exact - std::floor(exact), c});
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [r, c] : rema) {
    if (assigned >= total_take) break;
    if (take[c] < class_sizes[c]) {
      ++take[c];
      ++assigned;
    }
  }
  return take;
}

}  // namespace

SplitPlan make_splits(const Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.records.size();
  if (n < 50)
    throw TooFewRecords("need at least 50 records, got " + std::to_string(n));

  SplitPlan plan;
  plan.seed = seed;
  plan.fold_train.resize(kFolds);
  plan.fold_val.resize(kFolds);
  const std::size_t test_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction(d.name)));

  // group indices by class (one group for regression)
  std::vector<std::vector<int>> groups;
  if (d.kind == TaskKind::BinaryClassification) {
    groups.resize(2);
    for (std::size_t i = 0; i < n; ++i)
      groups[d.records[i].label != 0.0].push_back(static_cast<int>(i));
    if (groups[0].empty() || groups[1].empty())
      throw DegenerateClass("dataset has a single class");
  } else {
    groups.resize(1);
    for (std::size_t i = 0; i < n; ++i) groups[0].push_back(static_cast<int>(i));
  }

  Rng rng(derive_seed(seed, 0x5EED));
  for (auto& g : groups) rng.shuffle(g);

  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.size());
  auto test_take = apportion(sizes, test_count);

  std::vector<std::vector<int>> pool_by_class(groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    for (std::size_t i = 0; i < groups[c].size(); ++i) {
      if (i < test_take[c])
        plan.test.push_back(groups[c][i]);
      else
        pool_by_class[c].push_back(groups[c][i]);
    }
  }

  // round-robin dealing keeps each fold's class counts within +-1 of the
  // proportional share
  for (std::size_t c = 0; c < pool_by_class.size(); ++c) {
    for (std::size_t i = 0; i < pool_by_class[c].size(); ++i)
      plan.fold_val[i % kFolds].push_back(pool_by_class[c][i]);
  }
  for (int f = 0; f < kFolds; ++f) {
    for (int g = 0; g < kFolds; ++g) {
      if (g == f) continue;
      plan.fold_train[f].insert(plan.fold_train[f].end(),
                                plan.fold_val[g].begin(), plan.fold_val[g].end());
    }
    std::sort(plan.fold_train[f].begin(), plan.fold_train[f].end());
    std::sort(plan.fold_val[f].begin(), plan.fold_val[f].end());
  }
  std::sort(plan.test.begin(), plan.test.end());

  if (d.kind == TaskKind::BinaryClassification) {
    auto has_both = [&](const std::vector<int>& idx) {
      bool pos = false, neg = false;
      for (int i : idx) (d.records[i].label != 0.0 ? pos : neg) = true;
      return pos && neg;
    };
    if (!has_both(plan.test)) throw DegenerateClass("test split lacks a class");
    for (int f = 0; f < kFolds; ++f)
      if (!has_both(plan.fold_val[f]) || !has_both(plan.fold_train[f]))
        throw DegenerateClass("fold " + std::to_string(f) + " lacks a class");
  }
  return plan;
}

std::vector<int> oversample(const std::vector<int>& train_indices,
                            const std::vector<double>& labels) {
  std::vector<int> pos, neg;
  for (int i : train_indices)
    (labels.at(i) != 0.0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty() || pos.size() == neg.size())
    return train_indices;
  const auto& minority = pos.size() < neg.size() ? pos : neg;
  std::size_t ratio = std::max(pos.size(), neg.size()) / minority.size();
  std::vector<int> out = train_indices;
  for (std::size_t copy = 1; copy < ratio; ++copy)
    out.insert(out.end(), minority.begin(), minority.end());
  return out;
}

}  // namespace chemception
