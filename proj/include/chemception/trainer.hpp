#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemception/dataset.hpp"
#include "chemception/net.hpp"
#include "chemception/splits.hpp"

namespace chemception {

struct TrainConfig {
  std::uint64_t seed = 0;
  int batch_size = 32;
  int stage1_epochs = 50;
  int stage2_epochs = 50;
  int patience = 25;      // epochs without validation improvement; <=0 disables
  bool augment = true;    // per-epoch rotation of training images
  bool oversample = true; // minority replication (classification only)
  int replicate = 1;      // training-list copies per epoch (10 for freesolv)
  double momentum = 0.9;
  bool cv5 = true;        // false: single run with train = val = test = all
  std::string out_dir;    // artifacts land here when non-empty
  bool resume = false;    // reuse existing per-fold checkpoints
};

struct FoldResult {
  int fold = 0;
  double train_metric = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  double best_val_loss = 0.0;
  int stage1_epochs_run = 0;
  int stage2_epochs_run = 0;
  int best_stage = 0;
  int best_epoch = 0;
  bool failed = false;
  std::string fail_reason;
  double wall_seconds = 0.0;
};

struct CurvePoint {
  int fold = 0;
  int stage = 0;
  int epoch = 0;  // within stage, 0-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
};

struct RunReport {
  std::string metric_name;  // "auc" or "rmse"
  std::vector<FoldResult> folds;
  double mean_train = 0.0, std_train = 0.0;
  double mean_val = 0.0, std_val = 0.0;
  double mean_test = 0.0, std_test = 0.0;
  std::int64_t param_count = 0;
  std::size_t records_used = 0;
  std::size_t records_dropped_depiction = 0;
  double wall_seconds = 0.0;
  std::vector<CurvePoint> curves;
};

// Scheduler arithmetic used for the batch-update accounting check.
std::int64_t planned_batch_updates(std::int64_t n_samples, int batch_size,
                                   int epochs);

// The full two-stage protocol over 5-fold cross validation (or the
// single-fold overfit variant when cfg.cv5 is false). Deterministic given
// (dataset, spec, cfg.seed) and a fixed thread count.
RunReport train(const NetSpec& spec, const Dataset& data,
                const TrainConfig& cfg);

// Report serialization: deterministic columns only; wall time goes to a
// separate sidecar so reruns stay byte-identical.
void write_report_csv(const RunReport& report, const std::string& path);
void write_curves_csv(const RunReport& report, const std::string& path);
void write_timing_csv(const RunReport& report, const std::string& path);

}  // namespace chemception
