#include "chemception/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "chemception/checkpoint.hpp"
#include "chemception/csv.hpp"
#include "chemception/errors.hpp"
#include "chemception/layout.hpp"
#include "chemception/metrics.hpp"
#include "chemception/optim.hpp"
#include "chemception/raster.hpp"
#include "chemception/rng.hpp"
#include "chemception/smiles.hpp"

namespace chemception {

std::int64_t planned_batch_updates(std::int64_t n_samples, int batch_size,
                                   int epochs) {
  if (n_samples <= 0 || batch_size <= 0 || epochs < 0)
    throw SpecInvalid("bad batch-update accounting inputs");
  return static_cast<std::int64_t>(epochs) *
         ((n_samples + batch_size - 1) / batch_size);
}

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Prepared {
  Dataset data;  // only depictable records survive
  std::vector<DepictedMol> mols;
  std::vector<MolImage> canonical;
  std::vector<double> labels;
  std::size_t dropped = 0;
};

Prepared prepare(const Dataset& d) {
  Prepared p;
  p.data.kind = d.kind;
  p.data.name = d.name;
  p.data.task = d.task;
  for (const Record& r : d.records) {
    try {
      DepictedMol m = layout(parse_smiles(r.smiles));
      MolImage img = rasterize(m, r.id);
      p.mols.push_back(std::move(m));
      p.canonical.push_back(std::move(img));
      p.labels.push_back(r.label);
      p.data.records.push_back(r);
    } catch (const Error&) {
      ++p.dropped;
    }
  }
  return p;
}

struct Eval {
  double loss = 0.0;
  double metric = 0.0;
};

class FoldRunner {
 public:
  FoldRunner(int fold, const NetSpec& spec, const Prepared& prep,
             const TrainConfig& cfg, RunReport& report)
      : fold_(fold), prep_(prep), cfg_(cfg), report_(report),
        net_(build<float>(spec)) {}

  FoldResult run(const std::vector<int>& train_idx,
                 const std::vector<int>& val_idx,
                 const std::vector<int>& test_idx) {
    auto t0 = Clock::now();
    FoldResult res;
    res.fold = fold_;
    const bool classify = prep_.data.kind == TaskKind::BinaryClassification;

    std::string fold_dir;
    if (!cfg_.out_dir.empty()) {
      fold_dir = cfg_.out_dir + "/fold" + std::to_string(fold_);
      fs::create_directories(fold_dir);
    }
    const std::string stage1_path = fold_dir + "/stage1_best.ckpt";
    const std::string final_path = fold_dir + "/final.ckpt";

    base_train_ = classify && cfg_.oversample
                      ? oversample(train_idx, prep_.labels)
                      : train_idx;

    if (cfg_.resume && !fold_dir.empty() && fs::exists(final_path)) {
      load_checkpoint(net_, final_path);
      best_.val_loss = net_.meta.best_val_loss;
      best_.stage = static_cast<int>(net_.meta.stage);
      best_.epoch = static_cast<int>(net_.meta.epoch);
      best_.params = net_.flatten_params();
    } else {
      init_params(net_, derive_seed(cfg_.seed, 100 + fold_));

      bool have_stage1 = cfg_.resume && !fold_dir.empty() && fs::exists(stage1_path);
      if (have_stage1) {
        load_checkpoint(net_, stage1_path);
        best_ = {net_.meta.best_val_loss, net_.flatten_params(), 1,
                 static_cast<int>(net_.meta.epoch)};
      } else if (cfg_.stage1_epochs > 0) {
        RmsProp<float> opt(net_.params);
        res.stage1_epochs_run = run_stage(
            1, cfg_.stage1_epochs, val_idx,
            [&](int) { opt.step(net_.params); });
        net_.load_flat_params(best_.params);
        net_.meta = {1, static_cast<std::uint32_t>(best_.epoch), best_.val_loss};
        if (!fold_dir.empty()) save_checkpoint(net_, stage1_path);
      } else {
        best_ = {std::numeric_limits<double>::infinity(), net_.flatten_params(),
                 0, 0};
      }

      if (cfg_.stage2_epochs > 0) {
        net_.load_flat_params(best_.params);
        SgdMomentum<float> opt(net_.params, 1e-3, 0.92, cfg_.momentum);
        res.stage2_epochs_run = run_stage(
            2, cfg_.stage2_epochs, val_idx,
            [&](int epoch) { opt.step(net_.params, epoch); });
      }

      net_.load_flat_params(best_.params);
      net_.meta = {static_cast<std::uint32_t>(best_.stage),
                   static_cast<std::uint32_t>(best_.epoch), best_.val_loss};
      if (!fold_dir.empty()) save_checkpoint(net_, final_path);
    }

    res.best_val_loss = best_.val_loss;
    res.best_stage = best_.stage;
    res.best_epoch = best_.epoch;
    res.train_metric = evaluate(train_idx).metric;
    res.val_metric = evaluate(val_idx).metric;
    res.test_metric = evaluate(test_idx).metric;
    res.wall_seconds = seconds_since(t0);
    return res;
  }

 private:
  struct Best {
    double val_loss = std::numeric_limits<double>::infinity();
    std::vector<float> params;
    int stage = 0;
    int epoch = 0;
  };

  // One optimization stage with per-epoch reshuffling, augmentation, and
  // patience-based early stopping on the validation loss. Returns epochs run.
  template <typename Step>
  int run_stage(int stage, int max_epochs, const std::vector<int>& val_idx,
                Step&& apply_update) {
    int since_best = 0;
    int epochs_run = 0;
    for (int e = 0; e < max_epochs; ++e) {
      std::vector<int> order;
      order.reserve(base_train_.size() * static_cast<std::size_t>(cfg_.replicate));
      for (int r = 0; r < cfg_.replicate; ++r)
        order.insert(order.end(), base_train_.begin(), base_train_.end());
      Rng shuffle_rng(derive_seed(cfg_.seed, stream_tag(stage), e, 0x0DDB));
      shuffle_rng.shuffle(order);

      double loss_sum = 0.0;
      std::int64_t seen = 0;
      std::uint64_t counter = 0;
      for (std::size_t at = 0; at < order.size(); at += cfg_.batch_size) {
        std::size_t hi = std::min(order.size(),
                                  at + static_cast<std::size_t>(cfg_.batch_size));
        std::vector<int> batch(order.begin() + at, order.begin() + hi);
        double loss = train_batch(batch, stage, e, counter);
        loss_sum += loss * static_cast<double>(batch.size());
        seen += static_cast<std::int64_t>(batch.size());
        apply_update(e);
      }

      Eval val = evaluate(val_idx);
      report_.curves.push_back({fold_, stage, e, loss_sum / static_cast<double>(seen),
                                val.loss, val.metric});
      ++epochs_run;
      if (val.loss < best_.val_loss) {
        best_ = {val.loss, net_.flatten_params(), stage, e};
        since_best = 0;
      } else {
        ++since_best;
      }
      if (cfg_.patience > 0 && since_best >= cfg_.patience) break;
    }
    return epochs_run;
  }

  double train_batch(const std::vector<int>& batch, int stage, int epoch,
                     std::uint64_t& counter) {
    std::vector<MolImage> images;
    images.reserve(batch.size());
    for (int i : batch) {
      std::uint64_t s = derive_seed(cfg_.seed, stream_tag(stage),
                                    static_cast<std::uint64_t>(epoch),
                                    0x40000000ULL + counter++);
      if (cfg_.augment) {
        try {
          images.push_back(augment(prep_.mols[i], s));
        } catch (const PixelCollision&) {
          images.push_back(prep_.canonical[i]);  // unrotated fallback
        }
      } else {
        images.push_back(prep_.canonical[i]);
      }
    }
    set_targets(batch);
    forward(net_, images);
    net_.graph.backward(net_.loss);
    return static_cast<double>(net_.loss->value[0]);
  }

  void set_targets(const std::vector<int>& batch) {
    if (prep_.data.kind == TaskKind::BinaryClassification) {
      net_.labels->resize(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k)
        (*net_.labels)[k] = prep_.labels[batch[k]] != 0.0 ? 1 : 0;
    } else {
      net_.target->value = Tensor<float>({static_cast<int>(batch.size()), 1});
      for (std::size_t k = 0; k < batch.size(); ++k)
        net_.target->value[static_cast<std::int64_t>(k)] =
            static_cast<float>(prep_.labels[batch[k]]);
    }
  }

  Eval evaluate(const std::vector<int>& idx) {
    const bool classify = prep_.data.kind == TaskKind::BinaryClassification;
    double loss_sum = 0.0;
    std::vector<double> scores, targets;
    std::vector<int> labels01;
    for (std::size_t at = 0; at < idx.size(); at += cfg_.batch_size) {
      std::size_t hi =
          std::min(idx.size(), at + static_cast<std::size_t>(cfg_.batch_size));
      std::vector<int> batch(idx.begin() + at, idx.begin() + hi);
      std::vector<MolImage> images;
      images.reserve(batch.size());
      for (int i : batch) images.push_back(prep_.canonical[i]);
      set_targets(batch);
      Tensor<float> out = forward(net_, images);
      loss_sum += static_cast<double>(net_.loss->value[0]) *
                  static_cast<double>(batch.size());
      if (classify) {
        Tensor<float> p = Graph<float>::softmax_rows(out);
        for (std::size_t k = 0; k < batch.size(); ++k) {
          scores.push_back(static_cast<double>(p[k * 2 + 1]));
          labels01.push_back(prep_.labels[batch[k]] != 0.0 ? 1 : 0);
        }
      } else {
        for (std::size_t k = 0; k < batch.size(); ++k) {
          scores.push_back(static_cast<double>(out[static_cast<std::int64_t>(k)]));
          targets.push_back(prep_.labels[batch[k]]);
        }
      }
    }
    Eval ev;
    ev.loss = loss_sum / static_cast<double>(idx.size());
    ev.metric = classify ? auc(scores, labels01) : rmse(scores, targets);
    return ev;
  }

  std::uint64_t stream_tag(int stage) const {
    return static_cast<std::uint64_t>(fold_) * 16 + static_cast<std::uint64_t>(stage);
  }

  int fold_;
  const Prepared& prep_;
  const TrainConfig& cfg_;
  RunReport& report_;
  Network<float> net_;
  std::vector<int> base_train_;
  Best best_;
};

void summarize(RunReport& rep) {
  auto stats = [&](auto pick) {
    double mean = 0.0;
    int n = 0;
    for (const auto& f : rep.folds)
      if (!f.failed) {
        mean += pick(f);
        ++n;
      }
    if (n == 0) return std::pair{0.0, 0.0};
    mean /= n;
    double var = 0.0;
    for (const auto& f : rep.folds)
      if (!f.failed) var += (pick(f) - mean) * (pick(f) - mean);
    return std::pair{mean, std::sqrt(var / n)};
  };
  std::tie(rep.mean_train, rep.std_train) =
      stats([](const FoldResult& f) { return f.train_metric; });
  std::tie(rep.mean_val, rep.std_val) =
      stats([](const FoldResult& f) { return f.val_metric; });
  std::tie(rep.mean_test, rep.std_test) =
      stats([](const FoldResult& f) { return f.test_metric; });
}

}  // namespace

RunReport train(const NetSpec& spec, const Dataset& data, const TrainConfig& cfg) {
  auto t0 = Clock::now();
  validate(spec);
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.replicate < 1) throw ConfigError("replicate must be >= 1");

  Prepared prep = prepare(data);
  if (prep.data.records.empty())
    throw TooFewRecords("no depictable records in the dataset");

  RunReport rep;
  rep.metric_name =
      data.kind == TaskKind::BinaryClassification ? "auc" : "rmse";
  rep.param_count = analytic_param_count(spec);
  rep.records_used = prep.data.records.size();
  rep.records_dropped_depiction = prep.dropped;

  std::vector<std::vector<int>> train_sets, val_sets, test_sets;
  if (cfg.cv5) {
    SplitPlan plan = make_splits(prep.data, cfg.seed);
    for (int f = 0; f < kFolds; ++f) {
      train_sets.push_back(plan.fold_train[f]);
      val_sets.push_back(plan.fold_val[f]);
      test_sets.push_back(plan.test);
    }
  } else {
    std::vector<int> all(prep.data.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    train_sets.push_back(all);
    val_sets.push_back(all);
    test_sets.push_back(all);
  }

  for (std::size_t f = 0; f < train_sets.size(); ++f) {
    FoldRunner runner(static_cast<int>(f), spec, prep, cfg, rep);
    try {
      rep.folds.push_back(
          runner.run(train_sets[f], val_sets[f], test_sets[f]));
    } catch (const NumericalFault& e) {
      FoldResult bad;
      bad.fold = static_cast<int>(f);
      bad.failed = true;
      bad.fail_reason = e.what();
      rep.folds.push_back(bad);
    }
  }

  summarize(rep);
  rep.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_report_csv(rep, cfg.out_dir + "/report.csv");
    write_curves_csv(rep, cfg.out_dir + "/curves.csv");
    write_timing_csv(rep, cfg.out_dir + "/timing.csv");
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_report_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  const std::string& m = report.metric_name;
  out << "fold,train_" << m << ",val_" << m << ",test_" << m
      << ",best_val_loss,stage1_epochs,stage2_epochs,best_stage,best_epoch,"
         "status\n";
  for (const auto& f : report.folds) {
    if (f.failed) {
      out << f.fold << ",,,,,,,,," << csv_escape("failed: " + f.fail_reason)
          << "\n";
      continue;
    }
    out << f.fold << "," << fmt(f.train_metric) << "," << fmt(f.val_metric)
        << "," << fmt(f.test_metric) << "," << fmt(f.best_val_loss) << ","
        << f.stage1_epochs_run << "," << f.stage2_epochs_run << ","
        << f.best_stage << "," << f.best_epoch << ",ok\n";
  }
  out << "mean," << fmt(report.mean_train) << "," << fmt(report.mean_val) << ","
      << fmt(report.mean_test) << ",,,,,,\n";
  out << "std," << fmt(report.std_train) << "," << fmt(report.std_val) << ","
      << fmt(report.std_test) << ",,,,,,\n";
  out << "param_count," << report.param_count << ",,,,,,,,\n";
}

void write_curves_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "fold,stage,epoch,train_loss,val_loss,val_metric\n";
  for (const auto& c : report.curves)
    out << c.fold << "," << c.stage << "," << c.epoch << ","
        << fmt(c.train_loss) << "," << fmt(c.val_loss) << ","
        << fmt(c.val_metric) << "\n";
}

void write_timing_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "fold,wall_seconds\n";
  for (const auto& f : report.folds)
    out << f.fold << "," << fmt(f.wall_seconds) << "\n";
  out << "total," << fmt(report.wall_seconds) << "\n";
}

}  // namespace chemception
