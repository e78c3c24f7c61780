#pragma once

#include <string>
#include <vector>

namespace chemception {

enum class TaskKind { BinaryClassification, Regression };

// Dataset families; the name fixes the held-out test fraction
// (1/6 for tox21 and hiv, 1/10 for freesolv and custom-regression).
enum class DatasetName { Tox21, Hiv, FreeSolv, Custom };

DatasetName dataset_name_from(const std::string& s);
TaskKind default_task_kind(DatasetName name);

struct Record {
  std::string id;
  std::string smiles;
  double label = 0.0;  // 0/1 for classification
};

struct Dataset {
  std::vector<Record> records;
  TaskKind kind = TaskKind::BinaryClassification;
  DatasetName name = DatasetName::Custom;
  std::string task;  // label column
  std::size_t skipped_missing_label = 0;
  std::size_t skipped_bad_label = 0;
  std::size_t skipped_bad_smiles = 0;
};

// CSV with header; columns: id, smiles, one column per task; empty cell =
// missing label. Missing-label rows are dropped and counted, as are rows
// whose SMILES fail to parse; one bad molecule never aborts a load.
Dataset load_csv(const std::string& path, const std::string& task,
                 TaskKind kind, DatasetName name = DatasetName::Custom);

double test_fraction(DatasetName name);

}  // namespace chemception
