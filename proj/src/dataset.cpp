#include "chemception/dataset.hpp"

#include <cmath>
#include <stdexcept>

#include "chemception/csv.hpp"
#include "chemception/errors.hpp"
#include "chemception/smiles.hpp"

namespace chemception {

DatasetName dataset_name_from(const std::string& s) {
  if (s == "tox21") return DatasetName::Tox21;
  if (s == "hiv") return DatasetName::Hiv;
  if (s == "freesolv") return DatasetName::FreeSolv;
  if (s == "custom") return DatasetName::Custom;
  throw ConfigError("unknown dataset name '" + s + "'");
}

TaskKind default_task_kind(DatasetName name) {
  return name == DatasetName::FreeSolv ? TaskKind::Regression
                                       : TaskKind::BinaryClassification;
}

double test_fraction(DatasetName name) {
  switch (name) {
    case DatasetName::Tox21:
    case DatasetName::Hiv:
      return 1.0 / 6.0;
    case DatasetName::FreeSolv:
    case DatasetName::Custom:
      return 1.0 / 10.0;
  }
  return 1.0 / 10.0;
}

Dataset load_csv(const std::string& path, const std::string& task,
                 TaskKind kind, DatasetName name) {
  CsvTable t = read_csv(path);
  int id_col = t.column("id");
  int smiles_col = t.column("smiles");
  if (smiles_col < 0) throw MalformedCSV("'" + path + "': no 'smiles' column");
  int label_col = t.column(task);
  if (label_col < 0)
    throw UnknownTask("task '" + task + "' not found in '" + path + "'");

  Dataset d;
  d.kind = kind;
  d.name = name;
  d.task = task;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string& cell = row[label_col];
    if (cell.empty()) {
      ++d.skipped_missing_label;
      continue;
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      ++d.skipped_bad_label;
      continue;
    }
    if (!std::isfinite(v)) {
      ++d.skipped_bad_label;
      continue;
    }
    if (kind == TaskKind::BinaryClassification && v != 0.0 && v != 1.0) {
      ++d.skipped_bad_label;
      continue;
    }
    Record rec;
    rec.id = id_col >= 0 ? row[id_col] : std::to_string(r);
    rec.smiles = row[smiles_col];
    rec.label = v;
    d.records.push_back(std::move(rec));
  }
  return d;
}

}  // namespace chemception
