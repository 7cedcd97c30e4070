#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temg/model.hpp"

namespace temg {

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  int max_epochs = 200;
  int patience = 20;  // consecutive non-improving epochs tolerated; 0 stops at the first
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc_prc = 0.0;
};

struct TrainResult {
  ModelParams params;  // best validation epoch, never the last by default
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_auc_prc = 0.0;
};

// Full-batch training with early stopping on validation area under the
// precision-recall curve. Deterministic given the config seed.
TrainResult train_model(const TemporalGraph& g, const MessageGraph& mg,
                        const CountMatrix& counts, const MotifTaxonomy& tax,
                        const DataSplit& split, const TrainConfig& cfg);

// JSON-lines log: one {"epoch":..,"train_loss":..,"val_auc_prc":..} per line.
void write_train_log(const std::vector<EpochRecord>& history,
                     const std::string& path);

}  // namespace temg
