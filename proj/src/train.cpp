#include "temg/train.hpp"

#include <cmath>
#include <fstream>

#include "temg/common.hpp"
#include "temg/metrics.hpp"

namespace temg {

TrainResult train_model(const TemporalGraph& g, const MessageGraph& mg,
                        const CountMatrix& counts, const MotifTaxonomy& tax,
                        const DataSplit& split, const TrainConfig& cfg) {
  validate(cfg.model);
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (cfg.patience < 0) throw ConfigError("patience must be >= 0");
  if (split.train.empty() || split.val.empty())
    throw ConfigError("training needs non-empty train and val splits");

  ModelParams params = ModelParams::init(cfg.model);
  Adam opt(params, cfg.lr);

  auto val_scores = [&](const ModelParams& p) {
    ForwardResult r = forward(p, mg, g.features, counts, tax, Mode::eval, 0);
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(split.val.size());
    for (uint32_t v : split.val) {
      scores.push_back(sigmoid(r.logits[v]));
      labels.push_back(g.labels[v]);
    }
    return auc_prc(scores, labels);
  };

  TrainResult out;
  out.params = params;
  out.best_val_auc_prc = -1.0;
  int bad = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    ForwardCache cache;
    ForwardResult r =
        forward(params, mg, g.features, counts, tax, Mode::train,
                mix64(cfg.model.seed, 0xE90CULL, static_cast<uint64_t>(epoch)),
                &cache);
    double loss = bce_loss(r.logits, g.labels, split.train);
    if (!std::isfinite(loss))
      throw std::runtime_error("non-finite training loss at epoch " +
                               std::to_string(epoch));
    ModelParams grads = backward(params, mg, g.features, tax, cache,
                                 bce_grad(r.logits, g.labels, split.train));
    opt.step(params, grads);

    double val = val_scores(params);
    out.history.push_back({epoch, loss, val});
    if (val > out.best_val_auc_prc) {
      out.best_val_auc_prc = val;
      out.best_epoch = epoch;
      out.params = params;
      bad = 0;
    } else {
      ++bad;
      if (bad > cfg.patience) break;
    }
  }
  return out;
}

void write_train_log(const std::vector<EpochRecord>& history,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write train log: " + path);
  os.precision(17);
  for (const auto& r : history)
    os << "{\"epoch\":" << r.epoch << ",\"train_loss\":" << r.train_loss
       << ",\"val_auc_prc\":" << r.val_auc_prc << "}\n";
  if (!os) throw IoError("write failure on train log: " + path);
}

}  // namespace temg
