#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temg/model.hpp"

namespace temg {

struct TtaConfig {
  double tau_low = 0.5;    // confidence band, exclusive lower bound
  double tau_high = 0.9;   // inclusive upper bound
  double alpha = 0.9;      // teacher EMA retention
  double beta = 0.1;       // weight of the contrastive term
  double temperature = 0.5;
  double gamma = 0.9;      // motif-feature cosine bar for positives
  double edge_drop_p = 0.1;
  double lr = 1e-4;
  int steps = 10;
  int neg_samples = 16;
  uint64_t seed = 1;
  bool predict_with_student = false;  // final scores default to the teacher
};

void validate(const TtaConfig& cfg);

// Confidence of a binary logit: max(sigma(z), 1 - sigma(z)) in [0.5, 1].
double binary_confidence(double logit);

// Nodes whose confidence lies in (tau_low, tau_high].
std::vector<uint32_t> confidence_mask(const std::vector<double>& logits,
                                      double tau_low, double tau_high);

// Mean over the mask of 1 - cos(teacher_row, student_row); rows with zero
// norm contribute cosine 0. Range [0, 2]. When grad_out is non-null it
// receives d(loss)/d(student) rows (teacher side is constant).
double sim_loss(const Matrix& teacher_hidden, const Matrix& student_hidden,
                const std::vector<uint32_t>& mask, Matrix* grad_out = nullptr);

struct InfoNceStats {
  double loss = 0.0;
  size_t contributors = 0;
  size_t skipped = 0;  // mask nodes without any motif-similar candidate
};

// Contrastive loss over the mask: for each node a random candidate pool of
// neg_samples + 8 others is drawn; pool members with motif-feature cosine
// above gamma are positives (one picked uniformly), the rest are negatives
// (capped at neg_samples). Gradients accumulate into grad_out rows.
InfoNceStats info_nce_loss(const Matrix& hidden, const Matrix& x_motif,
                           const std::vector<uint32_t>& mask,
                           const TtaConfig& cfg, uint64_t step_seed,
                           Matrix* grad_out = nullptr);

struct TtaStepDiag {
  int step = 0;
  size_t mask_size = 0;
  double l_sim = 0.0;
  double l_info = 0.0;
  double l_total = 0.0;
  size_t info_skipped = 0;
};

struct TtaState {
  ModelParams teacher;
  ModelParams student;
  Adam opt;
  int step = 0;

  TtaState(const ModelParams& checkpoint, double lr)
      : teacher(checkpoint), student(checkpoint), opt(checkpoint, lr) {}
};

// teacher = alpha * teacher + (1 - alpha) * student, every tensor.
void ema_update(ModelParams& teacher, const ModelParams& student, double alpha);

// One adaptation step: teacher scores the clean graph, the confidence band
// selects nodes, the student learns embedding consistency under edge dropping
// plus the contrastive term, and the teacher follows by EMA. An empty band
// still applies the EMA update but skips the student step.
TtaStepDiag tta_step(TtaState& state, const MessageGraph& mg,
                     const Matrix& x_orig, const CountMatrix& counts,
                     const MotifTaxonomy& tax, const TtaConfig& cfg);

struct AdaptResult {
  ModelParams teacher;
  ModelParams student;
  std::vector<TtaStepDiag> steps;
  std::vector<double> final_logits;  // from the configured prediction side
};

// Runs cfg.steps adaptation steps from the checkpoint (which is not
// modified) and scores the graph with the adapted model.
AdaptResult adapt(const ModelParams& checkpoint, const MessageGraph& mg,
                  const Matrix& x_orig, const CountMatrix& counts,
                  const MotifTaxonomy& tax, const TtaConfig& cfg);

}  // namespace temg
