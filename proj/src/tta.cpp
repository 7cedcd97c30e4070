#include "temg/tta.hpp"

#include <algorithm>
#include <cmath>

#include "temg/common.hpp"
#include "temg/rng.hpp"

namespace temg {

void validate(const TtaConfig& cfg) {
  if (!(cfg.tau_low >= 0.0 && cfg.tau_low < cfg.tau_high && cfg.tau_high <= 1.0))
    throw ConfigError("confidence band needs 0 <= tau_low < tau_high <= 1");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw ConfigError("ema alpha must be in [0,1]");
  if (cfg.beta < 0.0) throw ConfigError("beta must be >= 0");
  if (cfg.temperature <= 0.0) throw ConfigError("temperature must be positive");
  if (cfg.gamma <= -1.0 || cfg.gamma >= 1.0)
    throw ConfigError("gamma must be in (-1,1)");
  if (cfg.edge_drop_p < 0.0 || cfg.edge_drop_p >= 1.0)
    throw ConfigError("edge drop probability must be in [0,1)");
  if (cfg.lr <= 0.0) throw ConfigError("tta lr must be positive");
  if (cfg.steps < 0) throw ConfigError("tta steps must be >= 0");
  if (cfg.neg_samples < 1) throw ConfigError("neg_samples must be >= 1");
}

double binary_confidence(double logit) {
  double s = sigmoid(logit);
  return std::max(s, 1.0 - s);
}

std::vector<uint32_t> confidence_mask(const std::vector<double>& logits,
                                      double tau_low, double tau_high) {
  std::vector<uint32_t> mask;
  for (size_t v = 0; v < logits.size(); ++v) {
    double p = binary_confidence(logits[v]);
    if (p > tau_low && p <= tau_high) mask.push_back(static_cast<uint32_t>(v));
  }
  return mask;
}

namespace {

double row_dot(const double* a, const double* b, size_t d) {
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

double row_norm(const double* a, size_t d) {
  return std::sqrt(row_dot(a, a, d));
}

// cosine between rows, with d(cos)/d(b) accumulated into gb when requested;
// zero-norm rows yield cosine 0 and zero gradient.
double cosine(const double* a, const double* b, size_t d, double scale = 0.0,
              double* gb = nullptr) {
  double na = row_norm(a, d), nb = row_norm(b, d);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = row_dot(a, b, d) / (na * nb);
  if (gb) {
    // d cos / d b = a/(|a||b|) - cos * b/|b|^2
    double inv_ab = 1.0 / (na * nb), inv_b2 = 1.0 / (nb * nb);
    for (size_t i = 0; i < d; ++i)
      gb[i] += scale * (a[i] * inv_ab - c * b[i] * inv_b2);
  }
  return c;
}

}  // namespace

double sim_loss(const Matrix& teacher_hidden, const Matrix& student_hidden,
                const std::vector<uint32_t>& mask, Matrix* grad_out) {
  if (teacher_hidden.rows() != student_hidden.rows() ||
      teacher_hidden.cols() != student_hidden.cols())
    throw ConfigError("sim_loss shape mismatch");
  if (mask.empty()) throw ConfigError("sim_loss over empty mask");
  const size_t d = teacher_hidden.cols();
  const double w = -1.0 / static_cast<double>(mask.size());
  double total = 0.0;
  for (uint32_t v : mask) {
    double* gb = grad_out ? grad_out->row(v) : nullptr;
    double c = cosine(teacher_hidden.row(v), student_hidden.row(v), d, w, gb);
    total += 1.0 - c;
  }
  return total / static_cast<double>(mask.size());
}

InfoNceStats info_nce_loss(const Matrix& hidden, const Matrix& x_motif,
                           const std::vector<uint32_t>& mask,
                           const TtaConfig& cfg, uint64_t step_seed,
                           Matrix* grad_out) {
  constexpr size_t kPoolExtra = 8;
  const size_t n = hidden.rows();
  const size_t d = hidden.cols();
  if (x_motif.rows() != n) throw ConfigError("info_nce shape mismatch");
  InfoNceStats stats;
  if (n < 2) {
    stats.skipped = mask.size();
    return stats;
  }

  struct Term {
    uint32_t anchor;
    uint32_t pos;
    std::vector<uint32_t> negs;
  };
  std::vector<Term> terms;
  for (uint32_t i : mask) {
    Rng rng(mix64(cfg.seed, step_seed, 0x1F0CEULL + i));
    size_t want = std::min<size_t>(static_cast<size_t>(cfg.neg_samples) + kPoolExtra,
                                   n - 1);
    std::vector<size_t> pool = rng.sample_without_replacement(n - 1, want);
    std::vector<uint32_t> positives, negatives;
    for (size_t raw : pool) {
      // skip over the anchor to sample from {0..n-1} \ {i}
      uint32_t j = static_cast<uint32_t>(raw >= i ? raw + 1 : raw);
      double c = cosine(x_motif.row(i), x_motif.row(j), x_motif.cols());
      if (c > cfg.gamma)
        positives.push_back(j);
      else if (negatives.size() < static_cast<size_t>(cfg.neg_samples))
        negatives.push_back(j);
    }
    if (positives.empty()) {
      stats.skipped++;
      continue;
    }
    Term t;
    t.anchor = i;
    t.pos = positives[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(positives.size()) - 1))];
    t.negs = std::move(negatives);
    terms.push_back(std::move(t));
  }
  stats.contributors = terms.size();
  if (terms.empty()) return stats;

  const double inv_cnt = 1.0 / static_cast<double>(terms.size());
  const double inv_temp = 1.0 / cfg.temperature;
  for (const Term& t : terms) {
    const double* hi = hidden.row(t.anchor);
    double c_pos = cosine(hi, hidden.row(t.pos), d);
    double s_pos = std::exp(c_pos * inv_temp);
    double denom = s_pos;
    std::vector<double> s_neg(t.negs.size());
    for (size_t k = 0; k < t.negs.size(); ++k) {
      double c = cosine(hi, hidden.row(t.negs[k]), d);
      s_neg[k] = std::exp(c * inv_temp);
      denom += s_neg[k];
    }
    stats.loss += -std::log(s_pos / denom) * inv_cnt;
    if (!grad_out) continue;
    // d(-log(s_pos/denom))/d c_pos = (s_pos/denom - 1)/temp, /d c_k = (s_k/denom)/temp
    double g_pos = (s_pos / denom - 1.0) * inv_temp * inv_cnt;
    cosine(hi, hidden.row(t.pos), d, g_pos, grad_out->row(t.pos));
    cosine(hidden.row(t.pos), hi, d, g_pos, grad_out->row(t.anchor));
    for (size_t k = 0; k < t.negs.size(); ++k) {
      double g_neg = (s_neg[k] / denom) * inv_temp * inv_cnt;
      cosine(hi, hidden.row(t.negs[k]), d, g_neg, grad_out->row(t.negs[k]));
      cosine(hidden.row(t.negs[k]), hi, d, g_neg, grad_out->row(t.anchor));
    }
  }
  return stats;
}

void ema_update(ModelParams& teacher, const ModelParams& student, double alpha) {
  auto tt = teacher.tensors();
  auto st = student.tensors();
  if (tt.size() != st.size()) throw ConfigError("ema over mismatched models");
  for (size_t i = 0; i < tt.size(); ++i) {
    auto& tv = tt[i].second->raw();
    const auto& sv = st[i].second->raw();
    if (tv.size() != sv.size()) throw ConfigError("ema tensor shape mismatch");
    for (size_t j = 0; j < tv.size(); ++j)
      tv[j] = alpha * tv[j] + (1.0 - alpha) * sv[j];
  }
}

TtaStepDiag tta_step(TtaState& state, const MessageGraph& mg,
                     const Matrix& x_orig, const CountMatrix& counts,
                     const MotifTaxonomy& tax, const TtaConfig& cfg) {
  validate(cfg);
  TtaStepDiag diag;
  diag.step = ++state.step;
  const uint64_t step_seed = mix64(cfg.seed, 0x57E9ULL, static_cast<uint64_t>(state.step));

  ForwardResult teacher_fwd =
      forward(state.teacher, mg, x_orig, counts, tax, Mode::eval, 0);
  std::vector<uint32_t> mask =
      confidence_mask(teacher_fwd.logits, cfg.tau_low, cfg.tau_high);
  diag.mask_size = mask.size();

  if (!mask.empty()) {
    MessageGraph perturbed = mg.drop_edges(cfg.edge_drop_p, step_seed);
    ForwardCache cache;
    ForwardResult student_fwd = forward(state.student, perturbed, x_orig, counts,
                                        tax, Mode::eval, 0, &cache);
    Matrix dhidden(student_fwd.hidden.rows(), student_fwd.hidden.cols());
    diag.l_sim = sim_loss(teacher_fwd.hidden, student_fwd.hidden, mask, &dhidden);
    if (cfg.beta > 0.0) {
      Matrix dinfo(dhidden.rows(), dhidden.cols());
      InfoNceStats stats = info_nce_loss(student_fwd.hidden, student_fwd.x_motif,
                                         mask, cfg, step_seed, &dinfo);
      diag.l_info = stats.loss;
      diag.info_skipped = stats.skipped;
      axpy_inplace(dhidden, cfg.beta, dinfo);
    }
    diag.l_total = diag.l_sim + cfg.beta * diag.l_info;
    std::vector<double> zero_dlogits(mg.n, 0.0);
    ModelParams grads = backward(state.student, perturbed, x_orig, tax, cache,
                                 zero_dlogits, &dhidden);
    state.opt.step(state.student, grads);
  }
  ema_update(state.teacher, state.student, cfg.alpha);
  return diag;
}

AdaptResult adapt(const ModelParams& checkpoint, const MessageGraph& mg,
                  const Matrix& x_orig, const CountMatrix& counts,
                  const MotifTaxonomy& tax, const TtaConfig& cfg) {
  validate(cfg);
  TtaState state(checkpoint, cfg.lr);
  AdaptResult out;
  for (int s = 0; s < cfg.steps; ++s)
    out.steps.push_back(tta_step(state, mg, x_orig, counts, tax, cfg));
  const ModelParams& predictor =
      cfg.predict_with_student ? state.student : state.teacher;
  out.final_logits =
      forward(predictor, mg, x_orig, counts, tax, Mode::eval, 0).logits;
  out.teacher = std::move(state.teacher);
  out.student = std::move(state.student);
  return out;
}

}  // namespace temg
